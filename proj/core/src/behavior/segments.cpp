#include "etho/behavior/segments.hpp"

#include "etho/error.hpp"
#include "etho/util/csv.hpp"

namespace etho::behavior {

std::vector<int> hard_labels(const Eigen::MatrixXd& q) {
  std::vector<int> out(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    Eigen::Index best = 0;
    q.row(i).maxCoeff(&best);  // first maximum
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

namespace {
ClipSegment make(const std::string& animal, long long start, long long end, int cluster, double fps) {
  return {animal, start, end, cluster, static_cast<double>(end - start) / fps};
}
}  // namespace

std::vector<ClipSegment> segments_from_labels(const std::string& animal, const std::vector<int>& labels, double fps) {
  std::vector<ClipSegment> out;
  long long start = 0;
  const auto n = static_cast<long long>(labels.size());
  for (long long i = 1; i <= n; ++i) {
    if (i == n || labels[static_cast<std::size_t>(i)] != labels[static_cast<std::size_t>(start)]) {
      out.push_back(make(animal, start, i, labels[static_cast<std::size_t>(start)], fps));
      start = i;
    }
  }
  return out;
}

std::vector<int> labels_from_segments(const std::vector<ClipSegment>& segments) {
  std::vector<int> out;
  for (const auto& s : segments) out.insert(out.end(), static_cast<std::size_t>(s.length()), s.cluster);
  return out;
}

std::vector<ClipSegment> absorb_short_runs(std::vector<ClipSegment> segs, double min_duration, double fps) {
  auto is_short = [&](const ClipSegment& s) { return static_cast<double>(s.length()) / fps < min_duration; };
  while (segs.size() > 1) {
    std::size_t victim = segs.size();
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (is_short(segs[i]) && (victim == segs.size() || segs[i].length() < segs[victim].length())) victim = i;
    }
    if (victim == segs.size()) break;
    std::size_t into;
    if (victim == 0) {
      into = 1;
    } else if (victim + 1 == segs.size()) {
      into = victim - 1;
    } else {
      into = segs[victim + 1].length() > segs[victim - 1].length() ? victim + 1 : victim - 1;
    }
    auto& target = segs[into];
    target.start = std::min(target.start, segs[victim].start);
    target.end = std::max(target.end, segs[victim].end);
    segs.erase(segs.begin() + static_cast<std::ptrdiff_t>(victim));
    // Coalesce neighbours that now share a cluster.
    std::vector<ClipSegment> merged;
    for (auto& s : segs) {
      if (!merged.empty() && merged.back().cluster == s.cluster) {
        merged.back().end = s.end;
      } else {
        merged.push_back(s);
      }
    }
    segs = std::move(merged);
  }
  for (auto& s : segs) s.duration = static_cast<double>(s.length()) / fps;
  return segs;
}

std::vector<ClipSegment> segment_extract(const FeatureSequence& sequence, const DecModel& model,
                                         double min_duration) {
  if (!(min_duration >= 0.0)) throw ValidationError("min_duration must be >= 0");
  if (model.centroids.rows() < 2) throw ValidationError("segment_extract needs a fitted model");
  const auto labels = hard_labels(soft_assign(sequence.x, model.centroids, model.alpha));
  auto segs = segments_from_labels(sequence.animal, labels, sequence.fps);
  return absorb_short_runs(std::move(segs), min_duration, sequence.fps);
}

void validate_partition(const std::vector<ClipSegment>& segments, long long frames) {
  if (segments.empty()) throw ValidationError("no segments");
  long long expect = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    const std::string who = "segment " + std::to_string(i) + " of animal '" + s.animal + "'";
    if (s.start >= s.end) throw ValidationError(who + " is empty");
    if (s.start > expect) throw ValidationError(who + ": non-covering (gap before frame " + std::to_string(s.start) + ")");
    if (s.start < expect) throw ValidationError(who + ": overlapping");
    if (i > 0 && segments[i - 1].cluster == s.cluster) throw ValidationError(who + " repeats the previous cluster");
    expect = s.end;
  }
  if (expect != frames) throw ValidationError("segments of animal '" + segments.front().animal + "': non-covering (end " +
                                              std::to_string(expect) + " of " + std::to_string(frames) + ")");
}

std::string segment_rows(const std::vector<ClipSegment>& segments) {
  std::string out;
  for (const auto& s : segments) {
    out += s.animal + "," + std::to_string(s.start) + "," + std::to_string(s.end) + "," + std::to_string(s.cluster) + "\n";
  }
  return out;
}

std::vector<ClipSegment> read_segments(const std::filesystem::path& path, double fps) {
  const auto t = util::CsvTable::read(path);
  t.require_columns({"animal", "start_frame", "end_frame", "cluster"});
  std::vector<ClipSegment> out;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    out.push_back(make(t.str(i, "animal"), t.integer(i, "start_frame"), t.integer(i, "end_frame"),
                       static_cast<int>(t.integer(i, "cluster")), fps));
  }
  return out;
}

}  // namespace etho::behavior
