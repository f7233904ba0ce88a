#include "etho/behavior/features.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "etho/error.hpp"
#include "etho/util/text.hpp"

namespace etho::behavior {

void FeatureSequence::validate() const {
  const std::string who = "features for animal '" + animal + "': ";
  if (animal.empty()) throw ValidationError("feature sequence without animal id");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ValidationError(who + "fps must be > 0");
  if (x.rows() < 2) throw ValidationError(who + "need at least 2 frames");
  if (x.cols() < 1) throw ValidationError(who + "need at least 1 dimension");
  if (!x.allFinite()) throw ValidationError(who + "non-finite feature value");
}

void validate_session(const std::vector<FeatureSequence>& sequences) {
  if (sequences.empty()) throw ValidationError("feature session is empty");
  std::set<std::string> ids;
  for (const auto& s : sequences) {
    s.validate();
    if (!ids.insert(s.animal).second) throw ValidationError("duplicate animal id '" + s.animal + "'");
    if (s.frames() != sequences.front().frames()) {
      throw ValidationError("animal '" + s.animal + "' has " + std::to_string(s.frames()) + " frames, expected " +
                            std::to_string(sequences.front().frames()));
    }
    if (s.fps != sequences.front().fps) throw ValidationError("animal '" + s.animal + "' has a different fps");
  }
}

std::vector<FeatureSequence> read_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file '" + path.string() + "'");
  std::vector<FeatureSequence> out;
  std::string line;
  long long line_no = 0;
  auto fail = [&](const std::string& msg) {
    throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = util::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::istringstream hs{std::string(t)};
    std::string k1, k2, k3, k4;
    FeatureSequence seq;
    long long T = 0, D = 0;
    if (!(hs >> k1 >> seq.animal >> k2 >> seq.fps >> k3 >> T >> k4 >> D) || k1 != "animal" || k2 != "fps" ||
        k3 != "T" || k4 != "D") {
      fail("expected 'animal <id> fps <hz> T <frames> D <dims>'");
    }
    if (T < 0 || D < 0) fail("negative matrix size");
    seq.x.resize(T, D);
    for (long long r = 0; r < T; ++r) {
      if (!std::getline(in, line)) fail("unexpected end of file in animal '" + seq.animal + "'");
      ++line_no;
      std::istringstream rs(line);
      for (long long c = 0; c < D; ++c) {
        std::string tok;
        if (!(rs >> tok)) fail("expected " + std::to_string(D) + " values");
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || ptr != tok.data() + tok.size()) fail("not a number: '" + tok + "'");
        seq.x(r, c) = v;
      }
      std::string extra;
      if (rs >> extra) fail("more than " + std::to_string(D) + " values");
    }
    out.push_back(std::move(seq));
  }
  validate_session(out);
  return out;
}

std::string format_features(const std::vector<FeatureSequence>& sequences) {
  std::string out = "# etho-features v1\n";
  for (const auto& s : sequences) {
    out += "animal " + s.animal + " fps " + util::fmt_double(s.fps) + " T " + std::to_string(s.x.rows()) + " D " +
           std::to_string(s.x.cols()) + "\n";
    for (Eigen::Index r = 0; r < s.x.rows(); ++r) {
      for (Eigen::Index c = 0; c < s.x.cols(); ++c) {
        if (c) out += ' ';
        out += util::fmt_double(s.x(r, c));
      }
      out += '\n';
    }
  }
  return out;
}

void write_features(const std::filesystem::path& path, const std::vector<FeatureSequence>& sequences) {
  util::write_file(path, format_features(sequences));
}

}  // namespace etho::behavior
