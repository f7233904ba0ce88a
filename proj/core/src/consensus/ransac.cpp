#include "etho/consensus/ransac.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "etho/error.hpp"

namespace etho::consensus {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  std::vector<std::size_t> subset;
  std::vector<std::string> inlier_names;  // sorted
  double mean = kInf;
  WorldPoint point;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.inlier_names.size() != b.inlier_names.size()) {
    return a.inlier_names.size() > b.inlier_names.size();
  }
  if (a.mean != b.mean) return a.mean < b.mean;
  return a.inlier_names < b.inlier_names;
}

std::vector<double> errors_at(std::span<const Observation> obs, const WorldPoint& p) {
  std::vector<double> out(obs.size(), kInf);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    try {
      out[i] = geometry::reprojection_error(obs[i].camera.get(), p, obs[i].pixel);
    } catch (const DegenerateDepth&) {
    }
  }
  return out;
}

std::optional<Candidate> evaluate(std::span<const Observation> obs, std::vector<std::size_t> subset,
                                  double tau) {
  std::vector<Observation> picked;
  picked.reserve(subset.size());
  for (auto i : subset) picked.push_back(obs[i]);
  WorldPoint p;
  try {
    p = geometry::triangulate_dlt(picked);
  } catch (const DegenerateGeometry&) {
    return std::nullopt;
  }
  const auto errs = errors_at(obs, p);
  Candidate c;
  c.subset = std::move(subset);
  c.point = p;
  double sum = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (errs[i] <= tau) {
      c.inlier_names.push_back(obs[i].camera.get().name);
      sum += errs[i];
    }
  }
  if (c.inlier_names.size() < 2) return std::nullopt;
  std::sort(c.inlier_names.begin(), c.inlier_names.end());
  c.mean = sum / static_cast<double>(c.inlier_names.size());
  return c;
}

void check_unique_names(std::span<const Observation> obs) {
  std::set<std::string> names;
  for (const auto& o : obs) {
    if (!names.insert(o.camera.get().name).second) {
      throw ValidationError("camera '" + o.camera.get().name + "' observed twice");
    }
  }
}

}  // namespace

void RansacConfig::validate() const {
  if (!(tau_reproj > 0.0)) throw ConfigError("ransac.tau_reproj must be > 0");
  if (max_subset_size < 2) throw ConfigError("ransac.max_subset_size must be >= 2");
  if (iterations < 1) throw ConfigError("ransac.iterations must be >= 1");
  if (exhaustive_max_cameras < 0 || exhaustive_max_cameras > 20) {
    throw ConfigError("ransac.exhaustive_max_cameras must be in [0, 20]");
  }
}

bool RansacConfig::exhaustive_for(std::size_t n) const {
  switch (mode) {
    case Mode::kExhaustive:
      return true;
    case Mode::kRandomized:
      return false;
    case Mode::kAuto:
      break;
  }
  return n <= static_cast<std::size_t>(exhaustive_max_cameras);
}

double Keypoint3DEstimate::mean_error_all() const {
  if (per_camera_error.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& [name, e] : per_camera_error) sum += e;
  return sum / static_cast<double>(per_camera_error.size());
}

std::map<std::string, double> camera_errors(std::span<const Observation> obs, const WorldPoint& p) {
  const auto errs = errors_at(obs, p);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < obs.size(); ++i) out[obs[i].camera.get().name] = errs[i];
  return out;
}

ConsensusSelection select_consensus(std::span<const Observation> obs, const RansacConfig& config) {
  if (obs.size() < 2) {
    throw InsufficientViews("consensus needs at least 2 views, got " + std::to_string(obs.size()));
  }
  check_unique_names(obs);
  const std::size_t n = obs.size();
  std::optional<Candidate> best;
  auto consider = [&](std::vector<std::size_t> subset) {
    auto c = evaluate(obs, std::move(subset), config.tau_reproj);
    if (c && (!best || better(*c, *best))) best = std::move(c);
  };

  if (config.exhaustive_for(n)) {
    if (n > 20) throw ConfigError("exhaustive consensus limited to 20 cameras");
    const std::uint32_t limit = 1u << n;
    for (std::uint32_t mask = 1; mask < limit; ++mask) {
      if (std::popcount(mask) < 2) continue;
      std::vector<std::size_t> subset;
      for (std::size_t i = 0; i < n; ++i) {
        if (mask & (1u << i)) subset.push_back(i);
      }
      consider(std::move(subset));
    }
  } else {
    std::mt19937_64 rng(config.seed);
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(config.max_subset_size), n);
    std::vector<std::size_t> order(n);
    for (int it = 0; it < config.iterations; ++it) {
      std::iota(order.begin(), order.end(), std::size_t{0});
      // Partial Fisher-Yates with an explicit draw so results do not depend
      // on the standard library's shuffle implementation.
      for (std::size_t i = 0; i < k; ++i) {
        const auto j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(order[i], order[j]);
      }
      std::vector<std::size_t> subset(order.begin(), order.begin() + static_cast<long>(k));
      std::sort(subset.begin(), subset.end());
      consider(std::move(subset));
    }
  }

  if (!best) throw NoConsensus("no camera subset reaches two inliers");
  ConsensusSelection sel;
  for (auto i : best->subset) sel.seed_subset.push_back(obs[i].camera.get().name);
  sel.inliers = {best->inlier_names.begin(), best->inlier_names.end()};
  sel.mean_inlier_error = best->mean;
  sel.point = best->point;
  return sel;
}

namespace {

Keypoint3DEstimate make_estimate(std::span<const Observation> obs, const WorldPoint& p,
                                 const std::set<std::string>& inliers) {
  Keypoint3DEstimate est;
  est.point = p;
  est.per_camera_error = camera_errors(obs, p);
  est.inlier_cameras = inliers;
  double sum = 0.0;
  for (const auto& name : inliers) sum += est.per_camera_error.at(name);
  est.mean_inlier_error = inliers.empty() ? 0.0 : sum / static_cast<double>(inliers.size());
  return est;
}

std::set<std::string> within(const std::map<std::string, double>& errs, double tau) {
  std::set<std::string> out;
  for (const auto& [name, e] : errs) {
    if (e <= tau) out.insert(name);
  }
  return out;
}

}  // namespace

Keypoint3DEstimate ransac_triangulate(std::span<const Observation> obs, const RansacConfig& config) {
  const ConsensusSelection sel = select_consensus(obs, config);
  Keypoint3DEstimate est = make_estimate(obs, sel.point, sel.inliers);

  // Re-triangulate on the consensus set; repeat while the inlier set moves.
  std::set<std::string> current = sel.inliers;
  for (int round = 0; round < 4; ++round) {
    std::vector<Observation> picked;
    for (const auto& o : obs) {
      if (current.contains(o.camera.get().name)) picked.push_back(o);
    }
    WorldPoint p;
    try {
      p = geometry::triangulate_dlt(picked);
    } catch (const DegenerateGeometry&) {
      break;
    }
    const auto errs = camera_errors(obs, p);
    auto next = within(errs, config.tau_reproj);
    if (next.size() < 2) break;
    est = make_estimate(obs, p, next);
    if (next == current) break;
    current = std::move(next);
  }
  return est;
}

Keypoint3DEstimate triangulate_trusted(std::span<const Observation> obs) {
  check_unique_names(obs);
  const WorldPoint p = geometry::triangulate_dlt(obs);
  std::set<std::string> all;
  for (const auto& o : obs) all.insert(o.camera.get().name);
  return make_estimate(obs, p, all);
}

}  // namespace etho::consensus
