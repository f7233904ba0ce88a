#include "etho/behavior/metrics.hpp"

#include <algorithm>
#include <map>

#include "etho/error.hpp"

namespace etho::behavior {

namespace {
double choose2(double n) { return n * (n - 1.0) / 2.0; }
}  // namespace

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw ValidationError("adjusted_rand_index: labelings differ in length");
  const double n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> ra, rb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    ra[a[i]] += 1.0;
    rb[b[i]] += 1.0;
  }
  double index = 0.0, sa = 0.0, sb = 0.0;
  for (const auto& [k, v] : joint) index += choose2(v);
  for (const auto& [k, v] : ra) sa += choose2(v);
  for (const auto& [k, v] : rb) sb += choose2(v);
  const double expected = sa * sb / choose2(n);
  const double max_index = 0.5 * (sa + sb);
  if (max_index == expected) return 1.0;  // both labelings trivial
  return (index - expected) / (max_index - expected);
}

std::vector<long long> boundaries(const std::vector<int>& labels) {
  std::vector<long long> out;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (labels[i] != labels[i - 1]) out.push_back(static_cast<long long>(i));
  }
  return out;
}

double boundary_recall(const std::vector<long long>& truth, const std::vector<long long>& predicted,
                       long long tolerance) {
  if (truth.empty()) return 1.0;
  std::vector<long long> sorted = predicted;
  std::sort(sorted.begin(), sorted.end());
  std::size_t hit = 0;
  for (long long t : truth) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(), t - tolerance);
    if (it != sorted.end() && *it <= t + tolerance) ++hit;
  }
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

}  // namespace etho::behavior
