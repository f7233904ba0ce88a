#include "etho/behavior/dec.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>

#include "etho/error.hpp"

namespace etho::behavior {

using Eigen::Index;
using Eigen::MatrixXd;

namespace {

MatrixXd squared_distances(const MatrixXd& x, const MatrixXd& mu) {
  MatrixXd d(x.rows(), mu.rows());
  for (Index j = 0; j < mu.rows(); ++j) {
    d.col(j) = (x.rowwise() - mu.row(j)).rowwise().squaredNorm();
  }
  return d;
}

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

MatrixXd soft_assign(const MatrixXd& x, const MatrixXd& centroids, double alpha) {
  if (x.cols() != centroids.cols()) throw ValidationError("soft_assign: feature and centroid dimensions differ");
  const MatrixXd d = squared_distances(x, centroids);
  const double power = -(alpha + 1.0) / 2.0;
  MatrixXd q = ((d.array() / alpha) + 1.0).pow(power).matrix();
  for (Index i = 0; i < q.rows(); ++i) q.row(i) /= q.row(i).sum();
  return q;
}

MatrixXd target_distribution(const MatrixXd& q) {
  const Eigen::RowVectorXd f = q.colwise().sum();
  for (Index k = 0; k < f.size(); ++k) {
    if (!(f(k) > 0.0)) throw DegenerateCluster("cluster " + std::to_string(k) + " has no soft mass");
  }
  MatrixXd p = q.array().square().matrix();
  for (Index k = 0; k < p.cols(); ++k) p.col(k) /= f(k);
  for (Index i = 0; i < p.rows(); ++i) p.row(i) /= p.row(i).sum();
  return p;
}

double kl_divergence(const MatrixXd& p, const MatrixXd& q) {
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index k = 0; k < p.cols(); ++k) {
      if (p(i, k) > 0.0) total += p(i, k) * std::log(p(i, k) / q(i, k));
    }
  }
  return total;
}

MatrixXd kl_gradient(const MatrixXd& x, const MatrixXd& centroids, const MatrixXd& p, double alpha) {
  const MatrixXd q = soft_assign(x, centroids, alpha);
  const MatrixXd d = squared_distances(x, centroids);
  MatrixXd grad = MatrixXd::Zero(centroids.rows(), centroids.cols());
  const double c = -(alpha + 1.0) / alpha;
  for (Index j = 0; j < centroids.rows(); ++j) {
    for (Index i = 0; i < x.rows(); ++i) {
      const double w = (p(i, j) - q(i, j)) / (1.0 + d(i, j) / alpha);
      grad.row(j) += w * (x.row(i) - centroids.row(j));
    }
  }
  return c * grad;
}

void DecConfig::validate() const {
  if (k < 2) throw ValidationError("DEC needs k >= 2 clusters, got " + std::to_string(k));
  if (epochs < 0) throw ConfigError("dec.epochs must be >= 0");
  if (target_interval < 1) throw ConfigError("dec.target_interval must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("dec.alpha must be > 0");
  if (!(initial_step > 0.0)) throw ConfigError("dec.initial_step must be > 0");
  if (kmeans_iterations < 0) throw ConfigError("dec.kmeans_iterations must be >= 0");
  if (max_reinit < 0) throw ConfigError("dec.max_reinit must be >= 0");
}

MatrixXd kmeans_init(const MatrixXd& x, int k, int iterations, std::uint64_t seed) {
  const Index n = x.rows();
  if (n < k) throw DegenerateCluster("fewer frames than clusters");
  std::mt19937_64 rng(seed);
  MatrixXd mu(k, x.cols());
  mu.row(0) = x.row(static_cast<Index>(rng() % static_cast<std::uint64_t>(n)));
  Eigen::VectorXd nearest = (x.rowwise() - mu.row(0)).rowwise().squaredNorm();
  for (int j = 1; j < k; ++j) {
    const double total = nearest.sum();
    if (!(total > 0.0)) throw DegenerateCluster("fewer distinct frames than clusters (k=" + std::to_string(k) + ")");
    const double target = uniform01(rng) * total;
    double acc = 0.0;
    Index pick = n - 1;
    for (Index i = 0; i < n; ++i) {
      acc += nearest(i);
      if (acc > target && nearest(i) > 0.0) {
        pick = i;
        break;
      }
    }
    while (nearest(pick) == 0.0) --pick;  // guard against round-off at the tail
    mu.row(j) = x.row(pick);
    nearest = nearest.cwiseMin((x.rowwise() - mu.row(j)).rowwise().squaredNorm());
  }

  std::vector<Index> label(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < iterations; ++it) {
    const MatrixXd d = squared_distances(x, mu);
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      d.row(i).minCoeff(&best);  // first minimum: lower id on ties
      if (label[static_cast<std::size_t>(i)] != best) {
        label[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    MatrixXd sum = MatrixXd::Zero(k, x.cols());
    Eigen::VectorXd count = Eigen::VectorXd::Zero(k);
    for (Index i = 0; i < n; ++i) {
      sum.row(label[static_cast<std::size_t>(i)]) += x.row(i);
      count(label[static_cast<std::size_t>(i)]) += 1.0;
    }
    for (int j = 0; j < k; ++j) {
      if (count(j) > 0.0) mu.row(j) = sum.row(j) / count(j);
    }
  }
  return mu;
}

namespace {

struct Pooled {
  MatrixXd x;
  std::vector<std::pair<Index, Index>> blocks;  // (first row, rows) per animal
};

Pooled pool(std::span<const FeatureSequence> sequences) {
  Pooled out;
  Index rows = 0;
  for (const auto& s : sequences) rows += s.x.rows();
  out.x.resize(rows, sequences.front().x.cols());
  Index at = 0;
  for (const auto& s : sequences) {
    out.x.middleRows(at, s.x.rows()) = s.x;
    out.blocks.emplace_back(at, s.x.rows());
    at += s.x.rows();
  }
  return out;
}

// Per-animal targets stacked in pooled row order.
MatrixXd stacked_targets(const Pooled& data, const MatrixXd& q) {
  MatrixXd p(q.rows(), q.cols());
  for (const auto& [first, rows] : data.blocks) {
    p.middleRows(first, rows) = target_distribution(q.middleRows(first, rows));
  }
  return p;
}

// Index of the first cluster whose soft mass vanished in some animal.
std::optional<Index> dead_cluster(const Pooled& data, const MatrixXd& q) {
  for (const auto& [first, rows] : data.blocks) {
    const Eigen::RowVectorXd f = q.middleRows(first, rows).colwise().sum();
    for (Index k = 0; k < f.size(); ++k) {
      if (!(f(k) > 1e-12 * static_cast<double>(rows))) return k;
    }
  }
  return std::nullopt;
}

}  // namespace

DecModel dec_fit(std::span<const FeatureSequence> sequences, const DecConfig& config) {
  config.validate();
  if (sequences.empty()) throw ValidationError("dec_fit needs at least one feature sequence");
  for (const auto& s : sequences) {
    s.validate();
    if (s.x.cols() != sequences.front().x.cols()) throw ValidationError("feature dimensions differ between animals");
  }
  const Pooled data = pool(sequences);

  DecModel model;
  model.k = config.k;
  model.alpha = config.alpha;
  model.seed = config.seed;
  model.centroids = kmeans_init(data.x, config.k, config.kmeans_iterations, config.seed);

  auto reinit = [&](Index k) {
    if (model.reinitializations >= config.max_reinit) {
      throw DegenerateCluster("cluster " + std::to_string(k) + " died after " +
                              std::to_string(model.reinitializations) + " re-initializations");
    }
    ++model.reinitializations;
    const MatrixXd d = squared_distances(data.x, model.centroids);
    Index far = 0;
    d.rowwise().minCoeff().maxCoeff(&far);
    model.centroids.row(k) = data.x.row(far);
  };

  MatrixXd q = soft_assign(data.x, model.centroids, config.alpha);
  while (auto k = dead_cluster(data, q)) {
    reinit(*k);
    q = soft_assign(data.x, model.centroids, config.alpha);
  }
  MatrixXd p = stacked_targets(data, q);
  double loss = kl_divergence(p, q);
  double step = config.initial_step;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (epoch > 0 && epoch % config.target_interval == 0) {
      if (auto k = dead_cluster(data, q)) {
        reinit(*k);
        q = soft_assign(data.x, model.centroids, config.alpha);
        p = stacked_targets(data, q);
        loss = kl_divergence(p, q);
      } else {
        MatrixXd fresh = stacked_targets(data, q);
        const double fresh_loss = kl_divergence(fresh, q);
        if (fresh_loss <= loss) {
          p = std::move(fresh);
          loss = fresh_loss;
        }
      }
    }
    const MatrixXd grad = kl_gradient(data.x, model.centroids, p, config.alpha);
    const double g2 = grad.squaredNorm();
    bool moved = false;
    if (g2 > 0.0) {
      double s = step;
      for (int tries = 0; tries < 60; ++tries, s *= 0.5) {
        const MatrixXd trial = model.centroids - s * grad;
        const MatrixXd tq = soft_assign(data.x, trial, config.alpha);
        const double tl = kl_divergence(p, tq);
        if (tl <= loss - 1e-4 * s * g2) {
          model.centroids = trial;
          q = tq;
          loss = tl;
          step = 2.0 * s;
          moved = true;
          break;
        }
      }
    }
    if (!moved) step = config.initial_step;
    model.trace.push_back(loss);
  }
  return model;
}

}  // namespace etho::behavior
