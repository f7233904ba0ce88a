#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "etho/behavior/features.hpp"

namespace etho::behavior {

// Student-t soft assignment: q[t,k] proportional to
// (1 + |x_t - mu_k|^2 / alpha)^(-(alpha+1)/2), rows summing to one.
Eigen::MatrixXd soft_assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, double alpha = 1.0);

// Sharpened target p[t,k] proportional to q[t,k]^2 / f_k, f_k = sum_t q[t,k].
// Throws DegenerateCluster when some f_k is zero.
Eigen::MatrixXd target_distribution(const Eigen::MatrixXd& q);

// KL(p || q) summed over rows; terms with p = 0 contribute nothing.
double kl_divergence(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

// Gradient of KL(p || soft_assign(x, centroids)) with respect to the
// centroids, p held fixed. K x D.
Eigen::MatrixXd kl_gradient(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, const Eigen::MatrixXd& p,
                            double alpha = 1.0);

struct DecConfig {
  int k = 10;
  int epochs = 200;           // gradient steps
  int target_interval = 10;   // steps between target refreshes
  double alpha = 1.0;
  double initial_step = 1.0;  // first line-search trial step
  int kmeans_iterations = 100;
  int max_reinit = 2;
  double tolerance = 1e-6;    // allowed increase between recorded losses
  std::uint64_t seed = 0;

  void validate() const;
};

struct DecModel {
  int k = 0;
  double alpha = 1.0;
  Eigen::MatrixXd centroids;  // K x D
  std::vector<double> trace;  // summed per-animal KL after each step
  std::uint64_t seed = 0;
  int reinitializations = 0;
};

// Seeded k-means++ initialization over `x` followed by Lloyd iterations.
// Throws DegenerateCluster when x has fewer than k distinct rows.
Eigen::MatrixXd kmeans_init(const Eigen::MatrixXd& x, int k, int iterations, std::uint64_t seed);

// Minimizes the sum over animals of KL(p_a || q_a) by gradient descent on
// the shared centroids with a backtracking line search. Targets are
// recomputed per animal every target_interval steps; a refresh that would
// raise the loss is skipped, so the recorded trace never increases.
// Clusters whose soft mass vanishes are re-seeded at the frame farthest from
// every centroid, at most max_reinit times; then DegenerateCluster.
DecModel dec_fit(std::span<const FeatureSequence> sequences, const DecConfig& config);

}  // namespace etho::behavior
