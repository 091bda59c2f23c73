// Seeded stochastic subgradient descent cores shared by the pivot predictors
// and the final classifier: a sparse trainer over bag-of-words rows with an
// index mask, and a dense trainer with iterate averaging.
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "sclom/common.hpp"
#include "sclom/corpus.hpp"

namespace sclom {
namespace detail {

inline bool masked(int feature, const std::vector<int>& mask) {
  return std::binary_search(mask.begin(), mask.end(), feature);
}

struct SgdSchedule {
  int epochs = 20;
  double lr = 1e-3;
  double reg = 1e-5;  // coefficient of (reg/2) |w|^2 in the mean-form objective
};

// Seeded SGD on the masked mean-form objective
//   J(w) = mean_i loss(y_i w.x_i) + (reg/2) |w|^2
// using the scaled-vector trick w = s*u so the L2 shrink is O(1) per step.
// Returns the last iterate as a sparse (index, weight) list; masked features
// are never touched and zero weights are dropped.
template <class Loss>
std::vector<std::pair<int, double>> sparse_sgd(
    const std::vector<const BowVector*>& xs, const std::vector<int>& ys,
    const std::vector<int>& mask, int dim, const SgdSchedule& p,
    std::uint64_t seed) {
  const int n = static_cast<int>(xs.size());
  std::vector<double> u(dim, 0.0);
  double s = 1.0;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  const long total = static_cast<long>(p.epochs) * n;
  long done = 0;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * (epoch + 1));
    rng.shuffle(order);
    for (int pos = 0; pos < n; ++pos, ++done) {
      const BowVector& x = *xs[order[pos]];
      const double y = ys[order[pos]];
      double lr =
          p.lr * std::max(0.1, 1.0 - static_cast<double>(done) / total);
      // Never step past the regularizer's stationary point (keeps the L2
      // shrink factor in [0, 1) however large reg is).
      if (lr * p.reg > 1.0) lr = 1.0 / p.reg;
      double dot = 0.0;
      for (std::size_t j = 0; j < x.idx.size(); ++j) {
        if (masked(x.idx[j], mask)) continue;
        dot += u[x.idx[j]] * x.val[j];
      }
      double z = y * s * dot;
      double g = Loss::dloss(z);
      s *= 1.0 - lr * p.reg;
      if (s < 1e-9) {  // fold the scale back in before it underflows
        for (auto& v : u) v *= s;
        s = 1.0;
      }
      if (g != 0.0) {
        double step = -lr * g * y / s;
        for (std::size_t j = 0; j < x.idx.size(); ++j) {
          if (masked(x.idx[j], mask)) continue;
          u[x.idx[j]] += step * x.val[j];
        }
      }
    }
  }
  std::vector<std::pair<int, double>> weights;
  for (int j = 0; j < dim; ++j) {
    double w = s * u[j];
    if (w == 0.0) continue;
    if (!std::isfinite(w)) internal_error("sparse_sgd diverged");
    weights.emplace_back(j, w);
  }
  return weights;
}

// Seeded SGD with iterate averaging on the dense mean-form objective
//   J(w) = mean_i loss(y_i w.x_i) + (reg/2) |w|^2.
// The first `burn_in` epochs run plain SGD to skip the transient; after that
// every iterate enters a running average, which is returned.
template <class Loss>
Eigen::VectorXd dense_sgd_averaged(const std::vector<Eigen::VectorXd>& xs,
                                   const std::vector<int>& ys,
                                   const SgdSchedule& p, std::uint64_t seed,
                                   int burn_in = 1) {
  const int n = static_cast<int>(xs.size());
  const int dim = static_cast<int>(xs.front().size());
  Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(dim);
  long avg_count = 0;
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  const long total = static_cast<long>(p.epochs) * n;
  long done = 0;
  for (int epoch = 0; epoch < p.epochs; ++epoch) {
    Rng rng(seed + 0x9e3779b97f4a7c15ULL * (epoch + 1));
    rng.shuffle(order);
    for (int pos = 0; pos < n; ++pos, ++done) {
      const Eigen::VectorXd& x = xs[order[pos]];
      const double y = ys[order[pos]];
      double lr =
          p.lr * std::max(0.1, 1.0 - static_cast<double>(done) / total);
      if (lr * p.reg > 1.0) lr = 1.0 / p.reg;
      double z = y * w.dot(x);
      double g = Loss::dloss(z);
      w *= 1.0 - lr * p.reg;
      if (g != 0.0) w -= (lr * g * y) * x;
      if (epoch >= burn_in) {
        avg += w;
        ++avg_count;
      }
    }
  }
  if (avg_count == 0) return w;  // all epochs were burn-in: fall back to last
  avg /= static_cast<double>(avg_count);
  if (!avg.allFinite()) internal_error("dense_sgd_averaged diverged");
  return avg;
}

}  // namespace detail
}  // namespace sclom
