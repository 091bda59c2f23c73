// Truncated SVD via seeded randomized subspace iteration. The building
// blocks (modified Gram-Schmidt orthonormalization and a one-sided Jacobi
// SVD for the small projected matrix) are implemented here directly; Eigen
// supplies storage and matrix products only. Tests check the results
// against a dense SVD computed by an unrelated algorithm.
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sclom/common.hpp"

namespace sclom {

struct SvdResult {
  Eigen::MatrixXd u;       // n x k, orthonormal columns
  Eigen::VectorXd sigma;   // k, non-increasing
  Eigen::MatrixXd v;       // m x k, orthonormal columns
  int power_iters = 0;     // iterations the subspace loop actually ran
};

namespace detail {

// Orthonormalizes the columns of y in place (modified Gram-Schmidt, two
// passes). Columns that collapse numerically are replaced with seeded
// random directions and re-orthogonalized.
inline void orthonormalize(Eigen::MatrixXd& y, Rng& rng) {
  const Eigen::Index n = y.rows(), s = y.cols();
  for (Eigen::Index j = 0; j < s; ++j) {
    for (int attempt = 0; attempt < 4; ++attempt) {
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < j; ++i)
          y.col(j).noalias() -= (y.col(i).dot(y.col(j))) * y.col(i);
      double norm = y.col(j).norm();
      if (norm > 1e-12) {
        y.col(j) /= norm;
        break;
      }
      for (Eigen::Index r = 0; r < n; ++r) y(r, j) = rng.normal();
    }
  }
}

// One-sided Jacobi SVD of a dense matrix with rows >= cols. Rotates column
// pairs until all are mutually orthogonal, then reads off U, sigma, V.
inline SvdResult jacobi_svd_tall(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows(), m = a.cols();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(m, m);
  const int max_sweeps = 60;
  const double tol = 1e-30;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < m; ++i) {
      for (Eigen::Index j = i + 1; j < m; ++j) {
        double alpha = a.col(i).squaredNorm();
        double beta = a.col(j).squaredNorm();
        double gamma = a.col(i).dot(a.col(j));
        if (gamma * gamma <= tol * alpha * beta) continue;
        if (std::abs(gamma) < 1e-300) continue;
        rotated = true;
        double zeta = (beta - alpha) / (2.0 * gamma);
        double t = (zeta >= 0 ? 1.0 : -1.0) /
                   (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        double c = 1.0 / std::sqrt(1.0 + t * t);
        double s = c * t;
        for (Eigen::Index r = 0; r < n; ++r) {
          double ai = a(r, i), aj = a(r, j);
          a(r, i) = c * ai - s * aj;
          a(r, j) = s * ai + c * aj;
        }
        for (Eigen::Index r = 0; r < m; ++r) {
          double vi = v(r, i), vj = v(r, j);
          v(r, i) = c * vi - s * vj;
          v(r, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }
  // singular values = column norms; order descending
  std::vector<Eigen::Index> order(m);
  std::vector<double> norms(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    order[j] = j;
    norms[j] = a.col(j).norm();
  }
  std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return norms[x] > norms[y];
  });
  SvdResult r;
  r.u.resize(n, m);
  r.sigma.resize(m);
  r.v.resize(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    Eigen::Index src = order[j];
    r.sigma[j] = norms[src];
    r.v.col(j) = v.col(src);
    if (norms[src] > 1e-300)
      r.u.col(j) = a.col(src) / norms[src];
    else
      r.u.col(j).setZero();
  }
  return r;
}

// SVD of a small dense matrix of any shape.
inline SvdResult jacobi_svd(const Eigen::MatrixXd& a) {
  if (a.rows() >= a.cols()) return jacobi_svd_tall(a);
  SvdResult t = jacobi_svd_tall(a.transpose());
  SvdResult r;
  r.u = std::move(t.v);
  r.v = std::move(t.u);
  r.sigma = std::move(t.sigma);
  return r;
}

// Fixes the SVD sign ambiguity: in each column of U the entry of largest
// magnitude (first on ties) is made non-negative; V follows.
inline void canonicalize_signs(Eigen::MatrixXd& u, Eigen::MatrixXd& v) {
  for (Eigen::Index j = 0; j < u.cols(); ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < u.rows(); ++i) {
      double mag = std::abs(u(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (u(arg, j) < 0.0) {
      u.col(j) = -u.col(j);
      if (j < v.cols()) v.col(j) = -v.col(j);
    }
  }
}

// Distance between the column spaces of two orthonormal n x k blocks: sin
// of the largest principal angle, computed from the complement residual
// (I - a a^T) b. The residual form avoids the sqrt(eps) floor that the
// overlap-cosine form hits when the spaces nearly coincide.
inline double subspace_distance(const Eigen::MatrixXd& a,
                                const Eigen::MatrixXd& b) {
  Eigen::MatrixXd r = b - a * (a.transpose() * b);
  SvdResult s = jacobi_svd(r);
  return std::clamp(s.sigma[0], 0.0, 1.0);
}

template <class Matrix>
SvdResult randomized_svd_impl(const Matrix& w, int k, std::uint64_t seed,
                              int min_power_iters, int oversample,
                              int max_power_iters, double tol) {
  const Eigen::Index n = w.rows(), m = w.cols();
  if (k < 1 || k > std::min(n, m))
    config_error("truncated_svd: k=" + std::to_string(k) +
                 " outside [1, min(" + std::to_string(n) + ", " +
                 std::to_string(m) + ")]");
  const Eigen::Index s =
      std::min<Eigen::Index>(m, std::max<Eigen::Index>(k + oversample, k));

  Rng rng(seed);
  Eigen::MatrixXd omega(m, s);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < s; ++j) omega(i, j) = rng.normal();

  Eigen::MatrixXd y = w * omega;  // n x s
  orthonormalize(y, rng);

  Eigen::MatrixXd top_prev;  // previous top-k left basis, for convergence
  int iters = 0;
  // With a spectral gap at k the successive-subspace distance shrinks by
  // (sigma_{k+1}/sigma_k)^2 <= 0.83 per iteration until it crosses `tol`.
  // Without a gap the top-k subspace rotates forever inside the degenerate
  // directions and the distance plateaus; three consecutive checks that fail
  // to beat the best distance by 10% detect that plateau and stop the loop,
  // since extra iterations cannot improve an ill-defined subspace.
  double best_dist = std::numeric_limits<double>::infinity();
  int stalled = 0;
  for (; iters < max_power_iters; ++iters) {
    Eigen::MatrixXd z = w.transpose() * y;  // m x s
    orthonormalize(z, rng);
    y.noalias() = w * z;
    orthonormalize(y, rng);

    if (iters + 1 < min_power_iters) continue;
    Eigen::MatrixXd b = y.transpose() * w;  // s x m
    SvdResult small = jacobi_svd(b);
    Eigen::MatrixXd top = y * small.u.leftCols(k);
    if (top_prev.size() != 0) {
      const double dist = subspace_distance(top_prev, top);
      if (dist <= tol) {
        ++iters;
        break;
      }
      if (dist <= 0.9 * best_dist) {
        stalled = 0;
      } else if (++stalled >= 3) {
        ++iters;
        break;
      }
      best_dist = std::min(best_dist, dist);
    }
    top_prev = std::move(top);
  }

  Eigen::MatrixXd b = y.transpose() * w;  // s x m
  SvdResult small = jacobi_svd(b);
  SvdResult out;
  out.u.noalias() = y * small.u.leftCols(k);
  out.sigma = small.sigma.head(k);
  out.v = small.v.leftCols(k);
  out.power_iters = iters;
  canonicalize_signs(out.u, out.v);
  return out;
}

}  // namespace detail

// Rank-k factorization w ~= U diag(sigma) V^T. Runs at least
// `min_power_iters` power iterations and keeps iterating until the top-k
// left subspace stops moving (successive distance <= tol) or the iteration
// cap is hit. Deterministic for a fixed seed.
inline SvdResult truncated_svd(const Eigen::SparseMatrix<double>& w, int k,
                               std::uint64_t seed, int min_power_iters = 4,
                               int oversample = 8, int max_power_iters = 150,
                               double tol = 1e-10) {
  return detail::randomized_svd_impl(w, k, seed, min_power_iters, oversample,
                                     max_power_iters, tol);
}

inline SvdResult truncated_svd(const Eigen::MatrixXd& w, int k,
                               std::uint64_t seed, int min_power_iters = 4,
                               int oversample = 8, int max_power_iters = 150,
                               double tol = 1e-10) {
  return detail::randomized_svd_impl(w, k, seed, min_power_iters, oversample,
                                     max_power_iters, tol);
}

}  // namespace sclom
