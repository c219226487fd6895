#pragma once

#include <Eigen/Dense>

#include "glkde/kernels.hpp"

namespace glkde {

//! Immutable sample of observations; keeps a sorted copy for windowed
//! pairwise sums.
class Sample {
public:
  explicit Sample(Eigen::ArrayXd observations);
  explicit Sample(const std::vector<double>& observations);

  const Eigen::ArrayXd& observations() const { return observations_; }
  const Eigen::ArrayXd& sorted() const { return sorted_; }
  Eigen::Index size() const { return observations_.size(); }

private:
  Eigen::ArrayXd observations_;
  Eigen::ArrayXd sorted_;
};

//! Uniformly spaced evaluation grid, used by the quadrature-based
//! diagnostics (never by the selection pipeline).
struct EvaluationGrid {
  Eigen::ArrayXd points;
  double spacing = 0.0;
};

//! Grid with n points spanning [lo, hi]; validates uniform spacing.
EvaluationGrid make_uniform_grid(double lo, double hi, Eigen::Index n);

//! Grid covering the sample range plus a margin of 4 support radii
//! (8 standard deviations for the Gaussian) at the largest bandwidth.
EvaluationGrid default_grid(const Sample& sample, double h_max, Kernel k,
                            Eigen::Index n = 4096);

//! Kernel density estimate at each grid point.
Eigen::ArrayXd kde_on_grid(const Sample& sample, double h, Kernel k,
                           const EvaluationGrid& grid);

//! (1/n^2) sum over all (i, j) of psi(X_i - X_j), pruned beyond psi.cutoff().
double mean_pair_sum(const Sample& sample, const CrossCorrelation& psi);

//! Exact ||f_hat_{h1} - f_hat_{h2}||^2 via cross-correlations:
//! (1/n^2) sum_{i,j} [Psi_{h1,h1} - 2 Psi_{h1,h2} + Psi_{h2,h2}](X_i - X_j).
//! Symmetric in (h1, h2) by construction; roundoff in [-1e-12, 0) clamps to 0.
double pairwise_l2_sq(const Sample& sample, double h1, double h2, Kernel k);

//! Trapezoidal approximation of the integral of (v1 - v2)^2 over the grid.
double grid_l2_sq(const Eigen::ArrayXd& values1, const Eigen::ArrayXd& values2,
                  const EvaluationGrid& grid);

} // namespace glkde
