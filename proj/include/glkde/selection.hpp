#pragma once

#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "glkde/estimator.hpp"
#include "glkde/kernels.hpp"

namespace glkde {

//! Finite set of candidate bandwidths, sorted strictly increasing.
class BandwidthGrid {
public:
  explicit BandwidthGrid(std::vector<double> bandwidths);

  const Eigen::ArrayXd& bandwidths() const { return bandwidths_; }
  Eigen::Index size() const { return bandwidths_.size(); }
  double operator[](Eigen::Index i) const { return bandwidths_(i); }
  double h_min() const { return bandwidths_(0); }
  double h_max() const { return bandwidths_(bandwidths_.size() - 1); }

  //! E_H = min{h/h' : h, h' in H, h > h'}; +inf for a singleton grid.
  double e_h() const { return e_h_; }

  //! Index of an exact member bandwidth; throws when absent.
  Eigen::Index index_of(double h) const;

  //! {e^{-k}, 3 <= k <= 10} united with {0.002 + 0.02 k, 0 <= k <= 24}.
  static BandwidthGrid simulation_set();
  //! {e^{-k}, ceil(2 log log n) <= k <= floor(log n)}.
  static BandwidthGrid theorem_set(long n);

private:
  Eigen::ArrayXd bandwidths_;
  double e_h_ = 0.0;
};

//! Lower-triangular table of exact pairwise distances between the kernel
//! estimators of one sample over a bandwidth grid. Internally stores the
//! cross-correlation means S(g, h) = (1/n^2) sum Psi_{g,h}(X_i - X_j), so the
//! estimator norms ||f_hat_h||^2 = S(h, h) come for free.
class DistanceCache {
public:
  DistanceCache(const Sample& sample, const BandwidthGrid& grid, Kernel k,
                int threads = 1);

  //! ||f_hat_{h_i} - f_hat_{h_j}||^2, clamped into [0, inf).
  double distance_sq(Eigen::Index i, Eigen::Index j) const;
  //! ||f_hat_{h_i}||^2.
  double estimator_norm_sq(Eigen::Index i) const { return s_(i, i); }

  const BandwidthGrid& grid() const { return grid_; }
  Kernel kernel() const { return kernel_; }
  Eigen::Index sample_size() const { return n_; }

private:
  BandwidthGrid grid_;
  Kernel kernel_;
  Eigen::Index n_;
  Eigen::MatrixXd s_;
};

//! Penalty V(h) = a ||K_h||^2 / n.
double penalty(double h, double a, long n, Kernel k);

//! B(h) = max over h' <= h in the grid of [ ||f_hat_{h'} - f_hat_h||^2 - V(h') ]_+.
double compute_B(const BandwidthGrid& grid, Kernel k, long n, double a,
                 double h, const DistanceCache& distances);

struct SelectionRow {
  double h = 0.0;
  double B = 0.0;
  double V = 0.0; //!< additive penalty b ||K_h||^2 / n
  double crit = 0.0;
};

struct SelectionResult {
  double selected_h = 0.0;
  Eigen::Index argmin_index = 0;
  double a = 0.0; //!< comparison penalty parameter (inside B)
  double b = 0.0; //!< additive penalty parameter (equal to a in the
                  //!< one-parameter form)
  std::vector<SelectionRow> table;

  nlohmann::json to_json() const;
};

//! One-parameter selection: argmin over h of B(h) + a ||K_h||^2 / n.
//! Ties select the smallest h.
SelectionResult select(const Sample& sample, const BandwidthGrid& grid,
                       Kernel k, double a);
SelectionResult select(const DistanceCache& distances, double a);

//! Two-parameter form: B uses a, the additive penalty uses b.
SelectionResult select_two(const Sample& sample, const BandwidthGrid& grid,
                           Kernel k, double a, double b);
SelectionResult select_two(const DistanceCache& distances, double a, double b);

} // namespace glkde
