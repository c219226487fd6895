#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "glkde/estimator.hpp"
#include "glkde/selection.hpp"

namespace glkde {

//! One of the six benchmark densities:
//!   1 standard Cauchy
//!   2 Uniform(0, 1)
//!   3 Exponential(1)
//!   4 normal mixture 1/2 N(0,1) + 1/2 N(3,9)
//!   5 claw: 1/2 N(0,1) + sum_{j=0..4} (1/10) N(j/2 - 1, (1/10)^2)
//!   6 equal-weight mixture of eight uniforms on [k/8, k/8 + 1/16], k = 0..7
class TestDensity {
public:
  int id() const { return id_; }
  const std::string& name() const { return name_; }

  double pdf(double x) const;
  double cdf(double x) const;

  //! n i.i.d. draws, deterministic per (id, n, seed). Densities 1-3 and 6
  //! sample by inverse CDF, the mixtures 4-5 by component then normal draw.
  Sample draw(Eigen::Index n, std::uint64_t seed) const;

  //! Quadrature domain holding all mass up to < 1e-8 (the Cauchy tails
  //! beyond |x| = 1e8 are the documented exclusion).
  double quad_lo() const { return quad_lo_; }
  double quad_hi() const { return quad_hi_; }
  //! Mass excluded by the quadrature domain (nonzero only for the Cauchy).
  double excluded_tail_mass() const { return excluded_tail_mass_; }

  //! Discontinuities of the pdf, used to seed adaptive quadrature.
  const std::vector<double>& breakpoints() const { return breakpoints_; }

  //! ||f||^2, computed once by quadrature at construction.
  double l2_norm_sq() const { return l2_norm_sq_; }

private:
  friend TestDensity make_density(int id);
  int id_ = 0;
  std::string name_;
  double quad_lo_ = 0.0, quad_hi_ = 0.0;
  double excluded_tail_mass_ = 0.0;
  std::vector<double> breakpoints_;
  double l2_norm_sq_ = 0.0;
};

TestDensity make_density(int id);

//! Free-function form of TestDensity::draw.
Sample sample(const TestDensity& density, Eigen::Index n, std::uint64_t seed);

//! Smoothed density f_h(x) = (K_h * f)(x). Closed form where available
//! (Gaussian kernel with every density but the Cauchy), adaptive quadrature
//! otherwise.
double smoothed_density(const TestDensity& density, double h, Kernel k,
                        double x);
//! Quadrature path regardless of closed forms; used as a cross-check oracle.
double smoothed_density_by_quadrature(const TestDensity& density, double h,
                                      Kernel k, double x);

//! Integrated squared loss ||f_hat_h - f||^2 of the kernel estimate built
//! from the sample: exact ||f_hat_h||^2 via cross-correlations, the cross
//! term (1/n) sum_i (K_h * f)(X_i), and the cached ||f||^2.
double true_risk(const Sample& sample, double h, Kernel k,
                 const TestDensity& density);

//! Loss for every grid bandwidth, reusing the cache's estimator norms.
Eigen::ArrayXd loss_table(const DistanceCache& distances, const Sample& sample,
                          const TestDensity& density);

//! Bias diagnostic D(h) = max(sup_{h' <= h} ||f_{h'} - f_h||, ||f - f_h||),
//! the sup over grid bandwidths, each norm by quadrature.
double bias_D(const TestDensity& density, double h, Kernel k,
              const BandwidthGrid& grid);

} // namespace glkde
