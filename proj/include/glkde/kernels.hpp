#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "glkde/piecewise_polynomial.hpp"

namespace glkde {

//! The four supported kernels. All are probability densities; the three
//! compact ones are supported on [-1, 1].
enum class Kernel { gaussian, rectangular, epanechnikov, biweight };

inline constexpr std::array<Kernel, 4> all_kernels = {
    Kernel::gaussian, Kernel::rectangular, Kernel::epanechnikov,
    Kernel::biweight};

std::string_view kernel_name(Kernel k);
Kernel kernel_from_name(std::string_view name);

//! Support radius: 1 for the compact kernels, +infinity for the Gaussian.
double support_radius(Kernel k);

//! K(u).
double eval(Kernel k, double u);

//! Squared L2 norm of the unscaled kernel.
double norm_sq(Kernel k);

//! <K, K(x.)> / ||K||^2 for x > 0, by closed form.
double overlap_ratio(Kernel k, double x);

//! phi(x) = ||K - K_x||^2 / ||K||^2 = 1 + 1/x - 2 <K, K(x.)> / ||K||^2.
double phi(Kernel k, double x);

//! ||K_h||^2 = ||K||^2 / h for h > 0, where K_h = K(./h)/h.
double scaled_norm_sq(Kernel k, double h);

//! Piecewise-polynomial representation of K_h (compact kernels only).
PiecewisePolynomial kernel_polynomial(Kernel k, double h);

//! Cross-correlation Psi_{g,h}(delta) = integral of K_g(u) K_h(u - delta) du.
//!
//! Precompiled per bandwidth pair: the Gaussian case is the centered normal
//! density with variance g^2 + h^2, the compact cases the exact convolution
//! of the two scaled kernel polynomials.
class CrossCorrelation {
public:
  CrossCorrelation(Kernel k, double g, double h);

  double operator()(double delta) const;

  //! |delta| >= cutoff() contributes nothing: exactly zero for compact
  //! kernels, below 2e-14 of the peak for the Gaussian (8 combined std).
  double cutoff() const { return cutoff_; }

  bool is_gaussian() const { return gaussian_; }
  //! Gaussian case: Psi(d) = amplitude * exp(exponent_scale * d^2).
  double amplitude() const { return amplitude_; }
  double exponent_scale() const { return exponent_scale_; }

private:
  bool gaussian_ = false;
  double amplitude_ = 0.0;
  double exponent_scale_ = 0.0;
  double cutoff_ = 0.0;
  PiecewisePolynomial conv_;
};

//! One-shot Psi_{g,h}(delta).
double cross_correlation(Kernel k, double g, double h, double delta);

// --- numerical verification of the kernel assumptions ---------------------

struct K2Check {
  double mu = 0.0;
  bool diverges = false;      //!< phi(x) - mu/x grows without bound as x -> 0
  double verified_x0 = 0.0;   //!< largest x0 with the map decreasing on (x_lo, x0]
  bool pass = false;
};

struct K3Check {
  double mu = 0.0;
  bool pass = false;
  double min_increment = 0.0; //!< most negative consecutive difference found
};

struct ThetaCheck {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double lhs = 0.0; //!< phi(theta2) - phi(theta1)
  double rhs = 0.0; //!< 1/theta1 - 1/theta2
  bool pass = false;
};

struct CheckOptions {
  int k0_grid = 1000;    //!< points on (0, 1] for the overlap lower bound
  int phi_grid = 2000;   //!< log-spaced points for the phi-based checks
  double tol = 1e-12;    //!< monotonicity slack
};

struct AssumptionReport {
  Kernel kernel = Kernel::gaussian;
  double e_h = 0.0;
  double x_max = 0.0;
  CheckOptions options;

  bool k0_pass = false;
  double k0_min_overlap = 0.0;
  bool k1_pass = false;
  double k1_inf_phi = 0.0;
  std::vector<K2Check> k2;
  std::vector<K3Check> k3;
  std::optional<ThetaCheck> theta;

  bool all_pass() const;
  nlohmann::json to_json() const;
};

//! Grid-based verification of (K0)-(K3) and, when theta is supplied, of the
//! condition phi(theta2) - phi(theta1) >= 1/theta1 - 1/theta2.
AssumptionReport check_assumptions(
    Kernel k, double e_h, std::span<const double> mu_grid, double x_max,
    std::optional<std::pair<double, double>> theta = std::nullopt,
    const CheckOptions& options = {});

} // namespace glkde
