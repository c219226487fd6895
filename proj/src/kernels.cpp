#include "glkde/kernels.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace glkde {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

double require_positive(double x, const char* what) {
  if (!(x > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
  return x;
}

} // namespace

std::string_view kernel_name(Kernel k) {
  switch (k) {
    case Kernel::gaussian: return "gaussian";
    case Kernel::rectangular: return "rectangular";
    case Kernel::epanechnikov: return "epanechnikov";
    case Kernel::biweight: return "biweight";
  }
  throw std::invalid_argument("unknown kernel");
}

Kernel kernel_from_name(std::string_view name) {
  for (Kernel k : all_kernels)
    if (kernel_name(k) == name) return k;
  throw std::invalid_argument("unknown kernel name: " + std::string(name));
}

double support_radius(Kernel k) {
  return k == Kernel::gaussian ? std::numeric_limits<double>::infinity() : 1.0;
}

double eval(Kernel k, double u) {
  switch (k) {
    case Kernel::gaussian:
      return kInvSqrt2Pi * std::exp(-0.5 * u * u);
    case Kernel::rectangular:
      return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    case Kernel::epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case Kernel::biweight: {
      if (std::abs(u) > 1.0) return 0.0;
      const double t = 1.0 - u * u;
      return 0.9375 * t * t;
    }
  }
  throw std::invalid_argument("unknown kernel");
}

double norm_sq(Kernel k) {
  switch (k) {
    case Kernel::gaussian: return 0.5 / std::sqrt(kPi);
    case Kernel::rectangular: return 0.5;
    case Kernel::epanechnikov: return 0.6;
    case Kernel::biweight: return 5.0 / 7.0;
  }
  throw std::invalid_argument("unknown kernel");
}

double overlap_ratio(Kernel k, double x) {
  require_positive(x, "overlap_ratio: x");
  const double m = std::min(1.0 / x, 1.0);
  switch (k) {
    case Kernel::gaussian:
      return std::sqrt(2.0 / (1.0 + x * x));
    case Kernel::rectangular:
      return m;
    case Kernel::epanechnikov: {
      const double m2 = m * m;
      return 1.25 * (m - x * x / 5.0 * m2 * m2 * m);
    }
    case Kernel::biweight: {
      const double m2 = m * m;
      const double m4 = m2 * m2;
      const double m5 = m4 * m;
      return (21.0 * m - 6.0 * x * x * m5 + x * x * x * x * m5 * m4) / 16.0;
    }
  }
  throw std::invalid_argument("unknown kernel");
}

double phi(Kernel k, double x) {
  require_positive(x, "phi: x");
  return 1.0 + 1.0 / x - 2.0 * overlap_ratio(k, x);
}

double scaled_norm_sq(Kernel k, double h) {
  require_positive(h, "scaled_norm_sq: h");
  return norm_sq(k) / h;
}

PiecewisePolynomial kernel_polynomial(Kernel k, double h) {
  require_positive(h, "kernel_polynomial: h");
  Eigen::ArrayXd bp(2);
  bp << -h, h;
  switch (k) {
    case Kernel::rectangular: {
      Eigen::MatrixXd c(1, 1);
      c << 0.5 / h;
      return PiecewisePolynomial(bp, c);
    }
    case Kernel::epanechnikov: {
      Eigen::MatrixXd c(1, 3);
      const double a = 0.75 / h;
      c << a, 0.0, -a / (h * h);
      return PiecewisePolynomial(bp, c);
    }
    case Kernel::biweight: {
      Eigen::MatrixXd c(1, 5);
      const double a = 0.9375 / h;
      const double h2 = h * h;
      c << a, 0.0, -2.0 * a / h2, 0.0, a / (h2 * h2);
      return PiecewisePolynomial(bp, c);
    }
    case Kernel::gaussian:
      throw std::invalid_argument(
          "kernel_polynomial: the Gaussian kernel has no polynomial form");
  }
  throw std::invalid_argument("unknown kernel");
}

CrossCorrelation::CrossCorrelation(Kernel k, double g, double h) {
  require_positive(g, "CrossCorrelation: g");
  require_positive(h, "CrossCorrelation: h");
  if (k == Kernel::gaussian) {
    gaussian_ = true;
    const double var = g * g + h * h;
    amplitude_ = kInvSqrt2Pi / std::sqrt(var);
    exponent_scale_ = -0.5 / var;
    cutoff_ = 8.0 * std::sqrt(var);
  } else {
    // all four kernels are even, so Psi is even and depends only on the
    // unordered bandwidth pair; canonicalizing makes the symmetries
    // Psi_{g,h}(d) = Psi_{h,g}(-d) = Psi_{g,h}(-d) hold bitwise
    conv_ = convolve(kernel_polynomial(k, std::min(g, h)),
                     kernel_polynomial(k, std::max(g, h)));
    cutoff_ = g + h;
  }
}

double CrossCorrelation::operator()(double delta) const {
  if (gaussian_) return amplitude_ * std::exp(exponent_scale_ * delta * delta);
  if (std::abs(delta) >= cutoff_) return 0.0;
  return conv_(std::abs(delta));
}

double cross_correlation(Kernel k, double g, double h, double delta) {
  return CrossCorrelation(k, g, h)(delta);
}

// --- assumption checks -----------------------------------------------------

namespace {

Eigen::ArrayXd log_spaced(double lo, double hi, int n) {
  Eigen::ArrayXd g(n);
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < n; ++i)
    g(i) = std::exp(llo + (lhi - llo) * i / (n - 1));
  g(0) = lo;
  g(n - 1) = hi;
  return g;
}

} // namespace

bool AssumptionReport::all_pass() const {
  if (!k0_pass || !k1_pass) return false;
  for (const auto& c : k2)
    if (!c.pass) return false;
  for (const auto& c : k3)
    if (!c.pass) return false;
  if (theta && !theta->pass) return false;
  return true;
}

nlohmann::json AssumptionReport::to_json() const {
  nlohmann::json j;
  j["kernel"] = kernel_name(kernel);
  j["e_h"] = e_h;
  j["x_max"] = x_max;
  j["options"] = {{"k0_grid", options.k0_grid},
                  {"phi_grid", options.phi_grid},
                  {"tol", options.tol}};
  j["k0"] = {{"pass", k0_pass}, {"min_overlap", k0_min_overlap}};
  j["k1"] = {{"pass", k1_pass}, {"inf_phi", k1_inf_phi}};
  j["k2"] = nlohmann::json::array();
  for (const auto& c : k2)
    j["k2"].push_back({{"mu", c.mu},
                       {"diverges", c.diverges},
                       {"verified_x0", c.verified_x0},
                       {"pass", c.pass}});
  j["k3"] = nlohmann::json::array();
  for (const auto& c : k3)
    j["k3"].push_back(
        {{"mu", c.mu}, {"min_increment", c.min_increment}, {"pass", c.pass}});
  if (theta)
    j["theta"] = {{"theta1", theta->theta1},
                  {"theta2", theta->theta2},
                  {"lhs", theta->lhs},
                  {"rhs", theta->rhs},
                  {"pass", theta->pass}};
  j["all_pass"] = all_pass();
  return j;
}

AssumptionReport check_assumptions(
    Kernel k, double e_h, std::span<const double> mu_grid, double x_max,
    std::optional<std::pair<double, double>> theta,
    const CheckOptions& options) {
  if (!(e_h > 1.0)) throw std::invalid_argument("check_assumptions: e_h must exceed 1");
  if (!(x_max > e_h)) throw std::invalid_argument("check_assumptions: x_max must exceed e_h");
  for (double mu : mu_grid)
    if (!(mu > 0.0 && mu < 1.0))
      throw std::invalid_argument("check_assumptions: each mu must lie in (0, 1)");
  if (options.k0_grid < 2 || options.phi_grid < 2)
    throw std::invalid_argument("check_assumptions: grids need at least 2 points");

  AssumptionReport rep;
  rep.kernel = k;
  rep.e_h = e_h;
  rep.x_max = x_max;
  rep.options = options;

  // (K0): overlap ratio >= 1 on (0, 1]
  rep.k0_min_overlap = std::numeric_limits<double>::infinity();
  for (int i = 1; i <= options.k0_grid; ++i) {
    const double x = static_cast<double>(i) / options.k0_grid;
    rep.k0_min_overlap = std::min(rep.k0_min_overlap, overlap_ratio(k, x));
  }
  rep.k0_pass = rep.k0_min_overlap >= 1.0 - options.tol;

  // (K1): inf of phi on [e_h, x_max] strictly positive
  {
    const Eigen::ArrayXd xs = log_spaced(e_h, x_max, options.phi_grid);
    rep.k1_inf_phi = std::numeric_limits<double>::infinity();
    for (double x : xs) rep.k1_inf_phi = std::min(rep.k1_inf_phi, phi(k, x));
    rep.k1_pass = rep.k1_inf_phi > 1e-9;
  }

  // (K2): phi(x) - mu/x diverges as x -> 0 and decreases near 0; the report
  // carries the largest neighborhood (x_lo, x0] verified on the grid.
  for (double mu : mu_grid) {
    K2Check c;
    c.mu = mu;
    const double x_lo = std::min(1e-5, 1e-4 * (1.0 - mu));
    const Eigen::ArrayXd xs = log_spaced(x_lo, 1.0, options.phi_grid);
    const auto g = [&](double x) { return phi(k, x) - mu / x; };
    double prev = g(xs(0));
    c.diverges = prev > 100.0;
    c.verified_x0 = xs(0);
    for (int i = 1; i < xs.size(); ++i) {
      const double cur = g(xs(i));
      const double slack = options.tol * std::max(1.0, std::abs(prev));
      if (cur <= prev + slack) {
        c.verified_x0 = xs(i);
        prev = cur;
      } else {
        break;
      }
    }
    c.pass = c.diverges && c.verified_x0 > x_lo;
    rep.k2.push_back(c);
  }

  // (K3): phi(x) + mu/x nondecreasing on [2, x_max]
  for (double mu : mu_grid) {
    K3Check c;
    c.mu = mu;
    const Eigen::ArrayXd xs = log_spaced(2.0, x_max, options.phi_grid);
    const auto g = [&](double x) { return phi(k, x) + mu / x; };
    c.min_increment = std::numeric_limits<double>::infinity();
    double prev = g(xs(0));
    for (int i = 1; i < xs.size(); ++i) {
      const double cur = g(xs(i));
      c.min_increment = std::min(c.min_increment, cur - prev);
      prev = cur;
    }
    c.pass = c.min_increment >= -options.tol;
    rep.k3.push_back(c);
  }

  if (theta) {
    ThetaCheck t;
    t.theta1 = theta->first;
    t.theta2 = theta->second;
    t.lhs = phi(k, t.theta2) - phi(k, t.theta1);
    t.rhs = 1.0 / t.theta1 - 1.0 / t.theta2;
    t.pass = t.lhs >= t.rhs - options.tol;
    rep.theta = t;
  }

  return rep;
}

} // namespace glkde
