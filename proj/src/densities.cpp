#include "glkde/densities.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "glkde/quadrature.hpp"
#include "glkde/random.hpp"

namespace glkde {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;

double norm_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return kInvSqrt2Pi / sd * std::exp(-0.5 * z * z);
}

double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

// claw spike means j/2 - 1 for j = 0..4
constexpr std::array<double, 5> kClawMeans = {-1.0, -0.5, 0.0, 0.5, 1.0};
constexpr double kClawSd = 0.1;

// comb of eight uniform spikes of width 1/16 starting at k/8
constexpr double kCombWidth = 1.0 / 16.0;
double comb_start(int k) { return k / 8.0; }

// (K_h * Exp(1))(x) for the Gaussian kernel, safe against overflow for
// x far below the support
double exp_gauss_convolution(double x, double h) {
  const double t = x / h - h;
  const double expo = 0.5 * h * h - x;
  if (t > -8.0) return std::exp(expo) * norm_cdf(t);
  const double t2 = t * t;
  return std::exp(expo - 0.5 * t2) / (-t) * kInvSqrt2Pi *
         (1.0 - 1.0 / t2 + 3.0 / (t2 * t2));
}

} // namespace

TestDensity make_density(int id) {
  TestDensity d;
  d.id_ = id;
  switch (id) {
    case 1:
      d.name_ = "cauchy";
      d.quad_lo_ = -1e8;
      d.quad_hi_ = 1e8;
      d.breakpoints_ = {-1e6, -1e4, -100.0, -10.0, -3.0, -1.0, 0.0,
                        1.0,  3.0,  10.0,   100.0, 1e4,  1e6};
      break;
    case 2:
      d.name_ = "uniform";
      d.quad_lo_ = 0.0;
      d.quad_hi_ = 1.0;
      d.breakpoints_ = {0.0, 1.0};
      break;
    case 3:
      d.name_ = "exponential";
      d.quad_lo_ = 0.0;
      d.quad_hi_ = 30.0;
      d.breakpoints_ = {0.0};
      break;
    case 4:
      d.name_ = "normal_mixture";
      d.quad_lo_ = -15.0;
      d.quad_hi_ = 21.0;
      break;
    case 5:
      d.name_ = "claw";
      d.quad_lo_ = -9.0;
      d.quad_hi_ = 9.0;
      break;
    case 6: {
      d.name_ = "uniform_comb";
      d.quad_lo_ = 0.0;
      d.quad_hi_ = 1.0;
      for (int k = 0; k < 8; ++k) {
        d.breakpoints_.push_back(comb_start(k));
        d.breakpoints_.push_back(comb_start(k) + kCombWidth);
      }
      break;
    }
    default:
      throw std::invalid_argument("make_density: id must be in 1..6");
  }
  d.excluded_tail_mass_ = 1.0 - (d.cdf(d.quad_hi_) - d.cdf(d.quad_lo_));

  QuadratureOptions opts;
  opts.abs_tol = 1e-11;
  opts.rel_tol = 1e-10;
  opts.breakpoints = d.breakpoints_;
  d.l2_norm_sq_ = integrate_or_throw(
      [&d](double x) { const double p = d.pdf(x); return p * p; }, d.quad_lo_,
      d.quad_hi_, opts);
  return d;
}

double TestDensity::pdf(double x) const {
  switch (id_) {
    case 1:
      return 1.0 / (kPi * (1.0 + x * x));
    case 2:
      return (x >= 0.0 && x <= 1.0) ? 1.0 : 0.0;
    case 3:
      return x >= 0.0 ? std::exp(-x) : 0.0;
    case 4:
      return 0.5 * norm_pdf(x, 0.0, 1.0) + 0.5 * norm_pdf(x, 3.0, 3.0);
    case 5: {
      double p = 0.5 * norm_pdf(x, 0.0, 1.0);
      for (double m : kClawMeans) p += 0.1 * norm_pdf(x, m, kClawSd);
      return p;
    }
    case 6:
      for (int k = 0; k < 8; ++k) {
        const double a = comb_start(k);
        if (x >= a && x <= a + kCombWidth) return 2.0;
      }
      return 0.0;
  }
  throw std::logic_error("TestDensity: bad id");
}

double TestDensity::cdf(double x) const {
  switch (id_) {
    case 1:
      return 0.5 + std::atan(x) / kPi;
    case 2:
      return std::clamp(x, 0.0, 1.0);
    case 3:
      return x >= 0.0 ? -std::expm1(-x) : 0.0;
    case 4:
      return 0.5 * norm_cdf(x) + 0.5 * norm_cdf((x - 3.0) / 3.0);
    case 5: {
      double c = 0.5 * norm_cdf(x);
      for (double m : kClawMeans) c += 0.1 * norm_cdf((x - m) / kClawSd);
      return c;
    }
    case 6: {
      double c = 0.0;
      for (int k = 0; k < 8; ++k)
        c += 0.125 * std::clamp((x - comb_start(k)) / kCombWidth, 0.0, 1.0);
      return c;
    }
  }
  throw std::logic_error("TestDensity: bad id");
}

Sample TestDensity::draw(Eigen::Index n, std::uint64_t seed) const {
  if (n < 1) throw std::invalid_argument("draw: n must be at least 1");
  Rng rng(seed);
  Eigen::ArrayXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    switch (id_) {
      case 1:
        x(i) = std::tan(kPi * (rng.uniform01() - 0.5));
        break;
      case 2:
        x(i) = rng.uniform01();
        break;
      case 3:
        x(i) = -std::log1p(-rng.uniform01());
        break;
      case 4: {
        const double u = rng.uniform01();
        x(i) = u < 0.5 ? rng.normal() : 3.0 + 3.0 * rng.normal();
        break;
      }
      case 5: {
        const double u = rng.uniform01();
        if (u < 0.5) {
          x(i) = rng.normal();
        } else {
          const int j = std::min(4, static_cast<int>((u - 0.5) * 10.0));
          x(i) = kClawMeans[static_cast<std::size_t>(j)] + kClawSd * rng.normal();
        }
        break;
      }
      case 6: {
        const double u = rng.uniform01();
        const int k = std::min(7, static_cast<int>(u * 8.0));
        x(i) = comb_start(k) + 0.5 * (u - comb_start(k));
        break;
      }
      default:
        throw std::logic_error("TestDensity: bad id");
    }
  }
  return Sample(std::move(x));
}

Sample sample(const TestDensity& density, Eigen::Index n, std::uint64_t seed) {
  return density.draw(n, seed);
}

double smoothed_density_by_quadrature(const TestDensity& density, double h,
                                      Kernel k, double x) {
  if (!(h > 0.0))
    throw std::invalid_argument("smoothed_density: h must be positive");
  const double cut = k == Kernel::gaussian ? 8.0 * h : support_radius(k) * h;
  QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-9;
  opts.breakpoints = density.breakpoints();
  const double inv_h = 1.0 / h;
  return integrate_or_throw(
      [&](double y) { return eval(k, (x - y) * inv_h) * inv_h * density.pdf(y); },
      x - cut, x + cut, opts);
}

double smoothed_density(const TestDensity& density, double h, Kernel k,
                        double x) {
  if (!(h > 0.0))
    throw std::invalid_argument("smoothed_density: h must be positive");
  if (k == Kernel::gaussian) {
    switch (density.id()) {
      case 2:
        return norm_cdf(x / h) - norm_cdf((x - 1.0) / h);
      case 3:
        return exp_gauss_convolution(x, h);
      case 4: {
        // Gaussian convolution of a normal mixture: variances add
        return 0.5 * norm_pdf(x, 0.0, std::sqrt(1.0 + h * h)) +
               0.5 * norm_pdf(x, 3.0, std::sqrt(9.0 + h * h));
      }
      case 5: {
        double p = 0.5 * norm_pdf(x, 0.0, std::sqrt(1.0 + h * h));
        const double sd = std::sqrt(kClawSd * kClawSd + h * h);
        for (double m : kClawMeans) p += 0.1 * norm_pdf(x, m, sd);
        return p;
      }
      case 6: {
        double p = 0.0;
        for (int k8 = 0; k8 < 8; ++k8) {
          const double a = comb_start(k8);
          p += 2.0 * (norm_cdf((x - a) / h) - norm_cdf((x - a - kCombWidth) / h));
        }
        return p;
      }
      default:
        break;
    }
  }
  return smoothed_density_by_quadrature(density, h, k, x);
}

double true_risk(const Sample& sample, double h, Kernel k,
                 const TestDensity& density) {
  if (!(h > 0.0)) throw std::invalid_argument("true_risk: h must be positive");
  const double norm_fhat_sq = mean_pair_sum(sample, CrossCorrelation(k, h, h));
  double cross = 0.0;
  for (double xi : sample.sorted()) cross += smoothed_density(density, h, k, xi);
  cross /= static_cast<double>(sample.size());
  double risk = norm_fhat_sq - 2.0 * cross + density.l2_norm_sq();
  if (risk < 0.0 && risk >= -1e-10) risk = 0.0;
  return risk;
}

Eigen::ArrayXd loss_table(const DistanceCache& distances, const Sample& sample,
                          const TestDensity& density) {
  const BandwidthGrid& grid = distances.grid();
  const Kernel k = distances.kernel();
  Eigen::ArrayXd losses(grid.size());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double h = grid[i];
    double cross = 0.0;
    for (double xi : sample.sorted())
      cross += smoothed_density(density, h, k, xi);
    cross /= static_cast<double>(sample.size());
    double risk =
        distances.estimator_norm_sq(i) - 2.0 * cross + density.l2_norm_sq();
    if (risk < 0.0 && risk >= -1e-10) risk = 0.0;
    losses(i) = risk;
  }
  return losses;
}

double bias_D(const TestDensity& density, double h, Kernel k,
              const BandwidthGrid& grid) {
  const Eigen::Index idx = grid.index_of(h);
  const double cut = k == Kernel::gaussian ? 8.0 * h : support_radius(k) * h;
  const double lo = density.quad_lo() - cut;
  const double hi = density.quad_hi() + cut;
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-7;
  opts.breakpoints = density.breakpoints();

  const auto smoothed_h = [&](double x) { return smoothed_density(density, h, k, x); };

  double sup_sq = 0.0;
  for (Eigen::Index j = 0; j < idx; ++j) {
    const double hj = grid[j];
    const double v = integrate_or_throw(
        [&](double x) {
          const double dlt = smoothed_density(density, hj, k, x) - smoothed_h(x);
          return dlt * dlt;
        },
        lo, hi, opts);
    sup_sq = std::max(sup_sq, v);
  }
  const double bias_sq = integrate_or_throw(
      [&](double x) {
        const double dlt = density.pdf(x) - smoothed_h(x);
        return dlt * dlt;
      },
      lo, hi, opts);
  return std::sqrt(std::max(sup_sq, bias_sq));
}

} // namespace glkde
