#include <doctest.h>

#include <cmath>
#include <random>

#include "glkde/kernels.hpp"
#include "glkde/piecewise_polynomial.hpp"
#include "glkde/quadrature.hpp"

using namespace glkde;

namespace {

// quadrature oracle for (p * q)(t), independent of the analytic engine
double convolution_by_quadrature(const PiecewisePolynomial& p,
                                 const PiecewisePolynomial& q, double t) {
  const double lo = std::max(p.lo(), t - q.hi());
  const double hi = std::min(p.hi(), t - q.lo());
  if (!(hi > lo)) return 0.0;
  QuadratureOptions opts;
  opts.abs_tol = 1e-13;
  opts.rel_tol = 1e-11;
  for (double b : p.breakpoints()) opts.breakpoints.push_back(b);
  for (double b : q.breakpoints()) opts.breakpoints.push_back(t - b);
  return integrate_or_throw([&](double u) { return p(u) * q(t - u); }, lo, hi,
                            opts);
}

} // namespace

TEST_CASE("construction validates shape and ordering") {
  Eigen::ArrayXd bp(3);
  bp << 0.0, 1.0, 2.0;
  CHECK_THROWS_AS(PiecewisePolynomial(bp, Eigen::MatrixXd::Zero(3, 2)),
                  std::invalid_argument);
  Eigen::ArrayXd bad(3);
  bad << 0.0, 0.0, 2.0;
  CHECK_THROWS_AS(PiecewisePolynomial(bad, Eigen::MatrixXd::Zero(2, 2)),
                  std::invalid_argument);
}

TEST_CASE("evaluation is zero outside the support") {
  const auto p = kernel_polynomial(Kernel::epanechnikov, 2.0);
  CHECK(p(-2.5) == 0.0);
  CHECK(p(2.5) == 0.0);
  CHECK(p(0.0) == doctest::Approx(0.75 / 2.0).epsilon(1e-14));
}

TEST_CASE("scaled kernel polynomials match eval()") {
  for (Kernel k :
       {Kernel::rectangular, Kernel::epanechnikov, Kernel::biweight}) {
    for (double h : {1.0, 0.25, 4.53999297624848515e-5 /* e^-10 */}) {
      const auto p = kernel_polynomial(k, h);
      for (double frac : {-0.99, -0.5, 0.0, 0.3, 0.77, 1.0}) {
        const double u = frac * h;
        CHECK(std::abs(p(u) - eval(k, u / h) / h) <= 1e-11 / h);
      }
    }
  }
}

TEST_CASE("rectangular convolution is the exact triangle") {
  const auto tri = convolve(kernel_polynomial(Kernel::rectangular, 1.0),
                            kernel_polynomial(Kernel::rectangular, 1.0));
  CHECK(tri.lo() == doctest::Approx(-2.0));
  CHECK(tri.hi() == doctest::Approx(2.0));
  for (double t : {-1.5, -0.25, 0.0, 0.5, 1.0, 1.999}) {
    CHECK(tri(t) == doctest::Approx((2.0 - std::abs(t)) / 4.0).epsilon(1e-14));
  }
}

TEST_CASE("convolution matches the quadrature oracle, mixed scales") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (Kernel k :
       {Kernel::rectangular, Kernel::epanechnikov, Kernel::biweight}) {
    for (auto [g, h] : {std::pair{1.0, 1.0}, {0.3, 1.7}, {0.05, 0.9}}) {
      const auto pg = kernel_polynomial(k, g);
      const auto ph = kernel_polynomial(k, h);
      const auto conv = convolve(pg, ph);
      for (int i = 0; i < 12; ++i) {
        const double t = (2.0 * unif(rng) - 1.0) * (g + h) * 1.05;
        const double oracle = convolution_by_quadrature(pg, ph, t);
        CHECK(std::abs(conv(t) - oracle) < 1e-10 * std::max(1.0, std::abs(oracle)));
      }
    }
  }
}

namespace {

// evaluate piece i of p at point u from its own coefficient row, even when
// u is an endpoint shared with a neighboring piece
double eval_piece(const PiecewisePolynomial& p, Eigen::Index i, double u) {
  const double w = u - p.center(i);
  double acc = 0.0;
  for (Eigen::Index c = p.coeffs().cols() - 1; c >= 0; --c)
    acc = acc * w + p.coeffs()(i, c);
  return acc;
}

} // namespace

TEST_CASE("convolution stays accurate at extreme bandwidth ratios") {
  // g near e^-10 against an ordinary h: values must match the closed-form
  // identity at 0, match quadrature near the breakpoints, and adjacent
  // cell polynomials must agree at their shared endpoints
  const double g = std::exp(-10.0);
  const double h = 0.482;
  for (Kernel k :
       {Kernel::rectangular, Kernel::epanechnikov, Kernel::biweight}) {
    const auto pg = kernel_polynomial(k, g);
    const auto ph = kernel_polynomial(k, h);
    const auto conv = convolve(pg, ph);
    // integral of K_g is 1, so (K_g * K_h)(0) ~ K_h(0) up to O((g/h)^2)
    CHECK(conv(0.0) == doctest::Approx(eval(k, 0.0) / h).epsilon(1e-4));
    for (Eigen::Index i = 1; i + 1 < conv.breakpoints().size(); ++i) {
      const double b = conv.breakpoints()(i);
      const double mismatch = std::abs(eval_piece(conv, i - 1, b) - eval_piece(conv, i, b));
      CHECK(mismatch < 1e-10 / h);
      // straddle the breakpoint and compare against the quadrature oracle
      for (double x : {b - 0.25 * g, b + 0.25 * g}) {
        CHECK(std::abs(conv(x) - convolution_by_quadrature(pg, ph, x)) < 1e-9 / h);
      }
    }
  }
}

TEST_CASE("convolution of a kernel with itself integrates to one") {
  // mass is preserved: integral of (K_g * K_h) = 1 * 1
  // mixed kernels are fine for the engine even though the library never
  // pairs different kernels
  const auto conv = convolve(kernel_polynomial(Kernel::biweight, 0.4),
                             kernel_polynomial(Kernel::epanechnikov, 0.4));
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  for (double b : conv.breakpoints()) opts.breakpoints.push_back(b);
  const double mass =
      integrate_or_throw([&](double t) { return conv(t); }, conv.lo(), conv.hi(), opts);
  CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}
