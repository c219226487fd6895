#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "glkde/densities.hpp"
#include "glkde/quadrature.hpp"

using namespace glkde;

namespace {

double ks_distance(const Sample& s, const TestDensity& d) {
  const auto& x = s.sorted();
  const double n = static_cast<double>(x.size());
  double ks = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double F = d.cdf(x(i));
    ks = std::max(ks, std::max(F - i / n, (i + 1) / n - F));
  }
  return ks;
}

} // namespace

TEST_CASE("make_density: ids and validation") {
  CHECK_THROWS_AS(make_density(0), std::invalid_argument);
  CHECK_THROWS_AS(make_density(7), std::invalid_argument);
  for (int id = 1; id <= 6; ++id) CHECK(make_density(id).id() == id);
}

TEST_CASE("pdf: pointwise values") {
  CHECK(make_density(2).pdf(0.5) == 1.0);
  CHECK(make_density(1).pdf(0.0) == doctest::Approx(0.3183098861837907).epsilon(1e-14));
  // 1/2 N(0,1) + 1/2 N(3,9) at zero: (phi(0) + phi(1)/3) / 2
  const double expected4 =
      0.5 * (0.3989422804014327 + 0.24197072451914337 / 3.0);
  CHECK(make_density(4).pdf(0.0) == doctest::Approx(expected4).epsilon(1e-13));
  CHECK(make_density(4).pdf(0.0) == doctest::Approx(0.2397995942872403).epsilon(1e-12));
  CHECK(make_density(6).pdf(0.03) == 2.0);
  CHECK(make_density(6).pdf(0.07) == 0.0);
  CHECK(make_density(3).pdf(-0.5) == 0.0);
}

TEST_CASE("pdf integrates to one over the quadrature domain") {
  for (int id = 1; id <= 6; ++id) {
    const auto d = make_density(id);
    QuadratureOptions opts;
    opts.abs_tol = 1e-9;
    opts.rel_tol = 1e-9;
    opts.breakpoints = d.breakpoints();
    const double mass = integrate_or_throw([&](double x) { return d.pdf(x); },
                                           d.quad_lo(), d.quad_hi(), opts);
    CHECK(mass <= 1.0 + 1e-7);
    CHECK(mass >= 1.0 - 1e-6);
    CHECK(d.excluded_tail_mass() < 1e-8);
    CHECK(d.excluded_tail_mass() >= 0.0);
  }
}

TEST_CASE("l2 norms against closed values") {
  // Cauchy: 1/(2 pi); uniform: 1; exponential: 1/2; comb: 2
  CHECK(make_density(1).l2_norm_sq() ==
        doctest::Approx(1.0 / (2.0 * 3.141592653589793)).epsilon(1e-8));
  CHECK(make_density(2).l2_norm_sq() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(make_density(3).l2_norm_sq() == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(make_density(6).l2_norm_sq() == doctest::Approx(2.0).epsilon(1e-10));
  // mixture of two normals, all cross terms closed-form
  const double n4 = 0.25 * (0.2820947917738781 + 1.0 / std::sqrt(36.0 * 3.141592653589793) +
                            2.0 * std::exp(-0.45) / std::sqrt(20.0 * 3.141592653589793));
  CHECK(make_density(4).l2_norm_sq() == doctest::Approx(n4).epsilon(1e-9));
}

TEST_CASE("samplers: deterministic, finite, correct moments") {
  const auto d2 = make_density(2);
  const Sample s2 = sample(d2, 100000, 1);
  CHECK(s2.observations().mean() > 0.497);
  CHECK(s2.observations().mean() < 0.503);

  const auto d3 = make_density(3);
  const Sample s3 = sample(d3, 100000, 1);
  CHECK(s3.observations().mean() > 0.99);
  CHECK(s3.observations().mean() < 1.01);

  const auto d1 = make_density(1);
  const Sample s1 = sample(d1, 10, 123);
  CHECK(s1.observations().isFinite().all());

  // determinism per (id, n, seed)
  const Sample again = sample(d1, 10, 123);
  CHECK((again.observations() == s1.observations()).all());
  CHECK_THROWS_AS(sample(d1, 0, 1), std::invalid_argument);
}

TEST_CASE("samplers: Kolmogorov-Smirnov distance below 0.01 at n = 1e5") {
  for (int id = 1; id <= 6; ++id) {
    const auto d = make_density(id);
    const Sample s = sample(d, 100000, 42 + id);
    CHECK(ks_distance(s, d) < 0.01);
  }
}

TEST_CASE("smoothed_density: closed values and approximation to identity") {
  const auto d2 = make_density(2);
  CHECK(smoothed_density(d2, 1e-6, Kernel::gaussian, 0.5) ==
        doctest::Approx(1.0).epsilon(1e-4));
  CHECK(smoothed_density(d2, 0.2, Kernel::rectangular, 0.5) ==
        doctest::Approx(1.0).epsilon(1e-10));

  const auto d4 = make_density(4);
  const double expected = 0.5 * (1.0 / std::sqrt(4.0 * 3.141592653589793) +
                                 std::exp(-0.45) / std::sqrt(20.0 * 3.141592653589793));
  CHECK(smoothed_density(d4, 1.0, Kernel::gaussian, 0.0) ==
        doctest::Approx(expected).epsilon(1e-13));
  CHECK(smoothed_density(d4, 1.0, Kernel::gaussian, 0.0) ==
        doctest::Approx(0.181268).epsilon(1e-6));
  CHECK_THROWS_AS(smoothed_density(d4, 0.0, Kernel::gaussian, 0.0),
                  std::invalid_argument);
}

TEST_CASE("smoothed_density: closed forms agree with quadrature") {
  for (int id : {2, 3, 4, 5, 6}) {
    const auto d = make_density(id);
    for (double x : {-0.8, 0.1, 0.5, 1.3, 3.0}) {
      for (double h : {0.05, 0.4}) {
        const double closed = smoothed_density(d, h, Kernel::gaussian, x);
        const double quad = smoothed_density_by_quadrature(d, h, Kernel::gaussian, x);
        CHECK(std::abs(closed - quad) < 1e-8);
      }
    }
  }
}

TEST_CASE("true_risk: disjoint-support closed case") {
  // a single observation far from the uniform support: the cross term is
  // zero, so the risk is ||f_hat||^2 + ||f||^2 = 0.5/0.001 + 1
  const auto d2 = make_density(2);
  const Sample s(std::vector<double>{100.0});
  CHECK(true_risk(s, 0.001, Kernel::rectangular, d2) ==
        doctest::Approx(501.0).epsilon(1e-10));
  CHECK_THROWS_AS(true_risk(s, 0.0, Kernel::rectangular, d2),
                  std::invalid_argument);
}

TEST_CASE("true_risk: nonnegative and small for a good fit") {
  const auto d2 = make_density(2);
  const Sample s = sample(d2, 50000, 7);
  const double risk = true_risk(s, 0.05, Kernel::gaussian, d2);
  CHECK(risk >= 0.0);
  CHECK(risk < 0.05);
}

TEST_CASE("true_risk agrees with full grid quadrature at moderate h") {
  const auto d4 = make_density(4);
  const Sample s = sample(d4, 200, 11);
  const double h = 0.45;
  const double exact = true_risk(s, h, Kernel::gaussian, d4);

  const auto grid = make_uniform_grid(-16.0, 22.0, 1 << 19);
  const auto fhat = kde_on_grid(s, h, Kernel::gaussian, grid);
  Eigen::ArrayXd f(grid.points.size());
  for (Eigen::Index i = 0; i < grid.points.size(); ++i)
    f(i) = d4.pdf(grid.points(i));
  const double approx = grid_l2_sq(fhat, f, grid);
  CHECK(std::abs(exact - approx) < 1e-5 * exact);
}

TEST_CASE("loss_table matches per-bandwidth true_risk") {
  const auto d4 = make_density(4);
  const Sample s = sample(d4, 300, 13);
  const BandwidthGrid grid({0.1, 0.3, 0.9});
  const DistanceCache cache(s, grid, Kernel::gaussian);
  const auto losses = loss_table(cache, s, d4);
  for (Eigen::Index i = 0; i < grid.size(); ++i)
    CHECK(losses(i) ==
          doctest::Approx(true_risk(s, grid[i], Kernel::gaussian, d4)).epsilon(1e-12));
}

TEST_CASE("bias_D: single-term case and grid monotonicity") {
  const auto d4 = make_density(4);
  const BandwidthGrid grid({0.1, 0.25, 0.6, 1.2});

  // h = h_min: the sup term is empty, so D(h) = ||f - f_h||
  const double d_min = bias_D(d4, 0.1, Kernel::gaussian, grid);
  QuadratureOptions opts;
  opts.abs_tol = 1e-12;
  opts.rel_tol = 1e-8;
  const double direct = std::sqrt(integrate_or_throw(
      [&](double x) {
        const double dd = d4.pdf(x) - smoothed_density(d4, 0.1, Kernel::gaussian, x);
        return dd * dd;
      },
      d4.quad_lo() - 1.0, d4.quad_hi() + 1.0, opts));
  CHECK(d_min == doctest::Approx(direct).epsilon(1e-6));

  double prev = 0.0;
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    const double cur = bias_D(d4, grid[i], Kernel::gaussian, grid);
    CHECK(cur >= prev - 1e-6);
    prev = cur;
  }
  CHECK_THROWS_AS(bias_D(d4, 0.5, Kernel::gaussian, grid), std::invalid_argument);
}

TEST_CASE("bias_D: regression value for the uniform density") {
  const auto d2 = make_density(2);
  const BandwidthGrid grid = BandwidthGrid::simulation_set();
  const double v = bias_D(d2, 0.002, Kernel::gaussian, grid);
  CHECK(v > 0.0);
  CHECK(v == doctest::Approx(0.030574171).epsilon(1e-6));
}
