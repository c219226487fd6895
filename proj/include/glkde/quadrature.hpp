#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace glkde {

struct QuadratureOptions {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  int max_depth = 52;
  //! Interior points where the integrand may be non-smooth; the domain is
  //! split there before any adaptive refinement starts.
  std::vector<double> breakpoints{};
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0; //!< accumulated error estimate
  bool converged = true;
  std::int64_t evaluations = 0;
};

namespace detail {

template <class F>
void adapt_simpson(const F& f, double a, double m, double b, double fa, double fm,
                   double fb, double whole, double tol, int depth,
                   QuadratureResult& out) {
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  out.evaluations += 2;
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double err = (left + right - whole) / 15.0;
  // stop when the Richardson estimate meets the budget, hits the roundoff
  // floor of the local values, or the interval cannot be split further
  const double floor_tol =
      16.0 * std::numeric_limits<double>::epsilon() *
      (std::abs(left) + std::abs(right));
  if (std::abs(err) <= std::max(tol, floor_tol) || depth <= 0 || lm <= a ||
      rm >= b) {
    out.value += left + right + err;
    out.error += std::abs(err);
    if (std::abs(err) > std::max(tol, floor_tol)) out.converged = false;
    return;
  }
  adapt_simpson(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1, out);
  adapt_simpson(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1, out);
}

} // namespace detail

//! Adaptive Simpson integration of f over [lo, hi].
template <class F>
QuadratureResult integrate(const F& f, double lo, double hi,
                           const QuadratureOptions& opts = {}) {
  if (!(lo <= hi)) throw std::invalid_argument("integrate: lo must be <= hi");
  QuadratureResult out;
  if (lo == hi) return out;

  std::vector<double> nodes;
  nodes.push_back(lo);
  for (double b : opts.breakpoints)
    if (b > lo && b < hi) nodes.push_back(b);
  nodes.push_back(hi);
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());

  const std::size_t nseg = nodes.size() - 1;

  // rough first pass to anchor the relative tolerance; segment endpoints
  // are sampled a hair inside so that values exactly at seeded
  // discontinuities do not poison the Richardson estimate
  constexpr double kInward = 0x1.0p-40;
  double rough = 0.0;
  std::vector<double> seg_whole(nseg), seg_fa(nseg), seg_fm(nseg), seg_fb(nseg);
  for (std::size_t s = 0; s < nseg; ++s) {
    const double a = nodes[s], b = nodes[s + 1], m = 0.5 * (a + b);
    seg_fa[s] = f(a + kInward * (b - a));
    seg_fm[s] = f(m);
    seg_fb[s] = f(b - kInward * (b - a));
    out.evaluations += 3;
    seg_whole[s] = (b - a) / 6.0 * (seg_fa[s] + 4.0 * seg_fm[s] + seg_fb[s]);
    rough += std::abs(seg_whole[s]);
  }
  const double tol =
      std::max(opts.abs_tol, opts.rel_tol * rough) / static_cast<double>(nseg);

  for (std::size_t s = 0; s < nseg; ++s) {
    const double a = nodes[s], b = nodes[s + 1], m = 0.5 * (a + b);
    detail::adapt_simpson(f, a, m, b, seg_fa[s], seg_fm[s], seg_fb[s], seg_whole[s],
                          tol, opts.max_depth, out);
  }
  return out;
}

//! Convenience wrapper returning the value; throws when the error budget
//! could not be met.
template <class F>
double integrate_or_throw(const F& f, double lo, double hi,
                          const QuadratureOptions& opts = {}) {
  const QuadratureResult r = integrate(f, lo, hi, opts);
  if (!r.converged) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", r.error);
    throw std::runtime_error(
        std::string("quadrature did not converge; achieved error ") + buf);
  }
  return r.value;
}

} // namespace glkde
