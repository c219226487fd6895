#include "glkde/piecewise_polynomial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace glkde {

namespace {

// binomial coefficients up to the largest degree a convolution can reach
constexpr int kMaxN = 24;

const double* binom_row(int n) {
  static const auto table = [] {
    std::array<std::array<double, kMaxN + 1>, kMaxN + 1> t{};
    for (int i = 0; i <= kMaxN; ++i) {
      t[i][0] = 1.0;
      for (int j = 1; j <= i; ++j)
        t[i][j] = t[i - 1][j - 1] + (j <= i - 1 ? t[i - 1][j] : 0.0);
    }
    return t;
  }();
  return table[n].data();
}

double pow_int(double x, int p) {
  double r = 1.0;
  for (int i = 0; i < p; ++i) r *= x;
  return r;
}

} // namespace

PiecewisePolynomial::PiecewisePolynomial(Eigen::ArrayXd breakpoints,
                                         Eigen::MatrixXd coeffs)
    : breakpoints_(std::move(breakpoints)), coeffs_(std::move(coeffs)) {
  if (breakpoints_.size() != coeffs_.rows() + 1)
    throw std::invalid_argument(
        "PiecewisePolynomial: need one more breakpoint than coefficient rows");
  for (Eigen::Index i = 0; i + 1 < breakpoints_.size(); ++i)
    if (!(breakpoints_(i) < breakpoints_(i + 1)))
      throw std::invalid_argument(
          "PiecewisePolynomial: breakpoints must be strictly increasing");
}

double PiecewisePolynomial::operator()(double u) const {
  if (pieces() == 0 || u < lo() || u > hi()) return 0.0;
  // locate the piece; the shared boundary belongs to the right piece
  const double* first = breakpoints_.data();
  const double* last = first + breakpoints_.size();
  Eigen::Index i = std::upper_bound(first, last, u) - first - 1;
  if (i >= pieces()) i = pieces() - 1; // u == hi()
  if (i < 0) i = 0;
  const double w = u - center(i);
  double acc = 0.0;
  for (Eigen::Index p = coeffs_.cols() - 1; p >= 0; --p)
    acc = acc * w + coeffs_(i, p);
  return acc;
}

PiecewisePolynomial convolve(const PiecewisePolynomial& p,
                             const PiecewisePolynomial& q) {
  if (p.pieces() == 0 || q.pieces() == 0)
    throw std::invalid_argument("convolve: empty operand");

  // breakpoints of the result: all pairwise sums of input breakpoints
  std::vector<double> crit;
  crit.reserve(static_cast<std::size_t>(p.breakpoints().size()) *
               q.breakpoints().size());
  for (double a : p.breakpoints())
    for (double b : q.breakpoints()) crit.push_back(a + b);
  std::sort(crit.begin(), crit.end());
  const double scale =
      std::max({std::abs(crit.front()), std::abs(crit.back()), 1e-300});
  const double merge_eps = 4e-16 * scale;
  std::vector<double> cells;
  for (double c : crit)
    if (cells.empty() || c - cells.back() > merge_eps) cells.push_back(c);
  if (cells.size() < 2)
    throw std::invalid_argument("convolve: degenerate supports");

  const int deg_p = static_cast<int>(p.degree());
  const int deg_q = static_cast<int>(q.degree());
  const int deg_r = deg_p + deg_q + 1;

  const Eigen::Index ncell = static_cast<Eigen::Index>(cells.size()) - 1;
  Eigen::MatrixXd rcoeffs = Eigen::MatrixXd::Zero(ncell, deg_r + 1);

  // scratch bivariate tables indexed [w power][tau power]
  Eigen::MatrixXd bq(deg_q + 1, deg_q + 1);
  Eigen::MatrixXd g(deg_p + deg_q + 1, deg_q + 1);
  Eigen::MatrixXd f(deg_p + deg_q + 2, deg_q + 1);

  for (Eigen::Index c = 0; c < ncell; ++c) {
    const double tc = 0.5 * (cells[c] + cells[c + 1]);

    for (Eigen::Index i = 0; i < p.pieces(); ++i) {
      const double pa = p.breakpoints()(i), pb = p.breakpoints()(i + 1);
      const double pc = p.center(i);
      for (Eigen::Index j = 0; j < q.pieces(); ++j) {
        const double qa = q.breakpoints()(j), qb = q.breakpoints()(j + 1);
        const double qc = q.center(j);

        // u ranges over [max(pa, t - qb), min(pb, t - qa)]; within a cell
        // the binding constraint of each bound is fixed (crossings happen
        // only at cell boundaries), so classify at the cell midpoint.
        const double lo_at_tc = std::max(pa, tc - qb);
        const double up_at_tc = std::min(pb, tc - qa);
        if (!(up_at_tc > lo_at_tc)) continue;
        const bool lower_const = pa >= tc - qb;
        const bool upper_const = pb <= tc - qa;

        // Q(t - u) with t = tc + tau, u = pc + w:
        //   Q(t - u) = sum_m q_m (d0 + tau - w)^m,  d0 = tc - pc - qc
        const double d0 = tc - pc - qc;
        bq.setZero();
        for (int m = 0; m <= deg_q; ++m) {
          const double qm = q.coeffs()(j, m);
          if (qm == 0.0) continue;
          const double* bm = binom_row(m);
          for (int jj = 0; jj <= m; ++jj) {
            const double c1 = qm * bm[jj] * pow_int(d0, m - jj);
            const double* bjj = binom_row(jj);
            for (int l = 0; l <= jj; ++l)
              bq(l, jj - l) += c1 * bjj[l] * ((l & 1) ? -1.0 : 1.0);
          }
        }

        // multiply by P(u) = sum_k p_k w^k
        g.setZero();
        for (int k = 0; k <= deg_p; ++k) {
          const double pk = p.coeffs()(i, k);
          if (pk == 0.0) continue;
          for (int l = 0; l <= deg_q; ++l)
            for (int r = 0; r <= deg_q; ++r) g(k + l, r) += pk * bq(l, r);
        }

        // antiderivative in w
        f.setZero();
        for (int l = 0; l <= deg_p + deg_q; ++l)
          for (int r = 0; r <= deg_q; ++r) f(l + 1, r) = g(l, r) / (l + 1);

        // substitute the affine bounds w = e + s*tau (s is 0 or 1) and
        // accumulate F(upper) - F(lower) into the cell polynomial; powers
        // beyond deg_r cancel exactly and are dropped.
        const auto substitute = [&](double e, bool affine, double sign) {
          for (int l = 1; l <= deg_p + deg_q + 1; ++l) {
            const double* bl = binom_row(l);
            for (int r = 0; r <= deg_q; ++r) {
              const double fc = f(l, r);
              if (fc == 0.0) continue;
              if (affine) {
                const int smax = std::min(l, deg_r - r);
                for (int s = 0; s <= smax; ++s)
                  rcoeffs(c, r + s) += sign * fc * bl[s] * pow_int(e, l - s);
              } else if (r <= deg_r) {
                rcoeffs(c, r) += sign * fc * pow_int(e, l);
              }
            }
          }
        };

        if (upper_const)
          substitute(pb - pc, false, 1.0);
        else
          substitute(tc - qa - pc, true, 1.0);
        if (lower_const)
          substitute(pa - pc, false, -1.0);
        else
          substitute(tc - qb - pc, true, -1.0);
      }
    }
  }

  Eigen::ArrayXd bp = Eigen::Map<const Eigen::ArrayXd>(
      cells.data(), static_cast<Eigen::Index>(cells.size()));
  return PiecewisePolynomial(std::move(bp), std::move(rcoeffs));
}

} // namespace glkde
