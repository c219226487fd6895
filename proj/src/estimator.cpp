#include "glkde/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace glkde {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343819;

struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

} // namespace

Sample::Sample(Eigen::ArrayXd observations)
    : observations_(std::move(observations)) {
  if (observations_.size() < 1)
    throw std::invalid_argument("Sample: need at least one observation");
  if (!observations_.isFinite().all())
    throw std::invalid_argument("Sample: observations must be finite");
  sorted_ = observations_;
  std::sort(sorted_.begin(), sorted_.end());
}

Sample::Sample(const std::vector<double>& observations)
    : Sample(Eigen::Map<const Eigen::ArrayXd>(
          observations.data(),
          static_cast<Eigen::Index>(observations.size()))) {}

EvaluationGrid make_uniform_grid(double lo, double hi, Eigen::Index n) {
  if (n < 2) throw std::invalid_argument("make_uniform_grid: need >= 2 points");
  if (!(lo < hi)) throw std::invalid_argument("make_uniform_grid: lo < hi required");
  EvaluationGrid g;
  g.spacing = (hi - lo) / static_cast<double>(n - 1);
  g.points = Eigen::ArrayXd::LinSpaced(n, lo, hi);
  return g;
}

EvaluationGrid default_grid(const Sample& sample, double h_max, Kernel k,
                            Eigen::Index n) {
  if (!(h_max > 0.0)) throw std::invalid_argument("default_grid: h_max must be positive");
  const double margin =
      k == Kernel::gaussian ? 8.0 * h_max : 4.0 * h_max * support_radius(k);
  const auto& x = sample.sorted();
  return make_uniform_grid(x(0) - margin, x(x.size() - 1) + margin, n);
}

Eigen::ArrayXd kde_on_grid(const Sample& sample, double h, Kernel k,
                           const EvaluationGrid& grid) {
  if (!(h > 0.0)) throw std::invalid_argument("kde_on_grid: h must be positive");
  const auto& x = sample.sorted();
  const Eigen::Index n = x.size();
  const double cut = k == Kernel::gaussian ? 8.0 * h : support_radius(k) * h;
  const double inv_h = 1.0 / h;
  const double weight = inv_h / static_cast<double>(n);

  Eigen::ArrayXd values(grid.points.size());
  // grid points ascend, so the sample window slides monotonically
  Eigen::Index lo = 0, hi = 0;
  for (Eigen::Index gi = 0; gi < grid.points.size(); ++gi) {
    const double p = grid.points(gi);
    while (lo < n && x(lo) < p - cut) ++lo;
    if (hi < lo) hi = lo;
    while (hi < n && x(hi) <= p + cut) ++hi;
    const Eigen::Index len = hi - lo;
    if (len == 0) {
      values(gi) = 0.0;
      continue;
    }
    const auto seg = x.segment(lo, len);
    if (k == Kernel::gaussian) {
      values(gi) =
          weight * kInvSqrt2Pi *
          ((seg - p).square() * (-0.5 * inv_h * inv_h)).exp().sum();
    } else {
      double acc = 0.0;
      for (Eigen::Index i = lo; i < hi; ++i) acc += eval(k, (p - x(i)) * inv_h);
      values(gi) = weight * acc;
    }
  }
  return values;
}

double mean_pair_sum(const Sample& sample, const CrossCorrelation& psi) {
  const auto& x = sample.sorted();
  const Eigen::Index n = x.size();
  const double cut = psi.cutoff();

  KahanSum off_diag;
  if (psi.is_gaussian()) {
    const double c = psi.exponent_scale();
    Eigen::Index hi = 1;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (hi < i + 1) hi = i + 1;
      while (hi < n && x(hi) - x(i) < cut) ++hi;
      const Eigen::Index len = hi - (i + 1);
      if (len > 0)
        off_diag.add(((x.segment(i + 1, len) - x(i)).square() * c).exp().sum());
    }
    const double nn = static_cast<double>(n);
    return psi.amplitude() * (nn + 2.0 * off_diag.sum) / (nn * nn);
  }

  Eigen::Index hi = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (hi < i + 1) hi = i + 1;
    while (hi < n && x(hi) - x(i) < cut) ++hi;
    for (Eigen::Index j = i + 1; j < hi; ++j) off_diag.add(psi(x(j) - x(i)));
  }
  const double nn = static_cast<double>(n);
  return (nn * psi(0.0) + 2.0 * off_diag.sum) / (nn * nn);
}

double pairwise_l2_sq(const Sample& sample, double h1, double h2, Kernel k) {
  if (!(h1 > 0.0) || !(h2 > 0.0))
    throw std::invalid_argument("pairwise_l2_sq: bandwidths must be positive");
  const double lo = std::min(h1, h2);
  const double hi = std::max(h1, h2);
  const double s_ll = mean_pair_sum(sample, CrossCorrelation(k, lo, lo));
  const double s_hh = mean_pair_sum(sample, CrossCorrelation(k, hi, hi));
  const double s_lh = mean_pair_sum(sample, CrossCorrelation(k, lo, hi));
  double d = (s_ll + s_hh) - 2.0 * s_lh;
  if (d < 0.0 && d >= -1e-12) d = 0.0;
  return d;
}

double grid_l2_sq(const Eigen::ArrayXd& values1, const Eigen::ArrayXd& values2,
                  const EvaluationGrid& grid) {
  if (values1.size() != values2.size() || values1.size() != grid.points.size())
    throw std::invalid_argument("grid_l2_sq: length mismatch");
  const Eigen::ArrayXd d2 = (values1 - values2).square();
  const Eigen::Index n = d2.size();
  return grid.spacing * (d2.sum() - 0.5 * (d2(0) + d2(n - 1)));
}

} // namespace glkde
