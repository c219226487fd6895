#include "glkde/selection.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace glkde {

BandwidthGrid::BandwidthGrid(std::vector<double> bandwidths) {
  if (bandwidths.empty())
    throw std::invalid_argument("BandwidthGrid: empty bandwidth set");
  for (double h : bandwidths)
    if (!(h > 0.0) || !std::isfinite(h))
      throw std::invalid_argument("BandwidthGrid: bandwidths must be positive and finite");
  std::sort(bandwidths.begin(), bandwidths.end());
  bandwidths.erase(std::unique(bandwidths.begin(), bandwidths.end()),
                   bandwidths.end());
  bandwidths_ = Eigen::Map<const Eigen::ArrayXd>(
      bandwidths.data(), static_cast<Eigen::Index>(bandwidths.size()));
  e_h_ = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i + 1 < bandwidths_.size(); ++i)
    e_h_ = std::min(e_h_, bandwidths_(i + 1) / bandwidths_(i));
}

Eigen::Index BandwidthGrid::index_of(double h) const {
  const double* first = bandwidths_.data();
  const double* last = first + bandwidths_.size();
  const double* it = std::lower_bound(first, last, h);
  if (it == last || *it != h)
    throw std::invalid_argument("BandwidthGrid: bandwidth not in grid");
  return it - first;
}

BandwidthGrid BandwidthGrid::simulation_set() {
  std::vector<double> hs;
  for (int k = 3; k <= 10; ++k) hs.push_back(std::exp(-k));
  for (int k = 0; k <= 24; ++k) hs.push_back(0.002 + 0.02 * k);
  return BandwidthGrid(std::move(hs));
}

BandwidthGrid BandwidthGrid::theorem_set(long n) {
  if (n < 2) throw std::invalid_argument("theorem_set: n must be >= 2");
  const double ln = std::log(static_cast<double>(n));
  const int k_lo = static_cast<int>(std::ceil(2.0 * std::log(ln)));
  const int k_hi = static_cast<int>(std::floor(ln));
  if (k_lo > k_hi)
    throw std::invalid_argument(
        "theorem_set: empty set, ceil(2 log log n) exceeds floor(log n)");
  std::vector<double> hs;
  for (int k = k_lo; k <= k_hi; ++k) hs.push_back(std::exp(-k));
  return BandwidthGrid(std::move(hs));
}

DistanceCache::DistanceCache(const Sample& sample, const BandwidthGrid& grid,
                             Kernel k, int threads)
    : grid_(grid), kernel_(k), n_(sample.size()) {
  const Eigen::Index m = grid_.size();
  s_.resize(m, m);

  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(m) * (m + 1) / 2);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = i; j < m; ++j) pairs.emplace_back(i, j);

  const auto fill = [&](std::size_t p) {
    const auto [i, j] = pairs[p];
    const double v =
        mean_pair_sum(sample, CrossCorrelation(kernel_, grid_[i], grid_[j]));
    s_(i, j) = v;
    s_(j, i) = v;
  };

  if (threads <= 1 || pairs.size() < 2) {
    for (std::size_t p = 0; p < pairs.size(); ++p) fill(p);
  } else {
    std::atomic<std::size_t> next{0};
    const int nthreads = std::min<int>(threads, static_cast<int>(pairs.size()));
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t)
      pool.emplace_back([&] {
        for (std::size_t p = next.fetch_add(1); p < pairs.size();
             p = next.fetch_add(1))
          fill(p);
      });
    for (auto& th : pool) th.join();
  }
}

double DistanceCache::distance_sq(Eigen::Index i, Eigen::Index j) const {
  const Eigen::Index lo = std::min(i, j);
  const Eigen::Index hi = std::max(i, j);
  double d = (s_(lo, lo) + s_(hi, hi)) - 2.0 * s_(lo, hi);
  if (d < 0.0 && d >= -1e-12) d = 0.0;
  return d;
}

double penalty(double h, double a, long n, Kernel k) {
  if (!(a >= 0.0)) throw std::invalid_argument("penalty: a must be nonnegative");
  if (n < 1) throw std::invalid_argument("penalty: n must be at least 1");
  return a * scaled_norm_sq(k, h) / static_cast<double>(n);
}

double compute_B(const BandwidthGrid& grid, Kernel k, long n, double a,
                 double h, const DistanceCache& distances) {
  if (distances.grid().size() != grid.size())
    throw std::invalid_argument("compute_B: cache does not match grid");
  const Eigen::Index idx = grid.index_of(h);
  // h' = h contributes [0 - V(h)]_+ = 0, so start at zero
  double best = 0.0;
  for (Eigen::Index j = 0; j <= idx; ++j) {
    const double v = distances.distance_sq(j, idx) - penalty(grid[j], a, n, k);
    best = std::max(best, v);
  }
  return best;
}

namespace {

SelectionResult select_impl(const DistanceCache& cache, double a, double b) {
  if (!(a >= 0.0) || !(b >= 0.0))
    throw std::invalid_argument("select: penalty parameters must be nonnegative");
  const BandwidthGrid& grid = cache.grid();
  const Kernel k = cache.kernel();
  const long n = static_cast<long>(cache.sample_size());
  const Eigen::Index m = grid.size();

  SelectionResult res;
  res.a = a;
  res.b = b;
  res.table.resize(static_cast<std::size_t>(m));
  Eigen::Index best = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    SelectionRow& row = res.table[static_cast<std::size_t>(i)];
    row.h = grid[i];
    double B = 0.0;
    for (Eigen::Index j = 0; j <= i; ++j)
      B = std::max(B, cache.distance_sq(j, i) - penalty(grid[j], a, n, k));
    row.B = B;
    row.V = penalty(grid[i], b, n, k);
    row.crit = row.B + row.V;
    if (row.crit < res.table[static_cast<std::size_t>(best)].crit) best = i;
  }
  res.argmin_index = best;
  res.selected_h = grid[best];
  return res;
}

} // namespace

SelectionResult select(const DistanceCache& distances, double a) {
  return select_two(distances, a, a);
}

SelectionResult select(const Sample& sample, const BandwidthGrid& grid,
                       Kernel k, double a) {
  return select_two(sample, grid, k, a, a);
}

SelectionResult select_two(const DistanceCache& distances, double a, double b) {
  return select_impl(distances, a, b);
}

SelectionResult select_two(const Sample& sample, const BandwidthGrid& grid,
                           Kernel k, double a, double b) {
  const DistanceCache cache(sample, grid, k);
  return select_impl(cache, a, b);
}

nlohmann::json SelectionResult::to_json() const {
  nlohmann::json j;
  j["selected_h"] = selected_h;
  j["argmin_index"] = argmin_index;
  j["a"] = a;
  j["b"] = b;
  j["table"] = nlohmann::json::array();
  for (const auto& row : table)
    j["table"].push_back(
        {{"h", row.h}, {"B", row.B}, {"V", row.V}, {"crit", row.crit}});
  return j;
}

} // namespace glkde
