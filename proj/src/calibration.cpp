#include "glkde/calibration.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>

namespace glkde {

namespace {

void validate_a_values(std::span<const double> a_values) {
  if (a_values.empty())
    throw std::invalid_argument("bandwidth_path: empty a sweep");
  for (std::size_t i = 0; i < a_values.size(); ++i) {
    if (!(a_values[i] >= 0.0))
      throw std::invalid_argument("bandwidth_path: a values must be nonnegative");
    if (i > 0 && !(a_values[i] > a_values[i - 1]))
      throw std::invalid_argument("bandwidth_path: a values must be strictly increasing");
  }
}

std::string shortest(double x) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, p);
}

} // namespace

PenaltyPath bandwidth_path(const DistanceCache& distances,
                           std::span<const double> a_values,
                           const Eigen::ArrayXd& loss_table) {
  validate_a_values(a_values);
  if (loss_table.size() != 0 && loss_table.size() != distances.grid().size())
    throw std::invalid_argument("bandwidth_path: loss table does not match grid");
  PenaltyPath path;
  const Eigen::Index m = static_cast<Eigen::Index>(a_values.size());
  path.a_values.resize(m);
  path.selected_h.resize(m);
  if (loss_table.size() != 0) path.losses.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = a_values[static_cast<std::size_t>(i)];
    const SelectionResult res = select(distances, a);
    path.a_values(i) = a;
    path.selected_h(i) = res.selected_h;
    if (loss_table.size() != 0) path.losses(i) = loss_table(res.argmin_index);
  }
  return path;
}

PenaltyPath bandwidth_path(const Sample& sample, const BandwidthGrid& grid,
                           Kernel k, std::span<const double> a_values) {
  const DistanceCache cache(sample, grid, k);
  return bandwidth_path(cache, a_values);
}

JumpResult detect_jump(const PenaltyPath& path) {
  const Eigen::Index m = path.a_values.size();
  if (m < 2) throw std::invalid_argument("detect_jump: need at least 2 path points");

  bool constant = true;
  for (Eigen::Index i = 1; i < m && constant; ++i)
    constant = path.selected_h(i) == path.selected_h(0);
  if (constant)
    return JumpResult{path.a_values(0), 0, true};

  Eigen::Index best = 1;
  double best_ratio = path.selected_h(1) / path.selected_h(0);
  for (Eigen::Index i = 2; i < m; ++i) {
    const double r = path.selected_h(i) / path.selected_h(i - 1);
    if (r > best_ratio) {
      best_ratio = r;
      best = i;
    }
  }
  return JumpResult{path.a_values(best), best, false};
}

CalibrationResult calibrate(const DistanceCache& distances,
                            std::span<const double> a_values) {
  const PenaltyPath path = bandwidth_path(distances, a_values);
  const JumpResult jump = detect_jump(path);
  CalibrationResult out;
  out.a_hat = jump.a_hat;
  out.b = 2.0 * jump.a_hat;
  out.no_jump = jump.no_jump;
  out.result = select_two(distances, out.a_hat, out.b);
  return out;
}

CalibrationResult calibrate(const Sample& sample, const BandwidthGrid& grid,
                            Kernel k, std::span<const double> a_values) {
  const DistanceCache cache(sample, grid, k);
  return calibrate(cache, a_values);
}

std::string PenaltyPath::to_csv() const {
  std::string out = "a,selected_h,loss\n";
  for (Eigen::Index i = 0; i < a_values.size(); ++i) {
    out += shortest(a_values(i));
    out += ',';
    out += shortest(selected_h(i));
    out += ',';
    if (losses.size() != 0) out += shortest(losses(i));
    out += '\n';
  }
  return out;
}

std::vector<double> default_a_grid() {
  std::vector<double> a;
  for (int i = 1; i <= 60; ++i) a.push_back(0.05 * i);
  return a;
}

} // namespace glkde
