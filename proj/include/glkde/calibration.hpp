#pragma once

#include <span>
#include <string>

#include <Eigen/Dense>

#include "glkde/selection.hpp"

namespace glkde {

//! Selected bandwidth as a function of the penalty parameter a.
struct PenaltyPath {
  Eigen::ArrayXd a_values;   //!< strictly increasing, nonnegative
  Eigen::ArrayXd selected_h; //!< one grid bandwidth per a
  Eigen::ArrayXd losses;     //!< per-a true loss; empty when unknown

  //! CSV with columns a,selected_h,loss (loss blank when unknown).
  std::string to_csv() const;
};

struct JumpResult {
  double a_hat = 0.0;
  Eigen::Index index = 0; //!< k* with the largest ratio h(a_k)/h(a_{k-1})
  bool no_jump = false;   //!< path was constant; a_hat is the smallest a
};

struct CalibrationResult {
  double a_hat = 0.0;
  double b = 0.0; //!< 2 a_hat
  bool no_jump = false;
  SelectionResult result;
};

//! Selected bandwidth for each a, sharing one distance cache.
PenaltyPath bandwidth_path(const Sample& sample, const BandwidthGrid& grid,
                           Kernel k, std::span<const double> a_values);
//! Cache-reusing form; when a per-grid-index loss table is supplied the
//! path records the loss of each selected bandwidth.
PenaltyPath bandwidth_path(const DistanceCache& distances,
                           std::span<const double> a_values,
                           const Eigen::ArrayXd& loss_table = {});

//! Largest multiplicative jump of the selected bandwidth along the path;
//! ties break at the smallest index, a constant path is flagged.
JumpResult detect_jump(const PenaltyPath& path);

//! Full data-driven rule: a_hat from the jump, b = 2 a_hat, final selection
//! with select_two(a_hat, b).
CalibrationResult calibrate(const Sample& sample, const BandwidthGrid& grid,
                            Kernel k, std::span<const double> a_values);
CalibrationResult calibrate(const DistanceCache& distances,
                            std::span<const double> a_values);

//! The default calibration sweep 0.05, 0.10, ..., 3.00.
std::vector<double> default_a_grid();

} // namespace glkde
