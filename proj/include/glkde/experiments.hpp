#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "glkde/calibration.hpp"
#include "glkde/densities.hpp"
#include "glkde/selection.hpp"

namespace glkde {

enum class BRule {
  equal_to_a, //!< b = a (one-parameter procedure)
  fixed,      //!< b is a fixed value
  calibrated  //!< b = 2 a_hat from the per-replicate jump detection
};

enum class BandwidthSet { simulation, theorem, explicit_list };

enum class OutputFormat { csv, json };

struct ExperimentConfig {
  int density_id = 1;
  Kernel kernel = Kernel::gaussian;
  long n = 5000;
  int replicates = 50;
  std::vector<double> a_values;
  BRule b_rule = BRule::equal_to_a;
  double b_fixed = 0.0;
  BandwidthSet bandwidth_set = BandwidthSet::simulation;
  std::vector<double> explicit_bandwidths;
  std::uint64_t base_seed = 1;
  std::string out_path;
  OutputFormat format = OutputFormat::csv;
  int threads = 1;

  BandwidthGrid make_grid() const;
  nlohmann::json to_json() const;
};

struct ExperimentRecord {
  int density_id = 0;
  Kernel kernel = Kernel::gaussian;
  long n = 0;
  int replicate = 0;
  double a = 0.0;
  double b = 0.0;
  double selected_h = 0.0;
  double oracle_h = 0.0;
  double loss_selected = 0.0;
  double loss_oracle = 0.0;
  double ratio = 0.0;
  double h_gap = 0.0; //!< selected_h - oracle_h
  std::uint64_t seed = 0;

  bool operator==(const ExperimentRecord&) const = default;
};

//! One record per (replicate, a); for BRule::calibrated one record per
//! replicate at (a_hat, 2 a_hat), the a sweep serving as the search grid.
//! Replicates run independently (config.threads of them concurrently);
//! results are ordered by (replicate, a) regardless of schedule.
std::vector<ExperimentRecord> run_replicates(const ExperimentConfig& config);

//! Empirical mean over replicates of loss_selected / loss_oracle at this a.
double oracle_constant(std::span<const ExperimentRecord> records, double a);

//! Fraction of replicates selecting below 3 h_min on the theorem bandwidth
//! set for this n. Losses are not computed.
double theorem_check(int density_id, Kernel k, long n, int replicates,
                     double a, std::uint64_t base_seed, int threads = 1);

//! Round-trip CSV: header plus one row per record, shortest exact decimals.
std::string records_to_csv(std::span<const ExperimentRecord> records);
std::vector<ExperimentRecord> records_from_csv(std::istream& in);
std::vector<ExperimentRecord> records_from_csv_string(const std::string& csv);

nlohmann::json records_to_json(std::span<const ExperimentRecord> records);

//! Write records to config.out_path in config.format plus a sidecar
//! metadata file <out_path>.meta.json (config echo, version, bandwidth set
//! actually used, timestamp).
void emit(std::span<const ExperimentRecord> records,
          const ExperimentConfig& config);

} // namespace glkde
