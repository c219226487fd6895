#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "glkde/experiments.hpp"
#include "glkde/random.hpp"

using namespace glkde;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.density_id = 4;
  cfg.kernel = Kernel::gaussian;
  cfg.n = 200;
  cfg.replicates = 3;
  cfg.a_values = {0.25, 0.75, 1.5};
  cfg.bandwidth_set = BandwidthSet::explicit_list;
  cfg.explicit_bandwidths = {0.05, 0.15, 0.45};
  cfg.base_seed = 99;
  return cfg;
}

std::vector<ExperimentRecord> random_records(int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<ExperimentRecord> recs(static_cast<std::size_t>(count));
  for (auto& r : recs) {
    r.density_id = 1 + static_cast<int>(rng() % 6);
    r.kernel = all_kernels[rng() % 4];
    r.n = 1 + static_cast<long>(rng() % 100000);
    r.replicate = static_cast<int>(rng() % 50);
    r.a = unif(rng) * 3.0;
    r.b = unif(rng) * 6.0;
    r.selected_h = std::exp(-10.0 * unif(rng));
    r.oracle_h = std::exp(-10.0 * unif(rng));
    r.loss_selected = unif(rng) * 2.0;
    r.loss_oracle = unif(rng);
    r.ratio = r.loss_selected / r.loss_oracle;
    r.h_gap = r.selected_h - r.oracle_h;
    r.seed = rng();
  }
  return recs;
}

} // namespace

TEST_CASE("derive_seed is deterministic and spreads indices") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("config bandwidth sets") {
  ExperimentConfig cfg;
  cfg.n = 50000;
  cfg.bandwidth_set = BandwidthSet::simulation;
  CHECK(cfg.make_grid().size() == 33);
  cfg.bandwidth_set = BandwidthSet::theorem;
  CHECK(cfg.make_grid().size() == 6);
  cfg.bandwidth_set = BandwidthSet::explicit_list;
  cfg.explicit_bandwidths = {0.2, 0.1};
  CHECK(cfg.make_grid().h_min() == 0.1);
}

TEST_CASE("run_replicates: singleton grid makes every ratio one") {
  ExperimentConfig cfg = small_config();
  cfg.replicates = 1;
  cfg.a_values = {0.7};
  cfg.explicit_bandwidths = {0.2};
  const auto recs = run_replicates(cfg);
  REQUIRE(recs.size() == 1);
  CHECK(recs[0].selected_h == 0.2);
  CHECK(recs[0].oracle_h == 0.2);
  CHECK(recs[0].ratio == 1.0);
  CHECK(recs[0].h_gap == 0.0);
  CHECK(recs[0].a == 0.7);
  CHECK(recs[0].b == 0.7);
}

TEST_CASE("run_replicates: record layout and oracle consistency") {
  const auto recs = run_replicates(small_config());
  REQUIRE(recs.size() == 9);
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    CHECK(r.replicate == static_cast<int>(i / 3));
    CHECK(r.a == small_config().a_values[i % 3]);
    CHECK(r.loss_selected >= r.loss_oracle - 1e-9);
    CHECK(r.ratio >= 1.0 - 1e-9);
    CHECK(r.h_gap == r.selected_h - r.oracle_h);
  }
  // replicates share the per-replicate loss table: same oracle within r
  CHECK(recs[0].loss_oracle == recs[1].loss_oracle);
  CHECK(recs[0].loss_oracle == recs[2].loss_oracle);
  CHECK(recs[0].seed == recs[2].seed);
  CHECK(recs[0].seed != recs[3].seed);
}

TEST_CASE("run_replicates: concurrent equals sequential") {
  ExperimentConfig cfg = small_config();
  cfg.threads = 1;
  const auto seq = run_replicates(cfg);
  cfg.threads = 4;
  const auto par = run_replicates(cfg);
  CHECK(seq == par);
}

TEST_CASE("run_replicates: calibrated rule emits one record per replicate") {
  ExperimentConfig cfg = small_config();
  cfg.b_rule = BRule::calibrated;
  const auto recs = run_replicates(cfg);
  REQUIRE(recs.size() == 3);
  for (const auto& r : recs) {
    CHECK(r.b == doctest::Approx(2.0 * r.a).epsilon(1e-15));
    CHECK(r.ratio >= 1.0 - 1e-9);
  }
}

TEST_CASE("oracle_constant averages ratios at a given a") {
  const auto recs = run_replicates(small_config());
  double manual = 0.0;
  for (const auto& r : recs)
    if (r.a == 0.75) manual += r.ratio;
  manual /= 3.0;
  CHECK(oracle_constant(recs, 0.75) == doctest::Approx(manual).epsilon(1e-15));
  CHECK_THROWS_AS(oracle_constant(recs, 0.33), std::invalid_argument);
}

TEST_CASE("csv: header-only for empty records") {
  const std::string csv = records_to_csv({});
  CHECK(csv ==
        "density_id,kernel,n,replicate,a,b,selected_h,oracle_h,loss_selected,"
        "loss_oracle,ratio,h_gap,seed\n");
  CHECK(records_from_csv_string(csv).empty());
}

TEST_CASE("csv: single record round-trips exactly") {
  const auto recs = random_records(1, 5);
  const std::string csv = records_to_csv(recs);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
  const auto back = records_from_csv_string(csv);
  REQUIRE(back.size() == 1);
  CHECK(back[0] == recs[0]);
}

TEST_CASE("csv: 1500 records round-trip exactly") {
  const auto recs = random_records(1500, 6);
  const std::string csv = records_to_csv(recs);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1501);
  const auto back = records_from_csv_string(csv);
  CHECK(back == recs);
}

TEST_CASE("csv: malformed input is rejected") {
  CHECK_THROWS(records_from_csv_string("bad,header\n"));
  CHECK_THROWS(records_from_csv_string(
      "density_id,kernel,n,replicate,a,b,selected_h,oracle_h,loss_selected,"
      "loss_oracle,ratio,h_gap,seed\n1,gaussian,10\n"));
}

TEST_CASE("json mirrors the csv fields") {
  const auto recs = random_records(3, 7);
  const auto j = records_to_json(recs);
  REQUIRE(j.size() == 3);
  CHECK(j[0]["density_id"] == recs[0].density_id);
  CHECK(j[0]["seed"] == recs[0].seed);
  CHECK(j[2]["ratio"] == recs[2].ratio);
}

TEST_CASE("emit writes data plus sidecar metadata") {
  ExperimentConfig cfg = small_config();
  cfg.replicates = 1;
  cfg.out_path = "test_emit_out.csv";
  const auto recs = run_replicates(cfg);
  emit(recs, cfg);

  std::ifstream data(cfg.out_path);
  REQUIRE(data.good());
  const auto back = records_from_csv(data);
  CHECK(back == recs);

  std::ifstream meta(cfg.out_path + ".meta.json");
  REQUIRE(meta.good());
  nlohmann::json m;
  meta >> m;
  CHECK(m["config"]["density_id"] == 4);
  CHECK(m["bandwidths"].size() == 3);
  CHECK(m.contains("version"));
  CHECK(m.contains("created_unix_ms"));
  std::remove(cfg.out_path.c_str());
  std::remove((cfg.out_path + ".meta.json").c_str());
}

TEST_CASE("identical configs produce identical bytes") {
  const ExperimentConfig cfg = small_config();
  const std::string a = records_to_csv(run_replicates(cfg));
  const std::string b = records_to_csv(run_replicates(cfg));
  CHECK(a == b);
}

TEST_CASE("theorem_check: zero penalty always collapses") {
  const double freq = theorem_check(2, Kernel::gaussian, 1000, 5, 0.0, 7);
  CHECK(freq == 1.0);
}
