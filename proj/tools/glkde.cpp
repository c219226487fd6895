// glkde: Goldenshluger-Lepski bandwidth selection for univariate kernel
// density estimation, with the minimal-penalty experiment harness.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glkde/calibration.hpp"
#include "glkde/densities.hpp"
#include "glkde/experiments.hpp"
#include "glkde/kernels.hpp"
#include "glkde/version.hpp"

namespace {

using namespace glkde;

std::vector<double> parse_a_grid(const std::string& spec) {
  // "min:max:step" or a single value
  const std::size_t c1 = spec.find(':');
  if (c1 == std::string::npos) return {std::stod(spec)};
  const std::size_t c2 = spec.find(':', c1 + 1);
  if (c2 == std::string::npos)
    throw CLI::ValidationError("--a-grid", "expected min:max:step");
  const double lo = std::stod(spec.substr(0, c1));
  const double hi = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
  const double step = std::stod(spec.substr(c2 + 1));
  if (!(step > 0.0) || hi < lo)
    throw CLI::ValidationError("--a-grid", "need min <= max and step > 0");
  std::vector<double> a;
  for (double v = lo; v <= hi + 1e-12 * step; v += step) a.push_back(v);
  return a;
}

std::vector<double> read_bandwidth_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CLI::ValidationError("--bandwidths", "cannot open " + path);
  std::vector<double> hs;
  double v = 0.0;
  while (in >> v) hs.push_back(v);
  if (hs.empty())
    throw CLI::ValidationError("--bandwidths", "no bandwidths in " + path);
  return hs;
}

void apply_bandwidth_choice(ExperimentConfig& cfg, const std::string& choice) {
  if (choice == "sim") {
    cfg.bandwidth_set = BandwidthSet::simulation;
  } else if (choice == "theorem") {
    cfg.bandwidth_set = BandwidthSet::theorem;
  } else {
    cfg.bandwidth_set = BandwidthSet::explicit_list;
    cfg.explicit_bandwidths = read_bandwidth_file(choice);
  }
}

void apply_b_choice(ExperimentConfig& cfg, const std::string& choice) {
  if (choice == "a") {
    cfg.b_rule = BRule::equal_to_a;
  } else if (choice == "calibrate") {
    cfg.b_rule = BRule::calibrated;
  } else {
    cfg.b_rule = BRule::fixed;
    cfg.b_fixed = std::stod(choice);
    if (!(cfg.b_fixed >= 0.0))
      throw CLI::ValidationError("--b", "fixed b must be nonnegative");
  }
}

void write_or_print(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + out_path);
  out << text;
}

// expand "--config FILE" into the flags listed in FILE (flat key=value
// lines, '#' comments), keeping explicit command-line flags after them so
// they win on conflicts
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] != "--config") continue;
    if (i + 1 >= args.size())
      throw std::runtime_error("--config requires a file path");
    std::ifstream in(args[i + 1]);
    if (!in) throw std::runtime_error("cannot open config " + args[i + 1]);
    std::vector<std::string> expanded;
    std::string line;
    while (std::getline(in, line)) {
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) continue;
      auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
      };
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) continue;
      expanded.push_back("--" + key);
      if (!value.empty()) expanded.push_back(value);
    }
    args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
               args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(i),
                expanded.begin(), expanded.end());
    break;
  }
  return args;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Goldenshluger-Lepski bandwidth selection and the "
               "minimal-penalty experiments"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);
  // repeated flags keep the last value, so the command line overrides --config
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  int density_id = 1;
  std::string kernel_str = "gaussian";
  long n = 5000;
  int replicates = 50;
  std::string a_grid = "0.1:3.0:0.1";
  double a_single = 1.0;
  std::string b_choice = "a";
  std::string bandwidths = "sim";
  std::uint64_t seed = 1;
  std::string out_path;
  std::string format = "csv";
  int threads = 1;
  bool dump_criterion = false;

  const auto add_common = [&](CLI::App* cmd, bool with_replicates) {
    cmd->add_option("--density", density_id, "test density id (1..6)")
        ->check(CLI::Range(1, 6));
    cmd->add_option("--kernel", kernel_str, "gaussian|rectangular|epanechnikov|biweight");
    cmd->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
    if (with_replicates)
      cmd->add_option("--replicates", replicates, "number of replicates")
          ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "base seed");
    cmd->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "replicated selection experiment");
  add_common(run, true);
  run->add_option("--a-grid", a_grid, "penalty sweep min:max:step");
  run->add_option("--b", b_choice, "b rule: a | <value> | calibrate");
  run->add_option("--bandwidths", bandwidths, "sim | theorem | <file>");
  run->add_option("--out", out_path, "output file")->required();
  run->add_option("--format", format, "csv | json")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* sel = app.add_subcommand("select", "single-sample selection");
  add_common(sel, false);
  sel->add_option("--a", a_single, "comparison penalty parameter a");
  double b_single = -1.0;
  sel->add_option("--b", b_single, "additive penalty parameter b (default: a)");
  sel->add_option("--bandwidths", bandwidths, "sim | theorem | <file>");
  sel->add_flag("--dump-criterion", dump_criterion,
                "emit the full per-bandwidth table as JSON");
  sel->add_option("--out", out_path, "write the JSON here instead of stdout");

  CLI::App* thm = app.add_subcommand("theorem", "collapse-frequency desk check");
  add_common(thm, true);
  thm->add_option("--a", a_single, "penalty parameter a");
  thm->add_option("--out", out_path, "optional JSON output path");

  CLI::App* cal = app.add_subcommand("calibrate", "data-driven (a, b) choice");
  add_common(cal, false);
  cal->add_option("--a-grid", a_grid, "penalty sweep min:max:step");
  cal->add_option("--bandwidths", bandwidths, "sim | theorem | <file>");
  cal->add_option("--out", out_path, "write the penalty path CSV here");

  CLI::App* chk = app.add_subcommand("check-kernels",
                                     "verify the kernel assumptions numerically");
  std::string chk_kernel = "all";
  double e_h = 2.718281828459045;
  double x_max = 100.0;
  std::vector<double> mus = {0.1, 0.5, 0.9};
  double theta1 = 2.718281828459045, theta2 = 3.0;
  chk->add_option("--kernel", chk_kernel, "kernel name or 'all'");
  chk->add_option("--e-h", e_h, "grid ratio lower bound E_H");
  chk->add_option("--x-max", x_max, "upper end of the checked range");
  chk->add_option("--mu", mus, "mu values in (0,1)");
  chk->add_option("--theta1", theta1, "theta condition: smaller point");
  chk->add_option("--theta2", theta2, "theta condition: larger point");
  chk->add_option("--out", out_path, "write the JSON report here");

  app.footer("Any subcommand accepts --config FILE, a flat key=value file\n"
             "mirroring the flags; explicit flags override the file.");

  try {
    const std::vector<std::string> args = expand_config(argc, argv);
    std::vector<const char*> argv2;
    argv2.push_back(argv[0]);
    for (const auto& a : args) argv2.push_back(a.c_str());
    app.parse(static_cast<int>(argv2.size()), argv2.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const Kernel kernel = kernel_from_name(kernel_str);

    if (run->parsed()) {
      ExperimentConfig cfg;
      cfg.density_id = density_id;
      cfg.kernel = kernel;
      cfg.n = n;
      cfg.replicates = replicates;
      cfg.a_values = parse_a_grid(a_grid);
      apply_b_choice(cfg, b_choice);
      apply_bandwidth_choice(cfg, bandwidths);
      cfg.base_seed = seed;
      cfg.out_path = out_path;
      cfg.format = format == "json" ? OutputFormat::json : OutputFormat::csv;
      cfg.threads = threads;
      const auto records = run_replicates(cfg);
      emit(records, cfg);
      std::cerr << "wrote " << records.size() << " records to " << cfg.out_path
                << "\n";
      return 0;
    }

    if (sel->parsed()) {
      ExperimentConfig cfg;
      cfg.n = n;
      apply_bandwidth_choice(cfg, bandwidths);
      const BandwidthGrid grid = cfg.make_grid();
      const TestDensity density = make_density(density_id);
      const Sample s = density.draw(n, seed);
      const double b = b_single >= 0.0 ? b_single : a_single;
      const DistanceCache cache(s, grid, kernel, threads);
      const SelectionResult res = select_two(cache, a_single, b);
      if (dump_criterion) {
        write_or_print(res.to_json().dump(2) + "\n", out_path);
      } else {
        std::cout << "selected_h " << res.selected_h << "\n";
      }
      return 0;
    }

    if (thm->parsed()) {
      const double freq = theorem_check(density_id, kernel, n, replicates,
                                        a_single, seed, threads);
      const auto grid = BandwidthGrid::theorem_set(n);
      std::cout << "collapse_frequency " << freq << " (h_min " << grid.h_min()
                << ", threshold " << 3.0 * grid.h_min() << ")\n";
      if (!out_path.empty()) {
        nlohmann::json j;
        j["density_id"] = density_id;
        j["kernel"] = kernel_name(kernel);
        j["n"] = n;
        j["replicates"] = replicates;
        j["a"] = a_single;
        j["seed"] = seed;
        j["collapse_frequency"] = freq;
        write_or_print(j.dump(2) + "\n", out_path);
      }
      return 0;
    }

    if (cal->parsed()) {
      ExperimentConfig cfg;
      cfg.n = n;
      apply_bandwidth_choice(cfg, bandwidths);
      const BandwidthGrid grid = cfg.make_grid();
      const TestDensity density = make_density(density_id);
      const Sample s = density.draw(n, seed);
      const std::vector<double> a_values = parse_a_grid(a_grid);
      const DistanceCache cache(s, grid, kernel, threads);
      const Eigen::ArrayXd losses = loss_table(cache, s, density);
      const PenaltyPath path = bandwidth_path(cache, a_values, losses);
      const CalibrationResult res = calibrate(cache, a_values);
      std::cout << "a_hat " << res.a_hat << "\nb " << res.b << "\nselected_h "
                << res.result.selected_h
                << (res.no_jump ? "\n(no jump detected)" : "") << "\n";
      if (!out_path.empty()) write_or_print(path.to_csv(), out_path);
      return 0;
    }

    if (chk->parsed()) {
      nlohmann::json reports = nlohmann::json::array();
      bool all = true;
      for (Kernel k : all_kernels) {
        if (chk_kernel != "all" && kernel_from_name(chk_kernel) != k) continue;
        const auto rep =
            check_assumptions(k, e_h, mus, x_max, std::pair{theta1, theta2});
        all = all && rep.all_pass();
        reports.push_back(rep.to_json());
      }
      write_or_print(reports.dump(2) + "\n", out_path);
      return all ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
