#include "glkde/experiments.hpp"

#include <atomic>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "glkde/random.hpp"
#include "glkde/version.hpp"

namespace glkde {

namespace {

std::string shortest(double x) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, p);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::runtime_error("CSV: bad number '" + std::string(s) + "'");
  return v;
}

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw std::runtime_error("CSV: bad integer '" + std::string(s) + "'");
  return v;
}

constexpr std::string_view kCsvHeader =
    "density_id,kernel,n,replicate,a,b,selected_h,oracle_h,loss_selected,"
    "loss_oracle,ratio,h_gap,seed";

void parallel_for(int tasks, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || tasks < 2) {
    for (int t = 0; t < tasks; ++t) body(t);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr err;
  std::mutex err_mutex;
  const int nthreads = std::min(threads, tasks);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nthreads));
  for (int t = 0; t < nthreads; ++t)
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < tasks; i = next.fetch_add(1))
          body(i);
      } catch (...) {
        std::scoped_lock lock(err_mutex);
        if (!err) err = std::current_exception();
        next.store(tasks);
      }
    });
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

} // namespace

BandwidthGrid ExperimentConfig::make_grid() const {
  switch (bandwidth_set) {
    case BandwidthSet::simulation: return BandwidthGrid::simulation_set();
    case BandwidthSet::theorem: return BandwidthGrid::theorem_set(n);
    case BandwidthSet::explicit_list: return BandwidthGrid(explicit_bandwidths);
  }
  throw std::invalid_argument("unknown bandwidth set");
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["density_id"] = density_id;
  j["kernel"] = kernel_name(kernel);
  j["n"] = n;
  j["replicates"] = replicates;
  j["a_values"] = a_values;
  switch (b_rule) {
    case BRule::equal_to_a: j["b_rule"] = "a"; break;
    case BRule::fixed: j["b_rule"] = "fixed"; j["b_fixed"] = b_fixed; break;
    case BRule::calibrated: j["b_rule"] = "calibrate"; break;
  }
  switch (bandwidth_set) {
    case BandwidthSet::simulation: j["bandwidth_set"] = "sim"; break;
    case BandwidthSet::theorem: j["bandwidth_set"] = "theorem"; break;
    case BandwidthSet::explicit_list: j["bandwidth_set"] = "file"; break;
  }
  j["base_seed"] = base_seed;
  j["out_path"] = out_path;
  j["format"] = format == OutputFormat::csv ? "csv" : "json";
  j["threads"] = threads;
  return j;
}

std::vector<ExperimentRecord> run_replicates(const ExperimentConfig& config) {
  if (config.replicates < 1)
    throw std::invalid_argument("run_replicates: need at least one replicate");
  if (config.a_values.empty())
    throw std::invalid_argument("run_replicates: empty a sweep");

  const BandwidthGrid grid = config.make_grid();
  const TestDensity density = make_density(config.density_id);
  const std::size_t per_rep =
      config.b_rule == BRule::calibrated ? 1 : config.a_values.size();
  std::vector<ExperimentRecord> records(
      static_cast<std::size_t>(config.replicates) * per_rep);

  const auto run_one = [&](int r) {
    const std::uint64_t seed = derive_seed(config.base_seed, static_cast<std::uint64_t>(r));
    const Sample sample = density.draw(config.n, seed);
    const DistanceCache cache(sample, grid, config.kernel);
    const Eigen::ArrayXd losses = loss_table(cache, sample, density);

    Eigen::Index oracle_idx = 0;
    for (Eigen::Index i = 1; i < losses.size(); ++i)
      if (losses(i) < losses(oracle_idx)) oracle_idx = i;
    const double oracle_h = grid[oracle_idx];
    const double loss_oracle = losses(oracle_idx);

    const auto fill = [&](std::size_t slot, const SelectionResult& res) {
      ExperimentRecord& rec = records[static_cast<std::size_t>(r) * per_rep + slot];
      rec.density_id = config.density_id;
      rec.kernel = config.kernel;
      rec.n = config.n;
      rec.replicate = r;
      rec.a = res.a;
      rec.b = res.b;
      rec.selected_h = res.selected_h;
      rec.oracle_h = oracle_h;
      rec.loss_selected = losses(res.argmin_index);
      rec.loss_oracle = loss_oracle;
      rec.ratio = rec.loss_selected / rec.loss_oracle;
      rec.h_gap = rec.selected_h - oracle_h;
      rec.seed = seed;
    };

    if (config.b_rule == BRule::calibrated) {
      const CalibrationResult cal = calibrate(cache, config.a_values);
      fill(0, cal.result);
    } else {
      for (std::size_t ai = 0; ai < config.a_values.size(); ++ai) {
        const double a = config.a_values[ai];
        const double b = config.b_rule == BRule::fixed ? config.b_fixed : a;
        fill(ai, select_two(cache, a, b));
      }
    }
  };

  parallel_for(config.replicates, config.threads, run_one);
  return records;
}

double oracle_constant(std::span<const ExperimentRecord> records, double a) {
  double sum = 0.0;
  long count = 0;
  for (const auto& rec : records)
    if (rec.a == a) {
      sum += rec.ratio;
      ++count;
    }
  if (count == 0)
    throw std::invalid_argument("oracle_constant: no records at this a");
  return sum / static_cast<double>(count);
}

double theorem_check(int density_id, Kernel k, long n, int replicates,
                     double a, std::uint64_t base_seed, int threads) {
  if (replicates < 1)
    throw std::invalid_argument("theorem_check: need at least one replicate");
  const BandwidthGrid grid = BandwidthGrid::theorem_set(n);
  const TestDensity density = make_density(density_id);
  const double threshold = 3.0 * grid.h_min();

  std::vector<char> collapsed(static_cast<std::size_t>(replicates), 0);
  parallel_for(replicates, threads, [&](int r) {
    const std::uint64_t seed = derive_seed(base_seed, static_cast<std::uint64_t>(r));
    const Sample sample = density.draw(n, seed);
    const DistanceCache cache(sample, grid, k);
    const SelectionResult res = select(cache, a);
    collapsed[static_cast<std::size_t>(r)] = res.selected_h < threshold ? 1 : 0;
  });

  long count = 0;
  for (char c : collapsed) count += c;
  return static_cast<double>(count) / static_cast<double>(replicates);
}

std::string records_to_csv(std::span<const ExperimentRecord> records) {
  std::string out{kCsvHeader};
  out += '\n';
  for (const auto& r : records) {
    out += std::to_string(r.density_id);
    out += ',';
    out += kernel_name(r.kernel);
    out += ',';
    out += std::to_string(r.n);
    out += ',';
    out += std::to_string(r.replicate);
    out += ',';
    out += shortest(r.a);
    out += ',';
    out += shortest(r.b);
    out += ',';
    out += shortest(r.selected_h);
    out += ',';
    out += shortest(r.oracle_h);
    out += ',';
    out += shortest(r.loss_selected);
    out += ',';
    out += shortest(r.loss_oracle);
    out += ',';
    out += shortest(r.ratio);
    out += ',';
    out += shortest(r.h_gap);
    out += ',';
    out += std::to_string(r.seed);
    out += '\n';
  }
  return out;
}

std::vector<ExperimentRecord> records_from_csv(std::istream& in) {
  std::vector<ExperimentRecord> records;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("CSV: missing header");
  if (line != kCsvHeader)
    throw std::runtime_error("CSV: unexpected header '" + line + "'");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    std::string_view rest = line;
    while (true) {
      const std::size_t pos = rest.find(',');
      fields.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest.remove_prefix(pos + 1);
    }
    if (fields.size() != 13)
      throw std::runtime_error("CSV: expected 13 fields, got " +
                               std::to_string(fields.size()));
    ExperimentRecord r;
    r.density_id = static_cast<int>(parse_u64(fields[0]));
    r.kernel = kernel_from_name(fields[1]);
    r.n = static_cast<long>(parse_u64(fields[2]));
    r.replicate = static_cast<int>(parse_u64(fields[3]));
    r.a = parse_double(fields[4]);
    r.b = parse_double(fields[5]);
    r.selected_h = parse_double(fields[6]);
    r.oracle_h = parse_double(fields[7]);
    r.loss_selected = parse_double(fields[8]);
    r.loss_oracle = parse_double(fields[9]);
    r.ratio = parse_double(fields[10]);
    r.h_gap = parse_double(fields[11]);
    r.seed = parse_u64(fields[12]);
    records.push_back(r);
  }
  return records;
}

std::vector<ExperimentRecord> records_from_csv_string(const std::string& csv) {
  std::istringstream in(csv);
  return records_from_csv(in);
}

nlohmann::json records_to_json(std::span<const ExperimentRecord> records) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : records)
    arr.push_back({{"density_id", r.density_id},
                   {"kernel", kernel_name(r.kernel)},
                   {"n", r.n},
                   {"replicate", r.replicate},
                   {"a", r.a},
                   {"b", r.b},
                   {"selected_h", r.selected_h},
                   {"oracle_h", r.oracle_h},
                   {"loss_selected", r.loss_selected},
                   {"loss_oracle", r.loss_oracle},
                   {"ratio", r.ratio},
                   {"h_gap", r.h_gap},
                   {"seed", r.seed}});
  return arr;
}

void emit(std::span<const ExperimentRecord> records,
          const ExperimentConfig& config) {
  if (config.out_path.empty())
    throw std::invalid_argument("emit: empty output path");

  {
    std::ofstream out(config.out_path, std::ios::binary);
    if (!out) throw std::runtime_error("emit: cannot open " + config.out_path);
    if (config.format == OutputFormat::csv)
      out << records_to_csv(records);
    else
      out << records_to_json(records).dump(2) << '\n';
    if (!out) throw std::runtime_error("emit: write failed for " + config.out_path);
  }

  const BandwidthGrid grid = config.make_grid();
  nlohmann::json meta;
  meta["version"] = version;
  meta["config"] = config.to_json();
  meta["bandwidths"] = std::vector<double>(
      grid.bandwidths().data(), grid.bandwidths().data() + grid.size());
  meta["created_unix_ms"] =
      std::chrono::duration_cast<std::chrono::milliseconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count();
  const std::string meta_path = config.out_path + ".meta.json";
  std::ofstream mout(meta_path, std::ios::binary);
  if (!mout) throw std::runtime_error("emit: cannot open " + meta_path);
  mout << meta.dump(2) << '\n';
  if (!mout) throw std::runtime_error("emit: write failed for " + meta_path);
}

} // namespace glkde
