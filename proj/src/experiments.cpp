#include "gelato/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gelato/run_log.hpp"

namespace gelato {

namespace fs = std::filesystem;

unsigned worker_count() {
  if (const char* env = std::getenv("GELATO_WORKERS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& fn) {
  workers = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t round_seed(std::uint64_t master, std::size_t round) {
  return derive_seed(master, round);
}

namespace {

std::string run_file_name(std::size_t round) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%04zu.csv", round);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string sanitize(std::string s) {
  for (char& c : s) {
    if (c == ':' || c == '/' || c == ' ') c = '-';
  }
  return s;
}

}  // namespace

RunSummary run_rounds(const SimConfig& config, const Policy& policy,
                      const fs::path& out_dir) {
  const auto n = static_cast<std::size_t>(config.rounds);
  RunSummary summary{policy, std::vector<RoundResult>(n), {}};
  std::vector<nlohmann::json> sidecars(n);
  if (!out_dir.empty()) fs::create_directories(out_dir);

  parallel_for(n, worker_count(), [&](std::size_t i) {
    const std::uint64_t seed = round_seed(config.seed, i);
    const RunRecord rec = run(config, policy, seed);
    summary.rounds[i] = {i, seed, compute_metrics(rec), rec.partial};
    if (!out_dir.empty()) {
      write_run_csv(rec, out_dir / run_file_name(i));
      sidecars[i] = run_sidecar(rec);
      sidecars[i].erase("config");
      sidecars[i]["file"] = run_file_name(i);
    }
  });

  std::vector<Metrics> metrics;
  metrics.reserve(n);
  for (const auto& r : summary.rounds) metrics.push_back(r.metrics);
  summary.aggregate = aggregate(std::span<const Metrics>(metrics));

  if (!out_dir.empty()) {
    std::string csv = std::string(kSummaryCsvHeader) + "\n";
    for (const auto& r : summary.rounds) {
      const auto& m = r.metrics;
      csv += std::to_string(r.round) + "," + std::to_string(r.seed) + "," +
             std::to_string(m.steps) + "," + (r.partial ? "1" : "0") + "," +
             format_double(m.avg_throughput) + "," + format_double(m.avg_energy) + "," +
             format_double(m.avg_budget) + "," + format_double(m.avg_sent) + "," +
             format_double(m.acceptance_rate) + "," + format_double(m.mean_queue) + "," +
             format_double(m.final_queue) + "\n";
    }
    write_text(out_dir / "summary.csv", csv);

    nlohmann::json j = {
        {"format_version", kFormatVersion},
        {"policy", policy.name},
        {"master_seed", config.seed},
        {"config", config.snapshot()},
        {"runs", sidecars},
        {"metrics", to_json(summary.aggregate)},
    };
    write_text(out_dir / "summary.json", j.dump(2) + "\n");
  }
  return summary;
}

std::vector<SweepRow> run_sweep(const SimConfig& config, const std::string& axis,
                                const std::vector<double>& values,
                                const std::vector<std::string>& policies,
                                const fs::path& out_dir) {
  if (values.empty()) throw ConfigError("sweep needs at least one axis value", {"sweep.values"});
  if (policies.empty()) {
    throw ConfigError("sweep needs at least one policy", {"sweep.policies"});
  }
  config.numeric(axis);  // rejects unknown or non-numeric axes

  std::vector<SweepRow> rows;
  fs::create_directories(out_dir);
  for (double value : values) {
    SimConfig point = config;
    point.set(axis, format_double(value));
    point.finalize();
    for (const auto& name : policies) {
      const Policy policy = parse_policy(name, point);
      const fs::path dir =
          out_dir / sanitize(axis + "=" + format_double(value) + "__" + policy.name);
      const RunSummary s = run_rounds(point, policy, dir);
      rows.push_back({value, policy.name, s.aggregate});
    }
  }

  std::string csv = std::string(kSweepCsvHeader) + "\n";
  for (const auto& r : rows) {
    csv += format_double(r.axis_value) + "," + r.policy + "," +
           format_double(r.aggregate.throughput.mean) + "," +
           format_double(r.aggregate.throughput.ci) + "," +
           format_double(r.aggregate.energy.mean) + "," +
           format_double(r.aggregate.energy.ci) + "\n";
  }
  write_text(out_dir / "sweep.csv", csv);
  return rows;
}

std::vector<VerifyInstance> run_verify(const SimConfig& config, int instances) {
  SimConfig small = config;
  small.steps = config.verify_steps;
  small.scheduler.gamma0 = config.verify_gamma0;
  small.static_gamma = std::min(small.static_gamma, small.scheduler.gamma0);
  small.finalize();

  const double space = std::pow(static_cast<double>(small.scheduler.gamma0), small.steps);
  if (space > kOracleSearchLimit) {
    throw OracleRefused("verify: gamma0^K = " + std::to_string(small.scheduler.gamma0) +
                        "^" + std::to_string(small.steps) +
                        " exceeds the oracle limit of " +
                        std::to_string(static_cast<long long>(kOracleSearchLimit)));
  }

  const Policy gelato = parse_policy("gelato", small);
  std::vector<VerifyInstance> out(static_cast<std::size_t>(instances));
  parallel_for(out.size(), worker_count(), [&](std::size_t i) {
    VerifyInstance& inst = out[i];
    inst.seed = round_seed(config.seed, i);
    const RunRecord rec = run(small, gelato, inst.seed);
    inst.oracle = offline_oracle(small, inst.seed, small.steps, small.scheduler.gamma0);
    for (const auto& s : rec.steps) {
      inst.gelato_budgets.push_back(s.budget);
      inst.gelato_sent.push_back(s.sent);
    }
    inst.report = theorem_check(rec, inst.oracle);
  });
  return out;
}

std::vector<CalibrationBin> calibrate(const SimConfig& config, long long samples,
                                      double bin_width) {
  if (samples < 1) throw std::invalid_argument("calibration needs samples >= 1");
  if (!(bin_width > 0)) throw std::invalid_argument("bin width must be > 0");
  // Dividing by an integral bins-per-nat keeps edges like 0.3 exact.
  const double per_nat = std::round(1.0 / bin_width);
  const bool integral = std::abs(per_nat * bin_width - 1.0) < 1e-12;
  auto edge = [&](std::size_t i) {
    return integral ? static_cast<double>(i) / per_nat : static_cast<double>(i) * bin_width;
  };
  TokenSource source(config.entropy_model(), RngStreams(config.seed));
  std::vector<CalibrationBin> bins;
  for (long long n = 0; n < samples; ++n) {
    auto tok = source.draw(static_cast<std::uint64_t>(n) + 1, 1);
    if (!tok) break;
    const auto b = static_cast<std::size_t>(std::floor(tok->entropy / bin_width));
    if (b >= bins.size()) {
      const std::size_t old = bins.size();
      bins.resize(b + 1);
      for (std::size_t i = old; i < bins.size(); ++i) {
        bins[i].lo = edge(i);
        bins[i].hi = edge(i + 1);
      }
    }
    ++bins[b].samples;
    if (tok->accept_draw < phi(tok->entropy, config.accept_coeff)) ++bins[b].accepted;
  }
  std::erase_if(bins, [](const CalibrationBin& b) { return b.samples == 0; });
  return bins;
}

void write_calibration_csv(const std::vector<CalibrationBin>& bins, double accept_coeff,
                           const fs::path& path) {
  std::string csv = std::string(kCalibrationCsvHeader) + "\n";
  for (const auto& b : bins) {
    const double center = 0.5 * (b.lo + b.hi);
    csv += format_double(b.lo) + "," + format_double(b.hi) + "," + format_double(center) +
           "," + std::to_string(b.samples) + "," + std::to_string(b.accepted) + "," +
           format_double(static_cast<double>(b.accepted) / static_cast<double>(b.samples)) +
           "," + format_double(phi(center, accept_coeff)) + "\n";
  }
  write_text(path, csv);
}

}  // namespace gelato
