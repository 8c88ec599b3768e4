#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gelato/config.hpp"
#include "gelato/oracle.hpp"
#include "gelato/policy.hpp"
#include "gelato/simulator.hpp"

namespace gelato {

/// Worker threads for Monte-Carlo rounds: $GELATO_WORKERS if set, otherwise
/// the hardware concurrency.
unsigned worker_count();

/// Runs fn(0..n-1) on up to `workers` threads. Each index runs exactly once;
/// the first exception is rethrown after all workers join.
void parallel_for(std::size_t n, unsigned workers,
                  const std::function<void(std::size_t)>& fn);

/// Seed of Monte-Carlo round `round` under master seed `master`.
std::uint64_t round_seed(std::uint64_t master, std::size_t round);

struct RoundResult {
  std::size_t round = 0;
  std::uint64_t seed = 0;
  Metrics metrics;
  bool partial = false;
};

struct RunSummary {
  Policy policy;
  std::vector<RoundResult> rounds;
  AggregateMetrics aggregate;
};

/// `config.rounds` independent runs. With a non-empty `out_dir`, writes
/// run_NNNN.csv per round plus summary.csv and summary.json (exactly
/// rounds + 2 files).
RunSummary run_rounds(const SimConfig& config, const Policy& policy,
                      const std::filesystem::path& out_dir = {});

struct SweepRow {
  double axis_value = 0;
  std::string policy;
  AggregateMetrics aggregate;
};

/// Every (axis value, policy) pair as a run_rounds call in its own
/// subdirectory of `out_dir`, plus sweep.csv. All points share the master
/// seed, so policies and axis values are compared on paired draws.
std::vector<SweepRow> run_sweep(const SimConfig& config, const std::string& axis,
                                const std::vector<double>& values,
                                const std::vector<std::string>& policies,
                                const std::filesystem::path& out_dir);

struct VerifyInstance {
  std::uint64_t seed = 0;
  OracleResult oracle;
  std::vector<int> gelato_budgets;
  std::vector<int> gelato_sent;
  BoundReport report;
};

/// `instances` small runs of GELATO, each checked against the exhaustive
/// oracle on the same draws. Uses verify.steps / verify.gamma0. Throws
/// OracleRefused if the search space is too large.
std::vector<VerifyInstance> run_verify(const SimConfig& config, int instances);

struct CalibrationBin {
  double lo = 0;
  double hi = 0;
  long long samples = 0;
  long long accepted = 0;
};

/// Bins `samples` draws of the entropy model by entropy (width `bin_width`)
/// and counts acceptances.
std::vector<CalibrationBin> calibrate(const SimConfig& config, long long samples,
                                      double bin_width = 0.1);

void write_calibration_csv(const std::vector<CalibrationBin>& bins, double accept_coeff,
                           const std::filesystem::path& path);

}  // namespace gelato
