#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gelato/config.hpp"
#include "gelato/policy.hpp"

namespace gelato {

/// Replayable log of one run.
struct RunRecord {
  SimConfig config;
  Policy policy;
  std::uint64_t seed = 0;
  std::vector<StepOutcome> steps;
  std::vector<double> context;  // L_1 .. L_{K+1}
  bool partial = false;         // trace exhausted before K steps
};

/// Runs `config.steps` decision steps of `policy`. Deterministic in
/// (config, policy, seed).
RunRecord run(const SimConfig& config, const Policy& policy, std::uint64_t seed);

/// Replays a fixed sequence of draft lengths (no scheduler, no early exit)
/// on the same random draws a run with `seed` would see. Stops early if a
/// trace runs out.
std::vector<StepOutcome> replay_lengths(const SimConfig& config, std::uint64_t seed,
                                        std::span<const int> lengths);

struct Metrics {
  std::size_t steps = 0;
  double avg_throughput = 0;  // mean of N_k / T_k, tokens/s
  double avg_energy = 0;      // J per step
  double avg_budget = 0;
  double avg_sent = 0;
  double acceptance_rate = 0;  // accepted / transmitted draft tokens
  double mean_queue = 0;
  double max_queue = 0;
  double final_queue = 0;
};

Metrics compute_metrics(const RunRecord& record);

struct MetricStat {
  double mean = 0;
  double ci = 0;  // 95% normal-approximation half width
};

struct AggregateMetrics {
  std::size_t rounds = 0;
  MetricStat throughput;
  MetricStat energy;
  MetricStat budget;
  MetricStat sent;
  MetricStat acceptance;
  MetricStat mean_queue;
  MetricStat final_queue;
};

MetricStat summarize(std::span<const double> samples);

/// Mean and CI across rounds. Throws std::invalid_argument if `records` is
/// empty or the records differ in anything but their seed.
AggregateMetrics aggregate(std::span<const RunRecord> records);
AggregateMetrics aggregate(std::span<const Metrics> metrics);

}  // namespace gelato
