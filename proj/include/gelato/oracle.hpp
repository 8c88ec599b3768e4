#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gelato/config.hpp"
#include "gelato/simulator.hpp"

namespace gelato {

/// Largest number of candidate sequences the offline oracle will enumerate.
inline constexpr double kOracleSearchLimit = 20000;

class OracleRefused : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct OracleResult {
  std::uint64_t seed = 0;
  int horizon = 0;
  int gamma0 = 0;
  std::vector<int> sequence;   // best draft lengths, one per step
  double throughput_sum = 0;   // sum of N_k / T_k
  double energy_sum = 0;
  bool feasible = false;       // average energy within budget
  double violation = 0;        // max(0, avg energy - budget)
  std::size_t candidates = 0;
};

/// Enumerates every length sequence in {1..gamma0}^horizon on the draws of
/// `seed` and keeps the best one under the average-energy budget. With no
/// feasible sequence, returns the least-violating one (ties by throughput)
/// and sets feasible = false. Throws OracleRefused when gamma0^horizon
/// exceeds kOracleSearchLimit.
OracleResult offline_oracle(const SimConfig& config, std::uint64_t seed, int horizon,
                            int gamma0);

/// Slack of both cumulative bounds, with theta0 and delta0 taken from the
/// logged run. Positive slack means the bound holds.
struct BoundReport {
  int steps = 0;
  double v = 0;
  double energy_budget = 0;
  double theta0 = 0;  // 0.5 * (max_k |E_k - budget|)^2
  double delta0 = 0;  // max_k |surrogate E_k - E_k|

  double gelato_throughput_sum = 0;
  double oracle_throughput_sum = 0;
  // Throughput gap term divided by 2V, as stated in the theorem ...
  double throughput_bound = 0;
  double throughput_slack = 0;
  // ... and divided by V, as the proof's final step produces.
  double throughput_bound_v = 0;
  double throughput_slack_v = 0;

  double energy_sum = 0;
  double energy_bound = 0;
  double energy_slack = 0;

  bool has_oracle = false;
  bool throughput_holds() const { return !has_oracle || throughput_slack >= 0; }
  bool energy_holds() const { return energy_slack >= 0; }
  bool holds() const { return throughput_holds() && energy_holds(); }
};

/// Energy bound only (no oracle needed).
BoundReport energy_bound_check(const RunRecord& record);

/// Both bounds. Throws std::invalid_argument if the record and oracle were
/// produced from different seeds or horizons.
BoundReport theorem_check(const RunRecord& record, const OracleResult& oracle);

}  // namespace gelato
