#include "gelato/oracle.hpp"

#include <cmath>

namespace gelato {

OracleResult offline_oracle(const SimConfig& config, std::uint64_t seed, int horizon,
                            int gamma0) {
  if (horizon < 1 || gamma0 < 1) {
    throw std::invalid_argument("oracle horizon and gamma0 must be >= 1");
  }
  const double space = std::pow(static_cast<double>(gamma0), horizon);
  if (space > kOracleSearchLimit) {
    throw OracleRefused("oracle search space " + std::to_string(gamma0) + "^" +
                        std::to_string(horizon) + " = " +
                        std::to_string(static_cast<long long>(space)) +
                        " exceeds the limit of " +
                        std::to_string(static_cast<long long>(kOracleSearchLimit)) +
                        " sequences");
  }

  OracleResult best;
  best.seed = seed;
  best.horizon = horizon;
  best.gamma0 = gamma0;
  bool have = false;
  const double budget = config.energy_budget_j;

  std::vector<int> seq(static_cast<std::size_t>(horizon), 1);
  while (true) {
    const auto steps = replay_lengths(config, seed, seq);
    ++best.candidates;
    if (steps.size() == seq.size()) {
      double thr = 0, energy = 0;
      for (const auto& s : steps) {
        thr += s.throughput();
        energy += s.energy;
      }
      const double violation = std::max(0.0, energy / horizon - budget);
      const bool feasible = violation == 0;
      bool better = !have;
      if (have) {
        if (feasible != best.feasible) {
          better = feasible;
        } else if (feasible) {
          better = thr > best.throughput_sum;
        } else {
          better = violation < best.violation ||
                   (violation == best.violation && thr > best.throughput_sum);
        }
      }
      if (better) {
        have = true;
        best.sequence = seq;
        best.throughput_sum = thr;
        best.energy_sum = energy;
        best.feasible = feasible;
        best.violation = violation;
      }
    }
    // Odometer increment over {1..gamma0}^horizon.
    std::size_t pos = 0;
    while (pos < seq.size() && seq[pos] == gamma0) seq[pos++] = 1;
    if (pos == seq.size()) break;
    ++seq[pos];
  }
  if (!have) throw std::runtime_error("oracle: token source exhausted for every sequence");
  return best;
}

BoundReport energy_bound_check(const RunRecord& record) {
  BoundReport r;
  r.steps = static_cast<int>(record.steps.size());
  r.v = record.config.scheduler.v;
  r.energy_budget = record.config.energy_budget_j;
  double max_dev = 0;
  for (const auto& s : record.steps) {
    max_dev = std::max(max_dev, std::fabs(s.energy - r.energy_budget));
    r.delta0 = std::max(r.delta0, std::fabs(s.surrogate_energy - s.energy));
    r.energy_sum += s.energy;
    r.gelato_throughput_sum += s.throughput();
  }
  r.theta0 = 0.5 * max_dev * max_dev;
  const double k = r.steps;
  r.energy_bound =
      k * r.energy_budget +
      std::sqrt(2.0 * r.theta0 * k * k + 2.0 * k * (k - 1.0) * r.delta0 * r.theta0);
  r.energy_slack = r.energy_bound - r.energy_sum;
  return r;
}

BoundReport theorem_check(const RunRecord& record, const OracleResult& oracle) {
  if (record.seed != oracle.seed) {
    throw std::invalid_argument("theorem_check: run and oracle use different seeds");
  }
  if (static_cast<int>(record.steps.size()) != oracle.horizon) {
    throw std::invalid_argument("theorem_check: run and oracle horizons differ");
  }
  BoundReport r = energy_bound_check(record);
  r.has_oracle = true;
  r.oracle_throughput_sum = oracle.throughput_sum;
  const double k = r.steps;
  const double gap =
      r.theta0 * r.theta0 * k * k + k * (k - 1.0) * r.delta0 * r.theta0;
  r.throughput_bound = oracle.throughput_sum - gap / (2.0 * r.v);
  r.throughput_slack = r.gelato_throughput_sum - r.throughput_bound;
  r.throughput_bound_v = oracle.throughput_sum - gap / r.v;
  r.throughput_slack_v = r.gelato_throughput_sum - r.throughput_bound_v;
  return r;
}

}  // namespace gelato
