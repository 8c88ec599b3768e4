#include "gelato/scheduler.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gelato {

double expected_hits(int gamma, double rho) {
  if (gamma < 1) throw std::invalid_argument("gamma must be >= 1");
  if (!(rho >= 0) || !(rho < 1)) {
    throw std::invalid_argument("rho must lie in [0, 1)");
  }
  if (rho == 0) return 1.0;
  return (1.0 - std::pow(rho, gamma + 1)) / (1.0 - rho);
}

Surrogate evaluate_surrogate(int gamma, const DecisionState& s,
                             const CostModel& c) {
  if (!(s.rate > 0)) throw std::invalid_argument("uplink rate must be > 0");
  Surrogate out;
  const double t_draft = draft_latency(c.slm, s.context, gamma);
  const double t_up = gamma * s.payload_per_token / s.rate;
  out.hits = expected_hits(gamma, s.rho);
  out.latency = t_draft + t_up + c.verifier.verify_latency;
  out.energy = draft_energy(c.slm, t_draft) + c.tx_power * t_up;
  out.throughput = out.hits / out.latency;
  return out;
}

double utility(int gamma, const DecisionState& s, const CostModel& c,
               const SchedulerParams& p) {
  const Surrogate est = evaluate_surrogate(gamma, s, c);
  return p.v * est.throughput - s.queue * est.energy;
}

int choose_budget(const DecisionState& s, const CostModel& c,
                  const SchedulerParams& p) {
  int best = 1;
  double best_u = -std::numeric_limits<double>::infinity();
  for (int g = 1; g <= p.gamma0; ++g) {
    const double u = utility(g, s, c, p);
    if (u > best_u) {
      best_u = u;
      best = g;
    }
  }
  return best;
}

VirtualQueue update_queue(VirtualQueue q, double realized_energy) {
  if (realized_energy < 0) {
    throw std::invalid_argument("realized energy must be non-negative");
  }
  q.backlog = std::max(0.0, q.backlog + realized_energy - q.budget);
  return q;
}

double update_payload_estimate(double estimate, double observed,
                               double ewma_factor) {
  if (!(estimate > 0)) throw std::invalid_argument("payload estimate must be > 0");
  if (!(observed > 0)) throw std::invalid_argument("observed payload must be > 0");
  return ewma_factor * estimate + (1.0 - ewma_factor) * observed;
}

}  // namespace gelato
