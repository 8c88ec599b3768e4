#pragma once

#include "gelato/compute_model.hpp"

namespace gelato {

/// Lyapunov virtual queue for the long-term energy budget. Backlog is in
/// joules of accumulated overspend.
struct VirtualQueue {
  double backlog = 0;
  double budget = 1.2;  // J per step
};

struct SchedulerParams {
  double v = 100;          // throughput weight
  int gamma0 = 15;         // largest admissible draft budget
  double rho0 = 0.9;       // nominal per-token acceptance
  double ewma_factor = 0.9;
};

/// Everything the per-step budget decision looks at.
struct DecisionState {
  double queue = 0;              // Q_k
  double rate = 0;               // uplink bits/s for the current gain
  double context = 0;            // L_k
  double payload_per_token = 0;  // expected uplink bits per drafted token
  double rho = 0.9;              // acceptance used by the surrogate
};

/// Device/edge quantities needed to price a candidate budget.
struct CostModel {
  SlmProfile slm;
  VerifierProfile verifier;
  double tx_power = 0.19952623;  // W
};

/// Expected appended tokens for a draft of length gamma with i.i.d.
/// acceptance rho: (1 - rho^(gamma+1)) / (1 - rho). Throws for rho >= 1.
double expected_hits(int gamma, double rho);

/// Deterministic surrogate of one step at budget gamma.
struct Surrogate {
  double hits = 0;
  double latency = 0;
  double energy = 0;
  double throughput = 0;  // hits / latency
};

Surrogate evaluate_surrogate(int gamma, const DecisionState& state,
                             const CostModel& costs);

/// V * throughput - Q * energy, both from the surrogate.
double utility(int gamma, const DecisionState& state, const CostModel& costs,
               const SchedulerParams& params);

/// Exhaustive search over {1..gamma0}; ties resolve to the smaller budget.
int choose_budget(const DecisionState& state, const CostModel& costs,
                  const SchedulerParams& params);

/// max(0, Q + E - budget) using the realized step energy.
VirtualQueue update_queue(VirtualQueue q, double realized_energy);

/// EWMA of observed uplink bits per drafted token.
double update_payload_estimate(double estimate, double observed,
                               double ewma_factor);

}  // namespace gelato
