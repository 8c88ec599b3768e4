#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "gelato/channel.hpp"
#include "gelato/config.hpp"
#include "gelato/generation.hpp"
#include "gelato/scheduler.hpp"

namespace gelato {

/// Dual-loop controller: Lyapunov budget, then entropy early exit.
struct GelatoPolicy {
  bool early_exit = true;
};

/// Fixed draft length with top-p compressed uplink.
struct StaticSdPolicy {
  int gamma = 5;
  double coverage = 1.0;  // multiplies the top-p set size
};

/// Index-only uplink; on a mismatch one compressed distribution comes back
/// over the downlink.
struct DssdPolicy {
  int gamma_max = 7;
  double rx_power_w = 0.0794328;
};

struct Policy {
  std::string name;
  std::variant<GelatoPolicy, StaticSdPolicy, DssdPolicy> kind;
};

/// Accepted names: gelato, gelato_noexit, static_sd[:gamma[:cp]],
/// dssd[:gamma_max]. Missing parameters come from the policy.* keys.
Policy parse_policy(std::string_view spec, const SimConfig& cfg);

/// The policy selected by policy.kind.
Policy configured_policy(const SimConfig& cfg);

/// One speculation round. Component costs are kept so the totals can be
/// audited: energy == draft_energy + uplink_energy + downlink_energy and
/// latency == draft_latency + uplink_latency + verify_latency +
/// downlink_latency.
struct StepOutcome {
  std::uint64_t step = 0;
  int budget = 0;    // gamma~*: draft budget of the step
  int sent = 0;      // gamma*: tokens transmitted
  int accepted = 0;  // accepted draft prefix
  int hits = 0;      // N_k = accepted + bonus
  double latency = 0;
  double energy = 0;
  double uplink_bits = 0;
  double downlink_bits = 0;
  double queue_after = 0;  // Q_{k+1}
  double gain = 0;
  double rate = 0;
  double context = 0;  // L_k

  double draft_latency = 0;
  double uplink_latency = 0;
  double verify_latency = 0;
  double downlink_latency = 0;
  double draft_energy = 0;
  double uplink_energy = 0;
  double downlink_energy = 0;
  double surrogate_energy = 0;  // scheduler's energy estimate at `budget`

  double throughput() const { return hits / latency; }
};

/// Mutable state carried across steps of one run.
struct RunState {
  VirtualQueue queue;
  double payload_estimate = 0;  // bits per drafted token
  double rho_estimate = 0.9;
  double context = 0;
};

/// Inputs of one step. References are owned by the run.
struct StepContext {
  const SimConfig& config;
  const CostModel& costs;
  std::uint64_t step;
  ChannelSample link;
  RunState& state;
  TokenSource& tokens;
};

/// Scheduler view of the step (queue, rate, context, payload estimate).
DecisionState decision_state(const StepContext& ctx);

/// Drafts exactly `length` tokens (no early exit) with compressed uplink and
/// settles the step. Returns std::nullopt if the token source runs dry.
std::optional<StepOutcome> fixed_draft_step(StepContext& ctx, int length,
                                            double coverage = 1.0);

std::optional<StepOutcome> gelato_step(const GelatoPolicy& policy, StepContext& ctx);
std::optional<StepOutcome> static_sd_step(const StaticSdPolicy& policy,
                                          StepContext& ctx);
std::optional<StepOutcome> dssd_step(const DssdPolicy& policy, StepContext& ctx);
std::optional<StepOutcome> policy_step(const Policy& policy, StepContext& ctx);

}  // namespace gelato
