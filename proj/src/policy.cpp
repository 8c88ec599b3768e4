#include "gelato/policy.hpp"

#include <charconv>
#include <stdexcept>
#include <vector>

#include "gelato/compute_model.hpp"
#include "gelato/early_exit.hpp"

namespace gelato {

namespace {

std::vector<std::string_view> split_colon(std::string_view s) {
  std::vector<std::string_view> parts;
  while (true) {
    const auto c = s.find(':');
    parts.push_back(s.substr(0, c));
    if (c == std::string_view::npos) break;
    s.remove_prefix(c + 1);
  }
  return parts;
}

template <typename T>
T parse_param(std::string_view spec, std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::invalid_argument("bad policy parameter in '" + std::string(spec) + "'");
  }
  return v;
}

// Common tail of every step: compute, uplink, verification, optional
// downlink.
StepOutcome settle(StepContext& ctx, int budget, std::span<const DraftToken> tokens,
                   double uplink_bits, double downlink_bits, double rx_power) {
  const SimConfig& cfg = ctx.config;
  StepOutcome out;
  out.step = ctx.step;
  out.budget = budget;
  out.sent = static_cast<int>(tokens.size());
  out.gain = ctx.link.gain;
  out.rate = ctx.link.rate;
  out.context = ctx.state.context;

  out.draft_latency = draft_latency(ctx.costs.slm, ctx.state.context, out.sent);
  out.draft_energy = draft_energy(ctx.costs.slm, out.draft_latency);

  out.uplink_bits = uplink_bits;
  const LinkCost up = link_cost(uplink_bits, ctx.link.rate, ctx.costs.tx_power);
  out.uplink_latency = up.latency;
  out.uplink_energy = up.energy;

  out.downlink_bits = downlink_bits;
  if (downlink_bits > 0) {
    const LinkCost down = link_cost(downlink_bits, ctx.link.rate, rx_power);
    out.downlink_latency = down.latency;
    out.downlink_energy = down.energy;
  }

  out.verify_latency = ctx.costs.verifier.verify_latency;
  const VerifyResult v = verify(tokens, cfg.accept_coeff);
  out.accepted = v.accepted_prefix;
  out.hits = v.total_appended;

  out.latency = out.draft_latency + out.uplink_latency + out.verify_latency +
                out.downlink_latency;
  out.energy = out.draft_energy + out.uplink_energy + out.downlink_energy;
  out.surrogate_energy = evaluate_surrogate(budget, decision_state(ctx), ctx.costs).energy;
  return out;
}

double compressed_bits(std::span<const DraftToken> tokens, const PayloadSpec& spec) {
  std::vector<int> sizes;
  sizes.reserve(tokens.size());
  for (const auto& t : tokens) sizes.push_back(t.topp_size);
  return payload_bits(sizes, spec);
}

}  // namespace

Policy parse_policy(std::string_view spec, const SimConfig& cfg) {
  const auto parts = split_colon(spec);
  const auto kind = parts.front();
  if (kind == "gelato" && parts.size() == 1) return {"gelato", GelatoPolicy{true}};
  if (kind == "gelato_noexit" && parts.size() == 1) {
    return {"gelato_noexit", GelatoPolicy{false}};
  }
  if (kind == "static_sd" && parts.size() <= 3) {
    StaticSdPolicy p{cfg.static_gamma, cfg.static_cp};
    if (parts.size() >= 2) p.gamma = parse_param<int>(spec, parts[1]);
    if (parts.size() >= 3) p.coverage = parse_param<double>(spec, parts[2]);
    if (p.gamma < 1 || p.gamma > cfg.scheduler.gamma0) {
      throw std::invalid_argument("static_sd gamma must lie in [1, gamma0]");
    }
    if (!(p.coverage > 0)) throw std::invalid_argument("static_sd cp must be > 0");
    std::string name = "static_sd:" + std::to_string(p.gamma);
    if (p.coverage != 1.0) {
      char buf[32];
      auto r = std::to_chars(buf, buf + sizeof buf, p.coverage);
      name += ":" + std::string(buf, r.ptr);
    }
    return {name, p};
  }
  if (kind == "dssd" && parts.size() <= 2) {
    DssdPolicy p{cfg.dssd_gamma_max, cfg.dssd_rx_power_w()};
    if (parts.size() == 2) p.gamma_max = parse_param<int>(spec, parts[1]);
    if (p.gamma_max < 1) throw std::invalid_argument("dssd gamma_max must be >= 1");
    return {"dssd:" + std::to_string(p.gamma_max), p};
  }
  throw std::invalid_argument("unknown policy '" + std::string(spec) + "'");
}

Policy configured_policy(const SimConfig& cfg) {
  return parse_policy(cfg.policy_kind, cfg);
}

DecisionState decision_state(const StepContext& ctx) {
  DecisionState s;
  s.queue = ctx.state.queue.backlog;
  s.rate = ctx.link.rate;
  s.context = ctx.state.context;
  s.payload_per_token = ctx.state.payload_estimate;
  s.rho = ctx.config.online_rho ? ctx.state.rho_estimate : ctx.config.scheduler.rho0;
  return s;
}

std::optional<StepOutcome> fixed_draft_step(StepContext& ctx, int length,
                                            double coverage) {
  if (length < 1) throw std::invalid_argument("draft length must be >= 1");
  std::vector<DraftToken> tokens;
  tokens.reserve(static_cast<std::size_t>(length));
  for (int i = 1; i <= length; ++i) {
    auto t = ctx.tokens.draw(ctx.step, static_cast<std::uint32_t>(i), coverage);
    if (!t) return std::nullopt;
    tokens.push_back(*t);
  }
  return settle(ctx, length, tokens, compressed_bits(tokens, ctx.config.payload), 0, 0);
}

std::optional<StepOutcome> gelato_step(const GelatoPolicy& policy, StepContext& ctx) {
  SchedulerParams params = ctx.config.scheduler;
  const int budget = choose_budget(decision_state(ctx), ctx.costs, params);
  const UncertaintyBucket bucket{0.0, ctx.config.entropy_threshold,
                                 ctx.config.backlog_cap};
  const bool early_exit = policy.early_exit && ctx.config.early_exit;
  DraftOutcome draft = drafting_loop(
      budget,
      [&](int i) { return ctx.tokens.draw(ctx.step, static_cast<std::uint32_t>(i)); },
      bucket, early_exit);
  if (draft.exhausted) return std::nullopt;
  return settle(ctx, budget, draft.tokens, compressed_bits(draft.tokens, ctx.config.payload),
                0, 0);
}

std::optional<StepOutcome> static_sd_step(const StaticSdPolicy& policy,
                                          StepContext& ctx) {
  return fixed_draft_step(ctx, policy.gamma, policy.coverage);
}

std::optional<StepOutcome> dssd_step(const DssdPolicy& policy, StepContext& ctx) {
  std::vector<DraftToken> tokens;
  tokens.reserve(static_cast<std::size_t>(policy.gamma_max));
  for (int i = 1; i <= policy.gamma_max; ++i) {
    auto t = ctx.tokens.draw(ctx.step, static_cast<std::uint32_t>(i));
    if (!t) return std::nullopt;
    tokens.push_back(*t);
  }
  const PayloadSpec& spec = ctx.config.payload;
  const double uplink = static_cast<double>(policy.gamma_max) * spec.bits_index;
  const VerifyResult v = verify(tokens, ctx.config.accept_coeff);
  double downlink = 0;
  if (v.accepted_prefix < policy.gamma_max) {
    // The first rejected position is resampled from one compressed
    // distribution sent back to the device.
    const auto& rejected = tokens[static_cast<std::size_t>(v.accepted_prefix)];
    downlink = static_cast<double>(rejected.topp_size) * spec.bits_per_entry();
  }
  return settle(ctx, policy.gamma_max, tokens, uplink, downlink, policy.rx_power_w);
}

std::optional<StepOutcome> policy_step(const Policy& policy, StepContext& ctx) {
  return std::visit(
      [&](const auto& p) -> std::optional<StepOutcome> {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, GelatoPolicy>) {
          return gelato_step(p, ctx);
        } else if constexpr (std::is_same_v<P, StaticSdPolicy>) {
          return static_sd_step(p, ctx);
        } else {
          return dssd_step(p, ctx);
        }
      },
      policy.kind);
}

}  // namespace gelato
