#include "gelato/simulator.hpp"

#include <cmath>
#include <stdexcept>

#include "gelato/channel.hpp"

namespace gelato {

namespace {

RunState initial_state(const SimConfig& cfg) {
  RunState s;
  s.queue = VirtualQueue{0.0, cfg.energy_budget_j};
  s.payload_estimate = cfg.payload_prior_bits;
  s.rho_estimate = cfg.scheduler.rho0;
  s.context = cfg.initial_context;
  return s;
}

void advance(const SimConfig& cfg, RunState& s, StepOutcome& out) {
  s.queue = update_queue(s.queue, out.energy);
  out.queue_after = s.queue.backlog;
  if (out.sent > 0 && out.uplink_bits > 0) {
    s.payload_estimate = update_payload_estimate(
        s.payload_estimate, out.uplink_bits / out.sent, cfg.scheduler.ewma_factor);
  }
  if (cfg.online_rho && out.sent > 0) {
    // Acceptance of the transmitted tokens, counting a rejection only when
    // one actually occurred.
    const int trials = std::min(out.sent, out.accepted + 1);
    const double observed = static_cast<double>(out.accepted) / trials;
    const double a = cfg.scheduler.ewma_factor;
    s.rho_estimate = std::min(0.999, a * s.rho_estimate + (1.0 - a) * observed);
  }
  s.context += out.hits;
}

}  // namespace

RunRecord run(const SimConfig& config, const Policy& policy, std::uint64_t seed) {
  RunRecord rec{config, policy, seed, {}, {}, false};
  const RngStreams streams(seed);
  const ChannelConfig channel = config.channel();
  const CostModel costs = config.costs();
  TokenSource tokens(config.entropy_model(), streams);
  RunState state = initial_state(config);

  rec.steps.reserve(static_cast<std::size_t>(config.steps));
  rec.context.reserve(static_cast<std::size_t>(config.steps) + 1);
  rec.context.push_back(state.context);
  for (std::uint64_t k = 1; k <= static_cast<std::uint64_t>(config.steps); ++k) {
    const double gain = sample_gain(channel, streams, k);
    StepContext ctx{config, costs, k, make_sample(channel, gain), state, tokens};
    auto out = policy_step(policy, ctx);
    if (!out) {
      rec.partial = true;
      break;
    }
    advance(config, state, *out);
    rec.steps.push_back(*out);
    rec.context.push_back(state.context);
  }
  return rec;
}

std::vector<StepOutcome> replay_lengths(const SimConfig& config, std::uint64_t seed,
                                        std::span<const int> lengths) {
  const RngStreams streams(seed);
  const ChannelConfig channel = config.channel();
  const CostModel costs = config.costs();
  TokenSource tokens(config.entropy_model(), streams);
  RunState state = initial_state(config);
  std::vector<StepOutcome> steps;
  steps.reserve(lengths.size());
  for (std::size_t i = 0; i < lengths.size(); ++i) {
    const std::uint64_t k = i + 1;
    const double gain = sample_gain(channel, streams, k);
    StepContext ctx{config, costs, k, make_sample(channel, gain), state, tokens};
    auto out = fixed_draft_step(ctx, lengths[i]);
    if (!out) break;
    advance(config, state, *out);
    steps.push_back(*out);
  }
  return steps;
}

Metrics compute_metrics(const RunRecord& record) {
  Metrics m;
  m.steps = record.steps.size();
  if (m.steps == 0) return m;
  double sent = 0, accepted = 0;
  for (const auto& s : record.steps) {
    m.avg_throughput += s.throughput();
    m.avg_energy += s.energy;
    m.avg_budget += s.budget;
    m.avg_sent += s.sent;
    m.mean_queue += s.queue_after;
    m.max_queue = std::max(m.max_queue, s.queue_after);
    sent += s.sent;
    accepted += s.accepted;
  }
  const double k = static_cast<double>(m.steps);
  m.avg_throughput /= k;
  m.avg_energy /= k;
  m.avg_budget /= k;
  m.avg_sent /= k;
  m.mean_queue /= k;
  m.acceptance_rate = sent > 0 ? accepted / sent : 0;
  m.final_queue = record.steps.back().queue_after;
  return m;
}

MetricStat summarize(std::span<const double> xs) {
  MetricStat st;
  if (xs.empty()) return st;
  double sum = 0;
  for (double x : xs) sum += x;
  st.mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return st;
  double ss = 0;
  for (double x : xs) ss += (x - st.mean) * (x - st.mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  st.ci = 1.959963984540054 * sd / std::sqrt(static_cast<double>(xs.size()));
  return st;
}

AggregateMetrics aggregate(std::span<const Metrics> metrics) {
  if (metrics.empty()) throw std::invalid_argument("nothing to aggregate");
  AggregateMetrics a;
  a.rounds = metrics.size();
  auto stat = [&](auto field) {
    std::vector<double> xs;
    xs.reserve(metrics.size());
    for (const auto& m : metrics) xs.push_back(field(m));
    return summarize(xs);
  };
  a.throughput = stat([](const Metrics& m) { return m.avg_throughput; });
  a.energy = stat([](const Metrics& m) { return m.avg_energy; });
  a.budget = stat([](const Metrics& m) { return m.avg_budget; });
  a.sent = stat([](const Metrics& m) { return m.avg_sent; });
  a.acceptance = stat([](const Metrics& m) { return m.acceptance_rate; });
  a.mean_queue = stat([](const Metrics& m) { return m.mean_queue; });
  a.final_queue = stat([](const Metrics& m) { return m.final_queue; });
  return a;
}

AggregateMetrics aggregate(std::span<const RunRecord> records) {
  if (records.empty()) throw std::invalid_argument("nothing to aggregate");
  auto fingerprint = [](const RunRecord& r) {
    auto snap = r.config.snapshot();
    snap["sim"].erase("seed");
    snap["policy"]["name"] = r.policy.name;
    return snap;
  };
  const auto reference = fingerprint(records.front());
  std::vector<Metrics> metrics;
  metrics.reserve(records.size());
  for (const auto& r : records) {
    if (fingerprint(r) != reference) {
      throw std::invalid_argument("cannot aggregate runs with different configurations");
    }
    metrics.push_back(compute_metrics(r));
  }
  return aggregate(std::span<const Metrics>(metrics));
}

}  // namespace gelato
