#include "doctest.h"

#include <memory>
#include <stdexcept>
#include <vector>

#include "gelato/policy.hpp"
#include "gelato/simulator.hpp"
#include "support.hpp"

using namespace gelato;
using testing::rel_err;

namespace {

constexpr double kRate = 1.229e7;

struct Harness {
  SimConfig cfg;
  CostModel costs;
  RunState state;
  TokenSource tokens;

  explicit Harness(std::vector<std::pair<double, int>> rows, SimConfig base = {})
      : cfg(finalized(base)), costs(cfg.costs()), tokens(model(rows, cfg), RngStreams(7)) {
    state.queue = {0, cfg.energy_budget_j};
    state.payload_estimate = cfg.payload_prior_bits;
    state.context = cfg.initial_context;
  }

  static SimConfig finalized(SimConfig c) {
    c.finalize();
    return c;
  }

  static EntropyModel model(const std::vector<std::pair<double, int>>& rows,
                            const SimConfig& c) {
    auto trace = std::make_shared<EntropyTrace>();
    for (auto [h, s] : rows) {
      trace->entropy.push_back(h);
      trace->topp_size.push_back(s);
    }
    EntropyModel m = c.entropy_model();
    m.law = EntropyLaw::trace;
    m.trace = trace;
    return m;
  }

  StepContext ctx() { return {cfg, costs, 1, {1e-10, kRate}, state, tokens}; }
};

void check_totals(const StepOutcome& s) {
  CHECK(s.energy == s.draft_energy + s.uplink_energy + s.downlink_energy);
  CHECK(s.latency == s.draft_latency + s.uplink_latency + s.verify_latency +
                         s.downlink_latency);
}

}  // namespace

TEST_CASE("policy names") {
  SimConfig cfg;
  cfg.finalize();
  CHECK(parse_policy("gelato", cfg).name == "gelato");
  CHECK(std::get<GelatoPolicy>(parse_policy("gelato_noexit", cfg).kind).early_exit == false);
  CHECK(parse_policy("static_sd", cfg).name == "static_sd:5");
  CHECK(parse_policy("static_sd:9", cfg).name == "static_sd:9");
  const Policy wide = parse_policy("static_sd:7:1.5", cfg);
  CHECK(wide.name == "static_sd:7:1.5");
  CHECK(std::get<StaticSdPolicy>(wide.kind).coverage == 1.5);
  const Policy d = parse_policy("dssd", cfg);
  CHECK(d.name == "dssd:7");
  CHECK(rel_err(std::get<DssdPolicy>(d.kind).rx_power_w, 0.07943282347242814) < 1e-9);

  CHECK_THROWS_AS(parse_policy("static_sd:0", cfg), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("static_sd:16", cfg), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("static_sd:5:0", cfg), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("static_sd:x", cfg), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("dssd:0", cfg), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("greedy", cfg), std::invalid_argument);
  CHECK_THROWS_AS(parse_policy("gelato:3", cfg), std::invalid_argument);
}

TEST_CASE("static SD with certain acceptance") {
  Harness h({{0, 1}, {0, 1}, {0, 1}, {0, 1}, {0, 1}});
  StepContext ctx = h.ctx();
  const auto out = static_sd_step(StaticSdPolicy{5, 1.0}, ctx);
  REQUIRE(out);
  CHECK(out->sent == 5);
  CHECK(out->hits == 6);
  CHECK(out->uplink_bits == 5 * 34);
  check_totals(*out);
}

TEST_CASE("static SD payload is the compressed set sum") {
  Harness h({{0.2, 3}, {0.9, 4}, {0.1, 1}, {1.4, 9}, {0.5, 2}});
  StepContext ctx = h.ctx();
  const auto out = static_sd_step(StaticSdPolicy{5, 1.0}, ctx);
  REQUIRE(out);
  CHECK(out->uplink_bits == (3 + 4 + 1 + 9 + 2) * 34);
  CHECK(rel_err(out->uplink_latency, out->uplink_bits / kRate) < 1e-12);
}

TEST_CASE("wider coverage never shrinks the payload") {
  SimConfig base;
  base.finalize();
  for (double cp : {1.0, 1.25, 1.5, 2.0}) {
    RunRecord narrow = run(base, parse_policy("static_sd:5", base), 3);
    StaticSdPolicy p{5, cp};
    RunRecord wide = run(base, Policy{"wide", p}, 3);
    for (std::size_t k = 0; k < narrow.steps.size(); ++k) {
      CHECK(wide.steps[k].uplink_bits >= narrow.steps[k].uplink_bits);
    }
  }
}

TEST_CASE("DSSD full acceptance has no downlink") {
  Harness h(std::vector<std::pair<double, int>>(7, {0.0, 1}));
  StepContext ctx = h.ctx();
  const auto out = dssd_step(DssdPolicy{7, dbm_to_watts(19)}, ctx);
  REQUIRE(out);
  CHECK(out->uplink_bits == 126);
  CHECK(out->downlink_bits == 0);
  CHECK(out->hits == 8);
  const double e_up = dbm_to_watts(23) * 126 / kRate;
  CHECK(rel_err(out->energy, out->draft_energy + e_up) < 1e-12);
  check_totals(*out);
}

TEST_CASE("DSSD mismatch pulls one distribution down") {
  // Entropy 50 makes acceptance essentially impossible.
  std::vector<std::pair<double, int>> rows{{50.0, 10}};
  rows.resize(7, {0.0, 1});
  Harness h(rows);
  StepContext ctx = h.ctx();
  const auto out = dssd_step(DssdPolicy{7, dbm_to_watts(19)}, ctx);
  REQUIRE(out);
  REQUIRE(out->accepted == 0);
  CHECK(out->downlink_bits == 340);
  CHECK(rel_err(out->downlink_latency, 340 / kRate) < 1e-12);
  CHECK(out->downlink_latency == doctest::Approx(2.77e-5).epsilon(2e-3));
  CHECK(rel_err(out->downlink_energy, dbm_to_watts(19) * 340 / kRate) < 1e-12);
  CHECK(out->downlink_energy == doctest::Approx(2.20e-6).epsilon(2e-3));
  check_totals(*out);
}

TEST_CASE("DSSD uplink is smaller than static SD at equal length") {
  SimConfig base;
  base.finalize();
  const RunRecord dssd = run(base, parse_policy("dssd:7", base), 9);
  const RunRecord sd = run(base, parse_policy("static_sd:7", base), 9);
  for (std::size_t k = 0; k < dssd.steps.size(); ++k) {
    CHECK(dssd.steps[k].uplink_bits < sd.steps[k].uplink_bits);
  }
}

TEST_CASE("dispatch matches the direct step function") {
  std::vector<std::pair<double, int>> rows{{0.3, 2}, {0.1, 1}, {0.7, 3}, {0.2, 2}, {0.4, 2}};
  Harness a(rows), b(rows);
  StepContext ca = a.ctx(), cb = b.ctx();
  const auto direct = static_sd_step(StaticSdPolicy{5, 1.0}, ca);
  const auto routed = policy_step(Policy{"static_sd:5", StaticSdPolicy{5, 1.0}}, cb);
  REQUIRE(direct);
  REQUIRE(routed);
  CHECK(direct->hits == routed->hits);
  CHECK(direct->energy == routed->energy);
  CHECK(direct->latency == routed->latency);
}

TEST_CASE("tiny V with a backlog drafts a budget of one") {
  SimConfig base;
  base.scheduler.v = 1e-9;
  Harness h(std::vector<std::pair<double, int>>(15, {0.0, 1}), base);
  h.state.queue.backlog = 5;
  StepContext ctx = h.ctx();
  const auto out = gelato_step(GelatoPolicy{true}, ctx);
  REQUIRE(out);
  CHECK(out->budget == 1);
  CHECK(out->sent == 1);
}

TEST_CASE("policies see the same channel") {
  SimConfig base;
  base.steps = 200;
  base.finalize();
  const RunRecord g = run(base, parse_policy("gelato", base), 12);
  const RunRecord s = run(base, parse_policy("static_sd:9", base), 12);
  const RunRecord d = run(base, parse_policy("dssd", base), 12);
  for (std::size_t k = 0; k < g.steps.size(); ++k) {
    CHECK(g.steps[k].gain == s.steps[k].gain);
    CHECK(g.steps[k].gain == d.steps[k].gain);
  }
}

TEST_CASE("exhausted trace ends the step") {
  Harness h({{0.0, 1}, {0.0, 1}});
  StepContext ctx = h.ctx();
  CHECK_FALSE(static_sd_step(StaticSdPolicy{5, 1.0}, ctx).has_value());
}
