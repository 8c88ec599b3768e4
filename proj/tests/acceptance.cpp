// Acceptance suite: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "gelato/channel.hpp"
#include "gelato/compute_model.hpp"
#include "gelato/early_exit.hpp"
#include "gelato/experiments.hpp"
#include "gelato/generation.hpp"
#include "gelato/oracle.hpp"
#include "gelato/run_log.hpp"
#include "gelato/scheduler.hpp"
#include "gelato/simulator.hpp"

using namespace gelato;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

double rel_err(double got, double want) {
  return want == 0 ? std::abs(got) : std::abs(got - want) / std::abs(want);
}

SimConfig defaults() {
  SimConfig c;
  c.finalize();
  return c;
}

// ---------------------------------------------------------------- formulas

Verdict formula_suite() {
  int checks = 0, failed = 0;
  std::string first_failure;
  auto expect = [&](const char* what, double got, double want) {
    ++checks;
    if (!(rel_err(got, want) <= 1e-9)) {
      if (failed++ == 0) {
        first_failure = std::string(what) + " got " + fmt("%.12g", got) + " want " +
                        fmt("%.12g", want);
      }
    }
  };

  // Compute cost: per-layer terms written out by hand.
  const double d = 896, df = 4864, N = 24, L = 100;
  const double flops_hand = N * 1 * (6 * d * d + 4 * (L + 0.5) * d + 2 * d * d + 4 * d * df);
  SlmProfile slm;
  expect("draft_flops", draft_flops(slm, 100, 1), flops_hand);
  expect("draft_flops frozen", draft_flops(slm, 100, 1), 581167104.0);
  expect("draft_flops minimal", draft_flops(SlmProfile{1, 1, 1, 1, 1}, 0, 1), 14.0);
  const double tD = draft_latency(slm, 100, 1);
  expect("draft_latency", tD, flops_hand / 40e9);
  expect("draft_energy", draft_energy(slm, tD), 12 * flops_hand / 40e9);

  // Link.
  const double pU = std::pow(10.0, 2.3) / 1000, n0 = std::pow(10.0, -17.4) / 1000;
  ChannelConfig ch{1e6, pU, n0, 1e-10};
  const double snr = pU * 1e-10 / (n0 * 1e6);
  expect("shannon_rate", shannon_rate(ch, 1e-10), 1e6 * std::log(1 + snr) / std::log(2.0));
  expect("shannon_rate frozen", shannon_rate(ch, 1e-10), 12291421.7778744);
  expect("dbm 23", dbm_to_watts(23), 0.19952623149688797);
  expect("dbm 19", dbm_to_watts(19), 0.07943282347242814);
  PayloadSpec spec;
  const std::vector<int> five{4, 4, 4, 4, 4}, one{1};
  expect("payload 5x4", payload_bits(five, spec), 5 * 4 * (16 + 18));
  expect("payload 1", payload_bits(one, spec), 34);
  const LinkCost up = link_cost(680, 1.229e7, 0.19953);
  expect("uplink latency", up.latency, 680 / 1.229e7);
  expect("uplink energy", up.energy, 0.19953 * 680 / 1.229e7);
  const LinkCost down = link_cost(340, 1.229e7, dbm_to_watts(19));
  expect("downlink latency", down.latency, 340 / 1.229e7);
  expect("downlink energy", down.energy, 0.07943282347242814 * 340 / 1.229e7);

  // Surrogate.
  for (int g : {1, 3, 5, 7}) {
    double sum = 1, term = 1;
    for (int i = 1; i <= g; ++i) sum += (term *= 0.9);
    expect("expected_hits", expected_hits(g, 0.9), sum);
  }
  expect("expected_hits 1", expected_hits(1, 0.9), 1.9);
  expect("expected_hits 3", expected_hits(3, 0.9), 3.439);
  expect("expected_hits rho=0", expected_hits(5, 0.0), 1.0);

  // Acceptance law and bucket.
  expect("phi(0)", phi(0, 0.35), 1.0);
  expect("phi(2)", phi(2.0, 0.35), std::exp(-0.7));
  expect("phi(H_th)", phi(0.30103, 0.35), std::exp(-0.35 * 0.30103));
  const double hth = -std::log(0.9) / 0.35;
  expect("phi_inverse", phi_inverse(0.9, 0.35), hth);
  expect("phi_inverse frozen", phi_inverse(0.9, 0.35), 0.3010300447366465);
  expect("phi round trip", phi(phi_inverse(0.9, 0.35), 0.35), 0.9);
  expect("bucket_step", bucket_step({0, hth, 1.2 * hth}, 0.5).level, 0.5 - hth);
  expect("bucket_step frozen", bucket_step({0, hth, 1.2 * hth}, 0.5).level,
         0.19896995526335348);
  expect("bucket_step overflow", bucket_step({0, hth, 1.2 * hth}, 0.8).level, 0.8 - hth);
  expect("default_cap", default_cap(hth, 1.2), 1.2 * hth);
  expect("default_cap x2.4", default_cap(hth, 2.4), 0.7224721073679516);
  expect("queue", update_queue({0.5, 1.2}, 1.5).backlog, 0.8);
  expect("ewma", update_payload_estimate(100, 200, 0.9), 110);

  std::ostringstream detail;
  detail << (checks - failed) << "/" << checks << " values within 1e-9 relative";
  if (failed) detail << "; first failure: " << first_failure;
  return {failed == 0, detail.str()};
}

// --------------------------------------------------------- surrogate fit

Verdict surrogate_fidelity() {
  const int steps = 100000;
  const double rho = 0.9;
  const double h = phi_inverse(rho, 0.35);  // constant entropy with phi = rho
  std::ostringstream detail;
  bool pass = true;
  for (int gamma : {1, 3, 5, 7}) {
    auto trace = std::make_shared<EntropyTrace>();
    trace->entropy.assign(static_cast<std::size_t>(gamma) * steps, h);
    trace->topp_size.assign(trace->entropy.size(), 1);
    EntropyModel m;
    m.law = EntropyLaw::trace;
    m.trace = trace;
    TokenSource src(m, RngStreams(derive_seed(2024, gamma)));
    double sum = 0, sumsq = 0;
    std::vector<DraftToken> toks(static_cast<std::size_t>(gamma));
    for (int k = 1; k <= steps; ++k) {
      for (int i = 1; i <= gamma; ++i) toks[i - 1] = *src.draw(k, i);
      const double n = verify(toks, 0.35).total_appended;
      sum += n;
      sumsq += n * n;
    }
    const double mean = sum / steps;
    const double se = std::sqrt((sumsq / steps - mean * mean) / (steps - 1));
    const double want = expected_hits(gamma, rho);
    const double z = (mean - want) / se;
    pass = pass && std::abs(z) <= 3;
    detail << "g=" << gamma << " " << fmt("%.4f", mean) << " vs " << fmt("%.4f", want)
           << " (z=" << fmt("%+.2f", z) << ") ";
  }
  return {pass, detail.str()};
}

// --------------------------------------------------------------- theorem

Verdict theorem_bounds() {
  const SimConfig c = defaults();
  const auto inst = run_verify(c, 100);
  int both = 0, eq13 = 0, eq13_v = 0, eq14 = 0;
  double worst = 0;
  double max_theta = 0, max_delta = 0;
  for (const auto& i : inst) {
    both += i.report.holds();
    eq13 += i.report.throughput_holds();
    eq13_v += i.report.throughput_slack_v >= 0;
    eq14 += i.report.energy_holds();
    worst = std::min(worst, i.report.throughput_slack);
    max_theta = std::max(max_theta, i.report.theta0);
    max_delta = std::max(max_delta, i.report.delta0);
  }
  std::ostringstream detail;
  detail << both << "/100 satisfy both; throughput bound " << eq13
         << "/100 (1/V variant " << eq13_v << "/100), energy bound " << eq14
         << "/100; worst throughput slack " << fmt("%.4g", worst) << "; max theta0 "
         << fmt("%.4g", max_theta) << ", max delta0 " << fmt("%.4g", max_delta);
  return {both == 100, detail.str()};
}

// -------------------------------------------------------- energy tracking

Verdict energy_tracking() {
  SimConfig c;
  c.steps = 10000;
  c.scheduler.v = 100;
  c.finalize();
  const RunRecord r = run(c, parse_policy("gelato", c), c.seed);
  const Metrics m = compute_metrics(r);
  const std::size_t K = r.steps.size();
  double tail = 0;
  std::size_t n = 0;
  for (std::size_t k = K - K / 10; k < K; ++k) {
    tail += r.steps[k].queue_after / static_cast<double>(k + 1);
    ++n;
  }
  tail /= static_cast<double>(n);
  const bool avg_ok = m.avg_energy <= c.energy_budget_j * 1.05;
  const bool queue_ok = tail < 0.01 * c.energy_budget_j;
  std::ostringstream detail;
  detail << "mean energy " << fmt("%.4f", m.avg_energy) << " J (limit "
         << fmt("%.3f", c.energy_budget_j * 1.05) << "), last-decile mean Q/k "
         << fmt("%.3g", tail) << " (limit " << fmt("%.3g", 0.01 * c.energy_budget_j) << ")";
  return {avg_ok && queue_ok, detail.str()};
}

// --------------------------------------------------------------- V-study

Verdict v_study() {
  auto at = [](double v) {
    SimConfig c;
    c.steps = 1000;
    c.scheduler.v = v;
    c.finalize();
    return compute_metrics(run(c, parse_policy("gelato", c), c.seed));
  };
  const Metrics lo = at(10), hi = at(100);
  std::ostringstream detail;
  detail << "mean budget " << fmt("%.3f", hi.avg_budget) << " (V=100) vs "
         << fmt("%.3f", lo.avg_budget) << " (V=10); mean queue " << fmt("%.3f", hi.mean_queue)
         << " vs " << fmt("%.3f", lo.mean_queue);
  return {hi.avg_budget > lo.avg_budget && hi.mean_queue > lo.mean_queue, detail.str()};
}

// -------------------------------------------------------------- benchmark

Verdict benchmark_ordering() {
  const std::vector<std::string> statics{"static_sd:5",     "static_sd:7",
                                         "static_sd:9",     "static_sd:5:1.5",
                                         "static_sd:7:1.5", "static_sd:9:1.5"};
  struct Point {
    double gelato_thr = 0, gelato_e = 0, best_static_thr = 0, min_other_e = 1e300;
    std::string best_static, min_other;
  };
  auto evaluate = [&](double bandwidth) {
    SimConfig c;
    c.rounds = 100;
    c.bandwidth_hz = bandwidth;
    c.finalize();
    Point p;
    const RunSummary g = run_rounds(c, parse_policy("gelato", c));
    p.gelato_thr = g.aggregate.throughput.mean;
    p.gelato_e = g.aggregate.energy.mean;
    std::vector<std::string> others = statics;
    others.push_back("dssd:7");
    for (const auto& name : others) {
      const RunSummary s = run_rounds(c, parse_policy(name, c));
      const bool is_static = name.rfind("static_sd", 0) == 0;
      if (is_static && s.aggregate.throughput.mean > p.best_static_thr) {
        p.best_static_thr = s.aggregate.throughput.mean;
        p.best_static = name;
      }
      if (s.aggregate.energy.mean < p.min_other_e) {
        p.min_other_e = s.aggregate.energy.mean;
        p.min_other = name;
      }
    }
    return p;
  };
  const Point one = evaluate(1e6), ten = evaluate(1e7);
  const double gap1 = one.gelato_thr - one.best_static_thr;
  const double gap10 = ten.gelato_thr - ten.best_static_thr;
  const bool thr_ok = gap1 > 0;
  const bool energy_ok = one.gelato_e < one.min_other_e;
  const bool narrows = gap10 < gap1;
  std::ostringstream detail;
  detail << "1 MHz: gelato " << fmt("%.3f", one.gelato_thr) << " tok/s vs best static "
         << one.best_static << " " << fmt("%.3f", one.best_static_thr) << " [" << (thr_ok ? "ok" : "x")
         << "]; energy " << fmt("%.4f", one.gelato_e) << " J vs lowest other " << one.min_other
         << " " << fmt("%.4f", one.min_other_e) << " [" << (energy_ok ? "ok" : "x")
         << "]; gap 1 MHz " << fmt("%+.4f", gap1) << ", 10 MHz " << fmt("%+.4f", gap10) << " ["
         << (narrows ? "ok" : "x") << "]";
  return {thr_ok && energy_ok && narrows, detail.str()};
}

// ------------------------------------------------------------- early exit

Verdict early_exit_mechanism() {
  SimConfig c;
  c.rounds = 100;
  c.steps = 1000;
  c.finalize();
  const RunSummary on = run_rounds(c, parse_policy("gelato", c));
  const RunSummary off = run_rounds(c, parse_policy("gelato_noexit", c));
  // Paired per-round differences.
  std::vector<double> dacc, de;
  for (std::size_t i = 0; i < on.rounds.size(); ++i) {
    dacc.push_back(on.rounds[i].metrics.acceptance_rate - off.rounds[i].metrics.acceptance_rate);
    de.push_back(off.rounds[i].metrics.avg_energy - on.rounds[i].metrics.avg_energy);
  }
  auto z_of = [](const std::vector<double>& x) {
    double m = 0, ss = 0;
    for (double v : x) m += v;
    m /= static_cast<double>(x.size());
    for (double v : x) ss += (v - m) * (v - m);
    const double se = std::sqrt(ss / static_cast<double>(x.size() - 1)) /
                      std::sqrt(static_cast<double>(x.size()));
    return std::pair{m, m / se};
  };
  const auto [macc, zacc] = z_of(dacc);
  const auto [me, ze] = z_of(de);
  std::ostringstream detail;
  detail << "acceptance " << fmt("%.4f", on.aggregate.acceptance.mean) << " vs "
         << fmt("%.4f", off.aggregate.acceptance.mean) << " (paired z=" << fmt("%.1f", zacc)
         << "); energy " << fmt("%.4f", on.aggregate.energy.mean) << " vs "
         << fmt("%.4f", off.aggregate.energy.mean) << " J (paired z=" << fmt("%.1f", ze) << ")";
  (void)macc;
  (void)me;
  return {zacc > 3 && ze > 3, detail.str()};
}

// ------------------------------------------------------------ determinism

Verdict determinism() {
  SimConfig c;
  c.steps = 500;
  c.rounds = 3;
  c.finalize();
  int compared = 0, identical = 0;
  for (const char* name : {"gelato", "gelato_noexit", "static_sd:9:1.5", "dssd"}) {
    const Policy p = parse_policy(name, c);
    for (std::uint64_t seed : {1ULL, 77ULL, 123456789ULL}) {
      std::ostringstream a, b;
      write_run_csv(run(c, p, seed), a);
      write_run_csv(run(c, p, seed), b);
      ++compared;
      identical += a.str() == b.str();
    }
  }
  // Through the file writer and the worker pool as well.
  const auto dir = fs::temp_directory_path() / "gelato_acceptance_determinism";
  fs::remove_all(dir);
  const Policy g = parse_policy("gelato", c);
  run_rounds(c, g, dir / "a");
  run_rounds(c, g, dir / "b");
  for (int i = 0; i < c.rounds; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "run_%04d.csv", i);
    auto slurp = [](const fs::path& p) {
      std::ifstream in(p, std::ios::binary);
      return std::string(std::istreambuf_iterator<char>(in), {});
    };
    ++compared;
    identical += slurp(dir / "a" / name) == slurp(dir / "b" / name) &&
                 !slurp(dir / "a" / name).empty();
  }
  fs::remove_all(dir);
  return {identical == compared,
          std::to_string(identical) + "/" + std::to_string(compared) +
              " repeated run logs byte-identical"};
}

struct Criterion {
  const char* name;
  double time_limit_s;
  std::function<Verdict()> check;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"formula-oracles", 1, formula_suite},
      {"surrogate-fidelity", 10, surrogate_fidelity},
      {"theorem-bounds", 60, theorem_bounds},
      {"energy-tracking", 30, energy_tracking},
      {"v-study", 10, v_study},
      {"benchmark-ordering", 300, benchmark_ordering},
      {"early-exit", 30, early_exit_mechanism},
      {"determinism", 60, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs <= c.time_limit_s;
    const bool pass = v.pass && in_time;
    failures += !pass;
    std::printf("%s  %-19s %s [%.2fs / %.0fs%s]\n", pass ? "PASS" : "FAIL", c.name,
                v.detail.c_str(), secs, c.time_limit_s, in_time ? "" : ", too slow");
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
