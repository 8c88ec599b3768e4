// Command-line front end: run, sweep, verify, validate-config, calibrate.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "gelato/config.hpp"
#include "gelato/experiments.hpp"
#include "gelato/oracle.hpp"
#include "gelato/policy.hpp"
#include "gelato/run_log.hpp"

namespace fs = std::filesystem;
using namespace gelato;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2, kBoundViolation = 3 };

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;  // key=value
  std::optional<std::uint64_t> seed;
  std::optional<int> rounds;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config_path, "Config file (key = value lines)");
  cmd->add_option("--set", o.overrides, "Override a config key, KEY=VALUE (repeatable)");
  cmd->add_option("--seed", o.seed, "Master seed (sim.seed)");
  cmd->add_option("--rounds", o.rounds, "Monte-Carlo rounds (sim.rounds)");
}

// Precedence: defaults < config file < --set < dedicated flags.
SimConfig build_config(const CommonOptions& o) {
  SimConfig cfg = o.config_path.empty() ? parse_config("") : load_config(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'", {});
    }
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  if (o.rounds) cfg.rounds = *o.rounds;
  cfg.finalize();
  return cfg;
}

std::vector<double> parse_values(const std::string& list) {
  SimConfig scratch;
  scratch.set("sweep.values", list);
  return scratch.sweep_values;
}

void print_summary(const std::string& label, const AggregateMetrics& a) {
  std::printf("%s: throughput %.4f tokens/s (+/- %.4f), energy %.5f J/step (+/- %.5f), "
              "%zu rounds\n",
              label.c_str(), a.throughput.mean, a.throughput.ci, a.energy.mean,
              a.energy.ci, a.rounds);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Device-edge speculative decoding simulator with Lyapunov budget "
               "scheduling and entropy early exit"};
  app.require_subcommand(1);

  CommonOptions run_opts, sweep_opts, verify_opts, validate_opts, calib_opts;
  std::string run_policy, run_out = "out";
  auto* run_cmd = app.add_subcommand("run", "Run seeded Monte-Carlo rounds of one policy");
  add_common(run_cmd, run_opts);
  run_cmd->add_option("--policy", run_policy,
                      "gelato | gelato_noexit | static_sd[:gamma[:cp]] | dssd[:gamma_max]");
  run_cmd->add_option("--out", run_out, "Output directory");

  std::string sweep_axis, sweep_values, sweep_policies, sweep_out = "sweep";
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one config key across policies");
  add_common(sweep_cmd, sweep_opts);
  sweep_cmd->add_option("--axis", sweep_axis, "Numeric config key to sweep");
  sweep_cmd->add_option("--values", sweep_values, "Comma-separated axis values");
  sweep_cmd->add_option("--policies", sweep_policies, "Comma-separated policy names");
  sweep_cmd->add_option("--policy", sweep_policies, "Alias of --policies");
  sweep_cmd->add_option("--out", sweep_out, "Output directory");

  std::optional<int> verify_instances;
  bool verify_verbose = false;
  auto* verify_cmd =
      app.add_subcommand("verify", "Check the cumulative throughput/energy bounds "
                                   "against the exhaustive offline oracle");
  add_common(verify_cmd, verify_opts);
  verify_cmd->add_option("--instances", verify_instances, "Number of instances");
  verify_cmd->add_flag("--verbose,-v", verify_verbose, "Print oracle and GELATO sequences");

  auto* validate_cmd =
      app.add_subcommand("validate-config", "Validate a config and echo derived values");
  add_common(validate_cmd, validate_opts);

  long long calib_samples = 1000000;
  std::string calib_out = "calibration.csv";
  auto* calib_cmd = app.add_subcommand(
      "calibrate", "Export binned entropy vs empirical acceptance from the entropy model");
  add_common(calib_cmd, calib_opts);
  calib_cmd->add_option("--samples", calib_samples, "Number of sampled tokens");
  calib_cmd->add_option("--out", calib_out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  SimConfig cfg;
  try {
    if (*run_cmd) cfg = build_config(run_opts);
    if (*sweep_cmd) cfg = build_config(sweep_opts);
    if (*verify_cmd) cfg = build_config(verify_opts);
    if (*validate_cmd) cfg = build_config(validate_opts);
    if (*calib_cmd) cfg = build_config(calib_opts);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  }

  try {
    if (*validate_cmd) {
      std::cout << cfg.snapshot().dump(2) << "\n";
      std::printf("entropy threshold H_th = %.5f nats, backlog cap = %.5f nats, "
                  "tx power = %.5f W\n",
                  cfg.entropy_threshold, cfg.backlog_cap, cfg.tx_power_w());
      return kOk;
    }

    if (*run_cmd) {
      Policy policy;
      try {
        policy = run_policy.empty() ? configured_policy(cfg) : parse_policy(run_policy, cfg);
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kValidation;
      }
      const RunSummary s = run_rounds(cfg, policy, run_out);
      print_summary(policy.name, s.aggregate);
      return kOk;
    }

    if (*sweep_cmd) {
      std::vector<double> values = cfg.sweep_values;
      std::vector<std::string> policies = cfg.sweep_policies;
      std::string axis = sweep_axis.empty() ? cfg.sweep_axis : sweep_axis;
      try {
        if (!sweep_values.empty()) values = parse_values(sweep_values);
        if (!sweep_policies.empty()) {
          SimConfig scratch;
          scratch.set("sweep.policies", sweep_policies);
          policies = scratch.sweep_policies;
        }
        if (policies.empty()) policies = {cfg.policy_kind};
        if (axis.empty()) throw ConfigError("sweep needs --axis or sweep.axis", {"sweep.axis"});
        for (const auto& p : policies) parse_policy(p, cfg);
      } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kValidation;
      } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kValidation;
      }
      const auto rows = run_sweep(cfg, axis, values, policies, sweep_out);
      for (const auto& r : rows) {
        print_summary(axis + "=" + format_double(r.axis_value) + " " + r.policy, r.aggregate);
      }
      return kOk;
    }

    if (*verify_cmd) {
      const int n = verify_instances.value_or(cfg.verify_instances);
      std::vector<VerifyInstance> results;
      try {
        results = run_verify(cfg, n);
      } catch (const OracleRefused& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return kValidation;
      }
      int passed = 0;
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        const bool ok = r.report.holds();
        passed += ok;
        std::printf("instance %3zu seed %llu: throughput slack %+.6g (V-variant %+.6g), "
                    "energy slack %+.6g  %s\n",
                    i, static_cast<unsigned long long>(r.seed), r.report.throughput_slack,
                    r.report.throughput_slack_v, r.report.energy_slack,
                    ok ? "ok" : "VIOLATED");
        if (verify_verbose) {
          std::string oracle_seq, budgets, sent;
          for (int g : r.oracle.sequence) oracle_seq += std::to_string(g) + " ";
          for (int g : r.gelato_budgets) budgets += std::to_string(g) + " ";
          for (int g : r.gelato_sent) sent += std::to_string(g) + " ";
          std::printf("    oracle lengths  : %s(sum throughput %.6g, %s)\n",
                      oracle_seq.c_str(), r.oracle.throughput_sum,
                      r.oracle.feasible ? "feasible" : "infeasible");
          std::printf("    gelato budgets  : %s\n    gelato sent     : %s(sum throughput "
                      "%.6g)\n",
                      budgets.c_str(), sent.c_str(), r.report.gelato_throughput_sum);
          std::printf("    theta0 %.6g  delta0 %.6g\n", r.report.theta0, r.report.delta0);
        }
      }
      std::printf("%d/%zu instances satisfy both bounds\n", passed, results.size());
      return passed == static_cast<int>(results.size()) ? kOk : kBoundViolation;
    }

    if (*calib_cmd) {
      const auto bins = calibrate(cfg, calib_samples);
      if (fs::path(calib_out).has_parent_path()) {
        fs::create_directories(fs::path(calib_out).parent_path());
      }
      write_calibration_csv(bins, cfg.accept_coeff, calib_out);
      long long total = 0, accepted = 0;
      for (const auto& b : bins) {
        total += b.samples;
        accepted += b.accepted;
      }
      std::printf("%lld tokens, mean acceptance %.5f, %zu bins -> %s\n", total,
                  static_cast<double>(accepted) / static_cast<double>(total), bins.size(),
                  calib_out.c_str());
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kOk;
}
