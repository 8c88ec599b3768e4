#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gelato/channel.hpp"
#include "gelato/compute_model.hpp"
#include "gelato/generation.hpp"
#include "gelato/scheduler.hpp"

namespace gelato {

/// Raised for unknown keys, malformed values and range violations. `keys()`
/// names every offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, std::vector<std::string> keys)
      : std::runtime_error(what), keys_(std::move(keys)) {}

  const std::vector<std::string>& keys() const { return keys_; }

 private:
  std::vector<std::string> keys_;
};

/// Every parameter of a run. Stored in SI units; `finalize()` fills the
/// derived fields and must be called after edits.
struct SimConfig {
  // sim.*
  int steps = 1000;
  int rounds = 100;
  std::uint64_t seed = 1;
  double initial_context = 256;

  // slm.*, verifier.*
  SlmProfile slm;
  VerifierProfile verifier;

  // channel.*, payload.*
  double bandwidth_hz = 1e6;
  double tx_power_dbm = 23;
  double noise_psd_dbm_hz = -174;
  double mean_gain = 1e-10;
  PayloadSpec payload;

  // generation.*
  EntropyLaw law = EntropyLaw::gamma;
  double gamma_shape = 2.0;
  double gamma_scale = 0;  // 0 = derive from the entropy threshold
  double accept_coeff = 0.35;
  double cp = 1.0;
  int smax = 256;
  std::string trace_path;

  // scheduler.*
  SchedulerParams scheduler;
  double energy_budget_j = 1.2;
  bool online_rho = false;
  double initial_payload_bits = 0;  // 0 = derive from the entropy model

  // early_exit.*
  bool early_exit = true;
  double cap_multiplier = 1.2;
  double entropy_threshold_override = 0;  // 0 = phi_inverse(rho0)

  // policy.*
  std::string policy_kind = "gelato";
  int static_gamma = 5;
  double static_cp = 1.0;
  int dssd_gamma_max = 7;
  double dssd_rx_power_dbm = 19;

  // sweep.*
  std::string sweep_axis;
  std::vector<double> sweep_values;
  std::vector<std::string> sweep_policies;

  // verify.*
  int verify_steps = 4;
  int verify_gamma0 = 3;
  int verify_instances = 100;

  // Derived by finalize().
  double entropy_threshold = 0;   // H_th, nats
  double backlog_cap = 0;         // Theta_th, nats
  double effective_gamma_scale = 0;
  double payload_prior_bits = 0;  // initial per-token payload estimate
  std::shared_ptr<const EntropyTrace> trace;

  /// Validates ranges and recomputes derived fields. Throws ConfigError.
  void finalize();

  ChannelConfig channel() const;
  EntropyModel entropy_model() const;
  CostModel costs() const;
  double tx_power_w() const { return dbm_to_watts(tx_power_dbm); }
  double dssd_rx_power_w() const { return dbm_to_watts(dssd_rx_power_dbm); }

  /// Assigns one dotted key from its textual value (units allowed where the
  /// key has a dimension, e.g. "5 MHz", "100 ms"). Does not finalize.
  void set(std::string_view key, std::string_view value);

  /// Reads a numeric key back in SI units; throws ConfigError if the key is
  /// unknown or not numeric.
  double numeric(std::string_view key) const;

  /// All keys and values (SI) plus derived quantities.
  nlohmann::json snapshot() const;
};

/// Keys accepted by load_config / SimConfig::set.
std::vector<std::string> config_keys();

/// Parses `key = value` lines (`#` comments, optional `[section]` prefixes)
/// over Table-I defaults and finalizes.
SimConfig parse_config(std::string_view text, std::string_view origin = "<string>");

SimConfig load_config(const std::filesystem::path& path);

}  // namespace gelato
