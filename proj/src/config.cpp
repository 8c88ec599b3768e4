#include "gelato/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

namespace gelato {

namespace {

enum class Dim { plain, frequency, time, power, energy, flops, dbm, dbm_hz };

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return std::string(s);
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value,
                            std::string_view why) {
  throw ConfigError(std::string(key) + ": " + std::string(why) + " (got '" +
                        std::string(value) + "')",
                    {std::string(key)});
}

double unit_scale(Dim dim, std::string_view unit, bool& ok) {
  ok = true;
  if (unit.empty()) return 1.0;
  struct Entry {
    Dim dim;
    std::string_view name;
    double scale;
  };
  static constexpr Entry table[] = {
      {Dim::frequency, "Hz", 1.0},     {Dim::frequency, "kHz", 1e3},
      {Dim::frequency, "MHz", 1e6},    {Dim::frequency, "GHz", 1e9},
      {Dim::time, "s", 1.0},           {Dim::time, "ms", 1e-3},
      {Dim::time, "us", 1e-6},         {Dim::power, "W", 1.0},
      {Dim::power, "mW", 1e-3},        {Dim::energy, "J", 1.0},
      {Dim::energy, "mJ", 1e-3},       {Dim::flops, "FLOPS", 1.0},
      {Dim::flops, "MFLOPS", 1e6},     {Dim::flops, "GFLOPS", 1e9},
      {Dim::flops, "TFLOPS", 1e12},    {Dim::dbm, "dBm", 1.0},
      {Dim::dbm_hz, "dBm/Hz", 1.0},
  };
  for (const auto& e : table) {
    if (e.dim == dim && e.name == unit) return e.scale;
  }
  ok = false;
  return 1.0;
}

double parse_quantity(std::string_view key, std::string_view raw, Dim dim) {
  const auto s = trim(raw);
  double value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || s.empty()) bad_value(key, raw, "expected a number");
  const auto unit = trim(std::string_view(ptr, static_cast<std::size_t>(s.data() + s.size() - ptr)));
  bool ok = false;
  const double scale = unit_scale(dim, unit, ok);
  if (!ok) bad_value(key, raw, "unsupported unit '" + std::string(unit) + "'");
  if (!std::isfinite(value)) bad_value(key, raw, "value must be finite");
  return value * scale;
}

long long parse_integer(std::string_view key, std::string_view raw) {
  const double v = parse_quantity(key, raw, Dim::plain);
  if (v != std::floor(v) || std::fabs(v) > 9.0e15) {
    bad_value(key, raw, "expected an integer");
  }
  return static_cast<long long>(v);
}

bool parse_bool(std::string_view key, std::string_view raw) {
  const auto s = unquote(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  bad_value(key, raw, "expected a boolean");
}

std::vector<std::string> split_list(std::string_view raw) {
  auto s = trim(raw);
  if (s.size() >= 2 && s.front() == '[' && s.back() == ']') s = s.substr(1, s.size() - 2);
  std::vector<std::string> out;
  while (!s.empty()) {
    const auto comma = s.find(',');
    const auto item = trim(s.substr(0, comma));
    if (!item.empty()) out.push_back(unquote(item));
    if (comma == std::string_view::npos) break;
    s.remove_prefix(comma + 1);
  }
  return out;
}

struct KeySpec {
  std::string name;
  bool numeric;
  std::function<void(SimConfig&, std::string_view)> assign;
  std::function<nlohmann::json(const SimConfig&)> get;
};

template <typename Ref>
KeySpec real_key(std::string name, Dim dim, Ref ref) {
  return {name, true,
          [name, dim, ref](SimConfig& c, std::string_view v) {
            ref(c) = parse_quantity(name, v, dim);
          },
          [ref](const SimConfig& c) {
            return nlohmann::json(ref(const_cast<SimConfig&>(c)));
          }};
}

template <typename Ref>
KeySpec int_key(std::string name, Ref ref) {
  return {name, true,
          [name, ref](SimConfig& c, std::string_view v) {
            ref(c) = static_cast<std::remove_reference_t<decltype(ref(c))>>(
                parse_integer(name, v));
          },
          [ref](const SimConfig& c) {
            return nlohmann::json(ref(const_cast<SimConfig&>(c)));
          }};
}

template <typename Ref>
KeySpec bool_key(std::string name, Ref ref) {
  return {name, false,
          [name, ref](SimConfig& c, std::string_view v) { ref(c) = parse_bool(name, v); },
          [ref](const SimConfig& c) {
            return nlohmann::json(ref(const_cast<SimConfig&>(c)));
          }};
}

template <typename Ref>
KeySpec text_key(std::string name, Ref ref) {
  return {name, false,
          [ref](SimConfig& c, std::string_view v) { ref(c) = unquote(v); },
          [ref](const SimConfig& c) {
            return nlohmann::json(ref(const_cast<SimConfig&>(c)));
          }};
}

const std::vector<KeySpec>& registry() {
  static const std::vector<KeySpec> keys = [] {
    std::vector<KeySpec> k;
    k.push_back(int_key("sim.steps", [](SimConfig& c) -> int& { return c.steps; }));
    k.push_back(int_key("sim.rounds", [](SimConfig& c) -> int& { return c.rounds; }));
    k.push_back({"sim.seed", true,
                 [](SimConfig& c, std::string_view v) {
                   const auto s = trim(v);
                   std::uint64_t seed = 0;
                   auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
                   if (ec != std::errc() || ptr != s.data() + s.size()) {
                     bad_value("sim.seed", v, "expected a non-negative integer");
                   }
                   c.seed = seed;
                 },
                 [](const SimConfig& c) { return nlohmann::json(c.seed); }});
    k.push_back(real_key("sim.initial_context", Dim::plain,
                         [](SimConfig& c) -> double& { return c.initial_context; }));

    k.push_back(real_key("slm.layers", Dim::plain,
                         [](SimConfig& c) -> double& { return c.slm.layers; }));
    k.push_back(real_key("slm.hidden_dim", Dim::plain,
                         [](SimConfig& c) -> double& { return c.slm.hidden_dim; }));
    k.push_back(real_key("slm.ffn_dim", Dim::plain,
                         [](SimConfig& c) -> double& { return c.slm.ffn_dim; }));
    k.push_back(real_key("slm.device_flops", Dim::flops,
                         [](SimConfig& c) -> double& { return c.slm.device_flops; }));
    k.push_back(real_key("slm.device_power_w", Dim::power,
                         [](SimConfig& c) -> double& { return c.slm.device_power; }));
    k.push_back(real_key("verifier.latency_s", Dim::time,
                         [](SimConfig& c) -> double& { return c.verifier.verify_latency; }));

    k.push_back(real_key("channel.bandwidth_hz", Dim::frequency,
                         [](SimConfig& c) -> double& { return c.bandwidth_hz; }));
    k.push_back(real_key("channel.tx_power_dbm", Dim::dbm,
                         [](SimConfig& c) -> double& { return c.tx_power_dbm; }));
    k.push_back(real_key("channel.noise_psd_dbm_hz", Dim::dbm_hz,
                         [](SimConfig& c) -> double& { return c.noise_psd_dbm_hz; }));
    k.push_back(real_key("channel.mean_gain", Dim::plain,
                         [](SimConfig& c) -> double& { return c.mean_gain; }));
    k.push_back(int_key("payload.bits_prob",
                        [](SimConfig& c) -> int& { return c.payload.bits_prob; }));
    k.push_back(int_key("payload.bits_index",
                        [](SimConfig& c) -> int& { return c.payload.bits_index; }));

    k.push_back({"generation.law", false,
                 [](SimConfig& c, std::string_view v) {
                   const auto s = unquote(v);
                   if (s == "gamma" || s == "gamma-sampler") {
                     c.law = EntropyLaw::gamma;
                   } else if (s == "trace" || s == "trace-replay") {
                     c.law = EntropyLaw::trace;
                   } else {
                     bad_value("generation.law", v, "expected 'gamma' or 'trace'");
                   }
                 },
                 [](const SimConfig& c) {
                   return nlohmann::json(c.law == EntropyLaw::gamma ? "gamma" : "trace");
                 }});
    k.push_back(real_key("generation.gamma_shape", Dim::plain,
                         [](SimConfig& c) -> double& { return c.gamma_shape; }));
    k.push_back(real_key("generation.gamma_scale", Dim::plain,
                         [](SimConfig& c) -> double& { return c.gamma_scale; }));
    k.push_back(real_key("generation.accept_coeff", Dim::plain,
                         [](SimConfig& c) -> double& { return c.accept_coeff; }));
    k.push_back(real_key("generation.cp", Dim::plain,
                         [](SimConfig& c) -> double& { return c.cp; }));
    k.push_back(int_key("generation.smax", [](SimConfig& c) -> int& { return c.smax; }));
    k.push_back(text_key("generation.trace_path",
                         [](SimConfig& c) -> std::string& { return c.trace_path; }));

    k.push_back(real_key("scheduler.v", Dim::plain,
                         [](SimConfig& c) -> double& { return c.scheduler.v; }));
    k.push_back(int_key("scheduler.gamma0",
                        [](SimConfig& c) -> int& { return c.scheduler.gamma0; }));
    k.push_back(real_key("scheduler.rho0", Dim::plain,
                         [](SimConfig& c) -> double& { return c.scheduler.rho0; }));
    k.push_back(real_key("scheduler.ewma_factor", Dim::plain,
                         [](SimConfig& c) -> double& { return c.scheduler.ewma_factor; }));
    k.push_back(real_key("scheduler.energy_budget_j", Dim::energy,
                         [](SimConfig& c) -> double& { return c.energy_budget_j; }));
    k.push_back(bool_key("scheduler.online_rho",
                         [](SimConfig& c) -> bool& { return c.online_rho; }));
    k.push_back(real_key("scheduler.initial_payload_bits", Dim::plain,
                         [](SimConfig& c) -> double& { return c.initial_payload_bits; }));

    k.push_back(bool_key("early_exit.enabled",
                         [](SimConfig& c) -> bool& { return c.early_exit; }));
    k.push_back(real_key("early_exit.cap_multiplier", Dim::plain,
                         [](SimConfig& c) -> double& { return c.cap_multiplier; }));
    k.push_back(real_key("early_exit.entropy_threshold", Dim::plain,
                         [](SimConfig& c) -> double& { return c.entropy_threshold_override; }));

    k.push_back(text_key("policy.kind",
                         [](SimConfig& c) -> std::string& { return c.policy_kind; }));
    k.push_back(int_key("policy.static_gamma",
                        [](SimConfig& c) -> int& { return c.static_gamma; }));
    k.push_back(real_key("policy.static_cp", Dim::plain,
                         [](SimConfig& c) -> double& { return c.static_cp; }));
    k.push_back(int_key("policy.dssd_gamma_max",
                        [](SimConfig& c) -> int& { return c.dssd_gamma_max; }));
    k.push_back(real_key("policy.dssd_rx_power_dbm", Dim::dbm,
                         [](SimConfig& c) -> double& { return c.dssd_rx_power_dbm; }));

    k.push_back(text_key("sweep.axis",
                         [](SimConfig& c) -> std::string& { return c.sweep_axis; }));
    k.push_back({"sweep.values", false,
                 [](SimConfig& c, std::string_view v) {
                   c.sweep_values.clear();
                   for (const auto& item : split_list(v)) {
                     c.sweep_values.push_back(parse_quantity("sweep.values", item, Dim::plain));
                   }
                 },
                 [](const SimConfig& c) { return nlohmann::json(c.sweep_values); }});
    k.push_back({"sweep.policies", false,
                 [](SimConfig& c, std::string_view v) { c.sweep_policies = split_list(v); },
                 [](const SimConfig& c) { return nlohmann::json(c.sweep_policies); }});

    k.push_back(int_key("verify.steps", [](SimConfig& c) -> int& { return c.verify_steps; }));
    k.push_back(int_key("verify.gamma0", [](SimConfig& c) -> int& { return c.verify_gamma0; }));
    k.push_back(int_key("verify.instances",
                        [](SimConfig& c) -> int& { return c.verify_instances; }));
    return k;
  }();
  return keys;
}

const KeySpec* find_key(std::string_view name) {
  for (const auto& k : registry()) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& k : registry()) out.push_back(k.name);
  return out;
}

void SimConfig::set(std::string_view key, std::string_view value) {
  const KeySpec* spec = find_key(trim(key));
  if (!spec) {
    throw ConfigError("unknown config key '" + std::string(trim(key)) + "'",
                      {std::string(trim(key))});
  }
  spec->assign(*this, value);
}

double SimConfig::numeric(std::string_view key) const {
  const KeySpec* spec = find_key(key);
  if (!spec || !spec->numeric) {
    throw ConfigError("'" + std::string(key) + "' is not a numeric config key",
                      {std::string(key)});
  }
  return spec->get(*this).get<double>();
}

void SimConfig::finalize() {
  std::vector<std::string> bad;
  std::ostringstream msg;
  auto check = [&](bool ok, const char* key, const char* rule) {
    if (!ok) {
      bad.emplace_back(key);
      msg << "\n  " << key << ": " << rule;
    }
  };
  check(steps >= 1, "sim.steps", "must be >= 1");
  check(rounds >= 1, "sim.rounds", "must be >= 1");
  check(initial_context >= 0, "sim.initial_context", "must be >= 0");
  check(slm.layers > 0, "slm.layers", "must be > 0");
  check(slm.hidden_dim > 0, "slm.hidden_dim", "must be > 0");
  check(slm.ffn_dim > 0, "slm.ffn_dim", "must be > 0");
  check(slm.device_flops > 0, "slm.device_flops", "must be > 0");
  check(slm.device_power > 0, "slm.device_power_w", "must be > 0");
  check(verifier.verify_latency >= 0, "verifier.latency_s", "must be >= 0");
  check(bandwidth_hz > 0, "channel.bandwidth_hz", "must be > 0");
  check(mean_gain > 0, "channel.mean_gain", "must be > 0");
  check(payload.bits_prob >= 1, "payload.bits_prob", "must be >= 1");
  check(payload.bits_index >= 1, "payload.bits_index", "must be >= 1");
  check(gamma_shape > 0, "generation.gamma_shape", "must be > 0");
  check(gamma_scale >= 0, "generation.gamma_scale", "must be > 0 (or 0 to derive)");
  check(accept_coeff > 0, "generation.accept_coeff", "must be > 0");
  check(cp > 0, "generation.cp", "must be > 0");
  check(smax >= 1, "generation.smax", "must be >= 1");
  check(law != EntropyLaw::trace || !trace_path.empty(), "generation.trace_path",
        "required when generation.law = trace");
  check(scheduler.v > 0, "scheduler.v", "must be > 0");
  check(scheduler.gamma0 >= 1, "scheduler.gamma0", "must be >= 1");
  check(scheduler.rho0 > 0 && scheduler.rho0 < 1, "scheduler.rho0", "must lie in (0, 1)");
  check(scheduler.ewma_factor >= 0 && scheduler.ewma_factor < 1, "scheduler.ewma_factor",
        "must lie in [0, 1)");
  check(energy_budget_j > 0, "scheduler.energy_budget_j", "must be > 0");
  check(initial_payload_bits >= 0, "scheduler.initial_payload_bits",
        "must be > 0 (or 0 to derive)");
  check(cap_multiplier > 0, "early_exit.cap_multiplier", "must be > 0");
  check(entropy_threshold_override >= 0, "early_exit.entropy_threshold",
        "must be > 0 (or 0 to derive)");
  check(policy_kind == "gelato" || policy_kind == "gelato_noexit" ||
            policy_kind == "static_sd" || policy_kind == "dssd",
        "policy.kind", "must be one of gelato, gelato_noexit, static_sd, dssd");
  check(static_gamma >= 1 && static_gamma <= scheduler.gamma0, "policy.static_gamma",
        "must lie in [1, scheduler.gamma0]");
  check(static_cp > 0, "policy.static_cp", "must be > 0");
  check(dssd_gamma_max >= 1, "policy.dssd_gamma_max", "must be >= 1");
  if (!sweep_axis.empty()) {
    const KeySpec* axis = find_key(sweep_axis);
    check(axis != nullptr && axis->numeric, "sweep.axis",
          "must name an existing numeric key");
  }
  check(verify_steps >= 1, "verify.steps", "must be >= 1");
  check(verify_gamma0 >= 1, "verify.gamma0", "must be >= 1");
  check(verify_instances >= 1, "verify.instances", "must be >= 1");
  if (!bad.empty()) {
    throw ConfigError("invalid configuration:" + msg.str(), bad);
  }

  entropy_threshold = entropy_threshold_override > 0
                          ? entropy_threshold_override
                          : phi_inverse(scheduler.rho0, accept_coeff);
  backlog_cap = cap_multiplier * entropy_threshold;
  effective_gamma_scale = gamma_scale > 0 ? gamma_scale : entropy_threshold / gamma_shape;

  trace.reset();
  if (law == EntropyLaw::trace) {
    try {
      auto loaded = std::make_shared<EntropyTrace>(load_trace(trace_path));
      if (loaded->size() == 0) throw std::runtime_error("trace has no rows");
      trace = std::move(loaded);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("generation.trace_path: ") + e.what(),
                        {"generation.trace_path"});
    }
  }
  payload_prior_bits =
      initial_payload_bits > 0
          ? initial_payload_bits
          : cp * std::exp(mean_entropy(entropy_model())) * payload.bits_per_entry();
}

ChannelConfig SimConfig::channel() const {
  ChannelConfig ch;
  ch.bandwidth = bandwidth_hz;
  ch.tx_power = tx_power_w();
  ch.noise_psd = dbm_to_watts(noise_psd_dbm_hz);
  ch.mean_gain = mean_gain;
  return ch;
}

EntropyModel SimConfig::entropy_model() const {
  EntropyModel m;
  m.law = law;
  m.gamma_shape = gamma_shape;
  m.gamma_scale = effective_gamma_scale > 0 ? effective_gamma_scale
                                            : entropy_threshold / gamma_shape;
  m.accept_coeff = accept_coeff;
  m.cp = cp;
  m.smax = smax;
  m.trace = trace;
  return m;
}

CostModel SimConfig::costs() const {
  return {slm, verifier, tx_power_w()};
}

nlohmann::json SimConfig::snapshot() const {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& k : registry()) {
    const auto dot = k.name.find('.');
    out[k.name.substr(0, dot)][k.name.substr(dot + 1)] = k.get(*this);
  }
  out["derived"] = {
      {"entropy_threshold", entropy_threshold},
      {"backlog_cap", backlog_cap},
      {"gamma_scale", effective_gamma_scale},
      {"payload_prior_bits", payload_prior_bits},
      {"tx_power_w", tx_power_w()},
      {"noise_psd_w_hz", dbm_to_watts(noise_psd_dbm_hz)},
      {"dssd_rx_power_w", dssd_rx_power_w()},
  };
  return out;
}

namespace {

SimConfig parse_text(std::string_view text, std::string_view origin,
                     const std::filesystem::path& base_dir) {
  SimConfig cfg;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(origin) + ":" + std::to_string(line_no) +
                            ": expected 'key = value'",
                        {});
    }
    std::string key(trim(line.substr(0, eq)));
    if (!section.empty()) key = section + "." + key;
    cfg.set(key, line.substr(eq + 1));
  }
  // Trace paths in a file are relative to that file.
  if (!base_dir.empty() && !cfg.trace_path.empty() &&
      std::filesystem::path(cfg.trace_path).is_relative()) {
    cfg.trace_path = (base_dir / cfg.trace_path).lexically_normal().string();
  }
  cfg.finalize();
  return cfg;
}

}  // namespace

SimConfig parse_config(std::string_view text, std::string_view origin) {
  return parse_text(text, origin, {});
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file " + path.string(), {});
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path.string(), path.parent_path());
}

}  // namespace gelato
