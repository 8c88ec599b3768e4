#pragma once

// Device-side drafting cost and edge verification latency.

namespace gelato {

/// Architecture and hardware of the on-device draft model.
struct SlmProfile {
  double layers = 24;        // transformer layers
  double hidden_dim = 896;   // d_model
  double ffn_dim = 4864;     // feed-forward width
  double device_flops = 40e9;  // FLOP/s
  double device_power = 12.0;  // W, steady-state decoding power
};

struct VerifierProfile {
  double verify_latency = 0.1;  // s, one parallel verification pass
};

/// FLOPs needed to draft `draft_len` tokens on top of `context_len` tokens
/// of committed context. Uses the average context L + gamma/2 over the
/// autoregressive pass. Throws std::invalid_argument if draft_len < 1 or any
/// dimension is non-positive.
double draft_flops(const SlmProfile& profile, double context_len, int draft_len);

/// Wall-clock drafting latency in seconds.
double draft_latency(const SlmProfile& profile, double context_len, int draft_len);

/// Device compute energy in joules for a drafting pass of `latency` seconds.
double draft_energy(const SlmProfile& profile, double latency);

void validate(const SlmProfile& profile);

}  // namespace gelato
