#pragma once

#include <cstdint>
#include <span>

#include "gelato/rng.hpp"

namespace gelato {

/// Uplink radio parameters. Path loss is folded into `mean_gain`.
struct ChannelConfig {
  double bandwidth = 1e6;          // Hz
  double tx_power = 0.19952623;    // W (23 dBm)
  double noise_psd = 3.9810717e-21;  // W/Hz (-174 dBm/Hz)
  double mean_gain = 1e-10;        // linear
};

struct ChannelSample {
  double gain = 0;  // linear power gain h
  double rate = 0;  // bits/s
};

/// Bit widths of one compressed top-p entry.
struct PayloadSpec {
  int bits_prob = 16;
  int bits_index = 18;

  int bits_per_entry() const { return bits_prob + bits_index; }
};

struct LinkCost {
  double latency = 0;  // s
  double energy = 0;   // J
};

double dbm_to_watts(double dbm);

void validate(const ChannelConfig& cfg);

/// Rayleigh block fading: h = mean_gain * Exp(1), drawn from the channel
/// stream at `step`.
double sample_gain(const ChannelConfig& cfg, const RngStreams& streams,
                   std::uint64_t step);

/// B log2(1 + p h / (N0 B)).
double shannon_rate(const ChannelConfig& cfg, double gain);

ChannelSample make_sample(const ChannelConfig& cfg, double gain);

/// Compressed payload size: sum of |S_i| * (b_prob + b_index).
double payload_bits(std::span<const int> set_sizes, const PayloadSpec& spec);

/// Transfer time and radio energy for `bits` at `rate` with radio power
/// `power`. Throws std::invalid_argument if rate <= 0.
LinkCost link_cost(double bits, double rate, double power);

}  // namespace gelato
