#include "gelato/channel.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace gelato {

double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

void validate(const ChannelConfig& cfg) {
  if (!(cfg.bandwidth > 0)) throw std::invalid_argument("bandwidth must be > 0");
  if (!(cfg.tx_power > 0)) throw std::invalid_argument("tx power must be > 0");
  if (!(cfg.noise_psd > 0)) throw std::invalid_argument("noise PSD must be > 0");
  if (!(cfg.mean_gain > 0)) throw std::invalid_argument("mean gain must be > 0");
}

double sample_gain(const ChannelConfig& cfg, const RngStreams& streams,
                   std::uint64_t step) {
  auto engine = streams.engine(Stream::channel, step);
  // 1 - u lies in (0, 1], so the draw is finite; the max() keeps h > 0.
  const double x = -std::log1p(-uniform01(engine));
  return cfg.mean_gain * std::max(x, 0x1.0p-60);
}

double shannon_rate(const ChannelConfig& cfg, double gain) {
  const double snr = cfg.tx_power * gain / (cfg.noise_psd * cfg.bandwidth);
  return cfg.bandwidth * std::log1p(snr) / std::numbers::ln2;
}

ChannelSample make_sample(const ChannelConfig& cfg, double gain) {
  return {gain, shannon_rate(cfg, gain)};
}

double payload_bits(std::span<const int> set_sizes, const PayloadSpec& spec) {
  double entries = 0;
  for (int s : set_sizes) {
    if (s < 1) throw std::invalid_argument("top-p set size must be >= 1");
    entries += s;
  }
  return entries * spec.bits_per_entry();
}

LinkCost link_cost(double bits, double rate, double power) {
  if (!(rate > 0)) throw std::invalid_argument("link rate must be > 0");
  const double t = bits / rate;
  return {t, power * t};
}

}  // namespace gelato
