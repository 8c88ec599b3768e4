#include "gelato/compute_model.hpp"

#include <cmath>
#include <stdexcept>

namespace gelato {

void validate(const SlmProfile& p) {
  if (!(p.layers > 0) || !(p.hidden_dim > 0) || !(p.ffn_dim > 0)) {
    throw std::invalid_argument("SLM dimensions must be positive");
  }
  if (!(p.device_flops > 0) || !std::isfinite(p.device_flops)) {
    throw std::invalid_argument("device_flops must be positive and finite");
  }
  if (!(p.device_power > 0) || !std::isfinite(p.device_power)) {
    throw std::invalid_argument("device_power must be positive and finite");
  }
}

double draft_flops(const SlmProfile& p, double context_len, int draft_len) {
  if (draft_len < 1) {
    throw std::invalid_argument("draft length must be at least 1");
  }
  if (context_len < 0) {
    throw std::invalid_argument("context length must be non-negative");
  }
  if (!(p.layers > 0) || !(p.hidden_dim > 0) || !(p.ffn_dim > 0)) {
    throw std::invalid_argument("SLM dimensions must be positive");
  }
  const double d = p.hidden_dim;
  const double g = draft_len;
  const double per_token = 6.0 * d * d + 4.0 * (context_len + g / 2.0) * d +
                           2.0 * d * d + 4.0 * d * p.ffn_dim;
  return p.layers * g * per_token;
}

double draft_latency(const SlmProfile& p, double context_len, int draft_len) {
  if (!(p.device_flops > 0)) {
    throw std::invalid_argument("device_flops must be positive");
  }
  return draft_flops(p, context_len, draft_len) / p.device_flops;
}

double draft_energy(const SlmProfile& p, double latency) {
  if (latency < 0) {
    throw std::invalid_argument("latency must be non-negative");
  }
  return p.device_power * latency;
}

}  // namespace gelato
