#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "gelato/rng.hpp"

namespace gelato {

/// One drafted token as seen by the controller: its generative entropy, the
/// size of its top-p set and the uniform variate that decides acceptance.
struct DraftToken {
  double entropy = 0;   // nats
  int topp_size = 1;    // |S|
  double accept_draw = 0;  // in [0, 1)
};

struct VerifyResult {
  int accepted_prefix = 0;
  int total_appended = 1;  // accepted prefix + bonus token
};

/// Recorded (entropy, top-p size) rows replayed in order.
struct EntropyTrace {
  std::vector<double> entropy;
  std::vector<int> topp_size;

  std::size_t size() const { return entropy.size(); }
};

/// CSV with header `entropy_nats,topp_size`. Throws std::runtime_error on IO
/// or parse failures (message carries the line number).
EntropyTrace load_trace(const std::filesystem::path& path);

enum class EntropyLaw { gamma, trace };

struct EntropyModel {
  EntropyLaw law = EntropyLaw::gamma;
  double gamma_shape = 2.0;
  double gamma_scale = 0.150515;  // mean = shape * scale
  double accept_coeff = 0.35;     // phi(H) = exp(-a H)
  double cp = 1.0;                // top-p set size multiplier
  int smax = 256;
  std::shared_ptr<const EntropyTrace> trace;
};

void validate(const EntropyModel& model);

/// Acceptance probability of a token with entropy H.
double phi(double entropy, double accept_coeff);

/// Entropy at which the acceptance probability equals rho.
double phi_inverse(double rho, double accept_coeff);

/// Effective top-p support: clamp(ceil(cp * exp(H)), 1, smax).
int topp_size(double entropy, double cp, int smax);

/// Mean entropy of the model (analytic for gamma, sample mean for a trace).
double mean_entropy(const EntropyModel& model);

/// Token i of the maximal all-accepted prefix is accepted iff u_i < phi(H_i).
VerifyResult verify(std::span<const DraftToken> tokens, double accept_coeff);

/// Per-run token generator.
///
/// Gamma mode draws the entropy of token (step, index) from the entropy
/// stream at that address; trace mode reads the next row of the trace. In both
/// modes the acceptance variate comes from the accept stream at
/// (step, index), so any two consumers drafting the same positions observe the
/// same outcomes.
class TokenSource {
 public:
  TokenSource(EntropyModel model, RngStreams streams);

  /// Returns std::nullopt once a trace is exhausted. `coverage` scales the
  /// top-p set (1.0 = model default).
  std::optional<DraftToken> draw(std::uint64_t step, std::uint32_t index,
                                 double coverage = 1.0);

  void rewind() { cursor_ = 0; }
  std::size_t cursor() const { return cursor_; }
  const EntropyModel& model() const { return model_; }

 private:
  EntropyModel model_;
  RngStreams streams_;
  std::size_t cursor_ = 0;
};

}  // namespace gelato
