#pragma once

#include <optional>
#include <vector>

#include "gelato/generation.hpp"

namespace gelato {

/// Leaky bucket over per-token entropy. Each token adds its entropy and the
/// bucket drains `drain` nats per token; drafting stops once the level passes
/// `cap`.
struct UncertaintyBucket {
  double level = 0;  // nats
  double drain = 0.30103;
  double cap = 0.36124;
};

UncertaintyBucket bucket_step(UncertaintyBucket bucket, double entropy);

/// Cap as a multiple of the entropy threshold.
double default_cap(double entropy_threshold, double multiplier);

struct DraftOutcome {
  std::vector<DraftToken> tokens;  // transmitted tokens, size == sent
  int sent = 0;
  bool exhausted = false;  // token source ran dry before the draft completed
};

/// Drafts up to `budget` tokens, pulling token i (1-based) from
/// `next(i)`. With `early_exit`, stops right after the first token that pushes
/// the bucket over its cap; that token is still transmitted, so at least one
/// token is always sent.
template <typename NextToken>
DraftOutcome drafting_loop(int budget, NextToken&& next,
                           UncertaintyBucket bucket, bool early_exit = true) {
  DraftOutcome out;
  out.tokens.reserve(static_cast<std::size_t>(budget));
  for (int i = 1; i <= budget; ++i) {
    std::optional<DraftToken> tok = next(i);
    if (!tok) {
      out.exhausted = true;
      break;
    }
    out.tokens.push_back(*tok);
    bucket = bucket_step(bucket, tok->entropy);
    if (early_exit && bucket.level > bucket.cap) break;
  }
  out.sent = static_cast<int>(out.tokens.size());
  return out;
}

}  // namespace gelato
