#include "gelato/generation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>

namespace gelato {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

EntropyTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  std::string line;
  if (!std::getline(in, line) || trim(line) != "entropy_nats,topp_size") {
    throw std::runtime_error(path.string() +
                             ": expected header 'entropy_nats,topp_size'");
  }
  EntropyTrace trace;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty()) continue;
    const auto comma = row.find(',');
    double h = 0;
    int s = 0;
    if (comma == std::string_view::npos || !parse_number(row.substr(0, comma), h) ||
        !parse_number(row.substr(comma + 1), s)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": malformed row");
    }
    if (!(h >= 0) || s < 1) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                               ": entropy must be >= 0 and topp_size >= 1");
    }
    trace.entropy.push_back(h);
    trace.topp_size.push_back(s);
  }
  return trace;
}

void validate(const EntropyModel& m) {
  if (!(m.accept_coeff > 0)) throw std::invalid_argument("accept_coeff must be > 0");
  if (!(m.cp > 0)) throw std::invalid_argument("cp must be > 0");
  if (m.smax < 1) throw std::invalid_argument("smax must be >= 1");
  if (m.law == EntropyLaw::gamma) {
    if (!(m.gamma_shape > 0) || !(m.gamma_scale > 0)) {
      throw std::invalid_argument("gamma shape and scale must be > 0");
    }
  } else if (!m.trace || m.trace->size() == 0) {
    throw std::invalid_argument("trace law requires a non-empty trace");
  }
}

double phi(double entropy, double accept_coeff) {
  return std::exp(-accept_coeff * entropy);
}

double phi_inverse(double rho, double accept_coeff) {
  if (!(rho > 0) || rho > 1) {
    throw std::invalid_argument("rho must lie in (0, 1]");
  }
  if (!(accept_coeff > 0)) throw std::invalid_argument("accept_coeff must be > 0");
  return -std::log(rho) / accept_coeff;
}

int topp_size(double entropy, double cp, int smax) {
  // Relative slack absorbs rounding in exp(log(n)) for integral perplexities.
  const double support = cp * std::exp(entropy) * (1.0 - 1e-12);
  const double c = std::ceil(support);
  if (!(c < smax)) return smax;
  return std::max(1, static_cast<int>(c));
}

double mean_entropy(const EntropyModel& m) {
  if (m.law == EntropyLaw::gamma) return m.gamma_shape * m.gamma_scale;
  if (!m.trace || m.trace->size() == 0) return 0;
  double sum = 0;
  for (double h : m.trace->entropy) sum += h;
  return sum / static_cast<double>(m.trace->size());
}

VerifyResult verify(std::span<const DraftToken> tokens, double accept_coeff) {
  VerifyResult r;
  for (const auto& t : tokens) {
    if (!(t.accept_draw < phi(t.entropy, accept_coeff))) break;
    ++r.accepted_prefix;
  }
  r.total_appended = r.accepted_prefix + 1;
  return r;
}

TokenSource::TokenSource(EntropyModel model, RngStreams streams)
    : model_(std::move(model)), streams_(streams) {}

std::optional<DraftToken> TokenSource::draw(std::uint64_t step,
                                            std::uint32_t index,
                                            double coverage) {
  DraftToken t;
  if (model_.law == EntropyLaw::gamma) {
    auto engine = streams_.engine(Stream::entropy, step, index);
    std::gamma_distribution<double> law(model_.gamma_shape, model_.gamma_scale);
    t.entropy = law(engine);
    t.topp_size = topp_size(t.entropy, model_.cp * coverage, model_.smax);
  } else {
    if (!model_.trace || cursor_ >= model_.trace->size()) return std::nullopt;
    t.entropy = model_.trace->entropy[cursor_];
    const int recorded = model_.trace->topp_size[cursor_];
    t.topp_size = recorded;
    if (coverage != 1.0) {
      t.topp_size = std::clamp(
          static_cast<int>(std::ceil(coverage * recorded * (1.0 - 1e-12))), 1,
          model_.smax);
    }
    ++cursor_;
  }
  auto engine = streams_.engine(Stream::accept, step, index);
  t.accept_draw = uniform01(engine);
  return t;
}

}  // namespace gelato
