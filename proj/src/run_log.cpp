#include "gelato/run_log.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace gelato {

std::string format_double(double x) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_run_csv(const RunRecord& record, std::ostream& out) {
  out << kRunCsvHeader << '\n';
  for (const auto& s : record.steps) {
    out << s.step << ',' << s.budget << ',' << s.sent << ',' << s.hits << ','
        << format_double(s.latency) << ',' << format_double(s.energy) << ','
        << format_double(s.uplink_bits) << ',' << format_double(s.queue_after) << ','
        << format_double(s.gain) << '\n';
  }
}

void write_run_csv(const RunRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_run_csv(record, out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

nlohmann::json run_sidecar(const RunRecord& record) {
  return {
      {"format_version", kFormatVersion},
      {"seed", record.seed},
      {"policy", record.policy.name},
      {"steps", record.steps.size()},
      {"partial", record.partial},
      {"config", record.config.snapshot()},
  };
}

namespace {

template <typename T>
T field(std::string_view s, const std::string& where) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw std::runtime_error(where + ": bad field '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

std::vector<RunCsvRow> read_run_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kRunCsvHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<RunCsvRow> rows;
  std::size_t n = 1;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(n);
    std::vector<std::string_view> f;
    std::string_view rest(line);
    while (true) {
      const auto c = rest.find(',');
      f.push_back(rest.substr(0, c));
      if (c == std::string_view::npos) break;
      rest.remove_prefix(c + 1);
    }
    if (f.size() != 9) throw std::runtime_error(where + ": expected 9 columns");
    RunCsvRow r;
    r.k = field<long long>(f[0], where);
    r.gamma_budget = field<int>(f[1], where);
    r.gamma_sent = field<int>(f[2], where);
    r.hits = field<int>(f[3], where);
    r.latency_s = field<double>(f[4], where);
    r.energy_j = field<double>(f[5], where);
    r.uplink_bits = field<double>(f[6], where);
    r.queue_j = field<double>(f[7], where);
    r.gain = field<double>(f[8], where);
    rows.push_back(r);
  }
  return rows;
}

nlohmann::json to_json(const MetricStat& s) { return {{"mean", s.mean}, {"ci", s.ci}}; }

nlohmann::json to_json(const AggregateMetrics& a) {
  return {
      {"rounds", a.rounds},
      {"avg_throughput", to_json(a.throughput)},
      {"avg_energy", to_json(a.energy)},
      {"avg_budget", to_json(a.budget)},
      {"avg_sent", to_json(a.sent)},
      {"acceptance_rate", to_json(a.acceptance)},
      {"mean_queue", to_json(a.mean_queue)},
      {"final_queue", to_json(a.final_queue)},
  };
}

nlohmann::json to_json(const Metrics& m) {
  return {
      {"steps", m.steps},
      {"avg_throughput", m.avg_throughput},
      {"avg_energy", m.avg_energy},
      {"avg_budget", m.avg_budget},
      {"avg_sent", m.avg_sent},
      {"acceptance_rate", m.acceptance_rate},
      {"mean_queue", m.mean_queue},
      {"max_queue", m.max_queue},
      {"final_queue", m.final_queue},
  };
}

}  // namespace gelato
