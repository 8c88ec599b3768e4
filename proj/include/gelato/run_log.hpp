#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "gelato/simulator.hpp"

namespace gelato {

/// Bumped whenever a column or field of the emitted files changes.
inline constexpr int kFormatVersion = 1;

inline constexpr const char* kRunCsvHeader =
    "k,gamma_budget,gamma_sent,hits,latency_s,energy_j,uplink_bits,queue_j,gain";
inline constexpr const char* kSummaryCsvHeader =
    "round,seed,steps,partial,avg_throughput,avg_energy,avg_budget,avg_sent,"
    "acceptance_rate,mean_queue,final_queue";
inline constexpr const char* kSweepCsvHeader =
    "axis_value,policy,mean_throughput,ci_throughput,mean_energy,ci_energy";
inline constexpr const char* kCalibrationCsvHeader =
    "bin_lo,bin_hi,bin_center,samples,accepted,empirical_rho,fitted_rho";

/// Shortest representation that round-trips to the same double.
std::string format_double(double x);

void write_run_csv(const RunRecord& record, std::ostream& out);
void write_run_csv(const RunRecord& record, const std::filesystem::path& path);

/// Config snapshot, seed, policy and completion status of a run.
nlohmann::json run_sidecar(const RunRecord& record);

struct RunCsvRow {
  long long k = 0;
  int gamma_budget = 0;
  int gamma_sent = 0;
  int hits = 0;
  double latency_s = 0;
  double energy_j = 0;
  double uplink_bits = 0;
  double queue_j = 0;
  double gain = 0;
};

/// Parses a run CSV; throws std::runtime_error on a header or row mismatch.
std::vector<RunCsvRow> read_run_csv(const std::filesystem::path& path);

nlohmann::json to_json(const MetricStat& s);
nlohmann::json to_json(const AggregateMetrics& a);
nlohmann::json to_json(const Metrics& m);

}  // namespace gelato
