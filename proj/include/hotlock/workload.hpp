#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hotlock/engine.hpp"

namespace hotlock {

enum class WorkloadKind : std::uint8_t {
  kHotspotUpdate,
  kUniformUpdate,
  kReadWriteMix,
  kHotspotScan,
  kTransfer,
};

std::string_view to_string(WorkloadKind k);
WorkloadKind parse_workload(std::string_view s);

inline constexpr std::uint32_t kMainSpace = 1;
inline constexpr std::uint32_t kLedgerSpace = 2;

struct WorkloadSpec {
  WorkloadKind kind = WorkloadKind::kHotspotUpdate;
  std::uint32_t threads = 8;
  double duration_s = 0;         // used when txn_count is 0
  std::uint64_t txn_count = 0;   // transactions started, across all threads
  std::uint32_t tl = 1;
  double write_ratio = 0.5;
  double skew = 0.7;
  std::uint64_t table_rows = 10000;
  std::uint32_t hot_rows = 1;
  // ReadWriteMix only: every transaction opens with an increment of the hot
  // key; the other tl - 1 operations never touch it.
  bool hot_write = false;
  double fixed_tps = 0;          // 0: closed loop
  // Bursty arrivals under fixed_tps: on for burst_on_ms, silent for burst_off_ms.
  double burst_on_ms = 0;
  double burst_off_ms = 0;
  double inject_abort = 0;
  std::int64_t initial_value = 0;
  std::uint64_t seed = 42;

  // Throws ConfigError.
  void validate() const;
};

struct MetricsReport {
  double tps = 0;
  double p50_latency_ms = 0;
  double p95_latency_ms = 0;
  double p99_latency_ms = 0;
  std::array<std::uint64_t, 4> abort_count{};  // indexed by AbortCause
  std::uint64_t lock_acquisitions = 0;
  double locks_per_query = 0;
  double lock_wait_time_ms = 0;
  std::uint64_t hotspot_promotions = 0;
  std::uint64_t hotspot_evictions = 0;
  std::uint64_t group_count = 0;
  double avg_group_size = 0;

  // Not part of the report document.
  std::uint64_t started = 0;
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  std::uint64_t queries = 0;
  double wall_s = 0;
};

std::string report_json(const MetricsReport& m);
std::string report_csv_header();
std::string report_csv_row(const MetricsReport& m);

// Rows the workload touches. Hot keys are the lowest indices of kMainSpace.
void prepare_tables(Engine& engine, const WorkloadSpec& spec);
// Runs the client threads against a prepared engine.
MetricsReport run_workload(Engine& engine, const WorkloadSpec& spec);

// The row HotspotUpdate and Transfer hammer.
inline RowId hot_row() { return row_at(kMainSpace, 0); }

}  // namespace hotlock
