#include "hotlock/workload.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "hotlock/zipf.hpp"

namespace hotlock {

std::string_view to_string(WorkloadKind k) {
  switch (k) {
    case WorkloadKind::kHotspotUpdate: return "hotspot_update";
    case WorkloadKind::kUniformUpdate: return "uniform_update";
    case WorkloadKind::kReadWriteMix: return "rw_mix";
    case WorkloadKind::kHotspotScan: return "hotspot_scan";
    case WorkloadKind::kTransfer: return "transfer";
  }
  return "?";
}

WorkloadKind parse_workload(std::string_view s) {
  for (auto k : {WorkloadKind::kHotspotUpdate, WorkloadKind::kUniformUpdate,
                 WorkloadKind::kReadWriteMix, WorkloadKind::kHotspotScan, WorkloadKind::kTransfer})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown workload '" + std::string(s) + "'");
}

void WorkloadSpec::validate() const {
  if (threads < 1) throw ConfigError("threads must be at least 1");
  if (tl < 1) throw ConfigError("tl must be at least 1");
  if (!(write_ratio >= 0 && write_ratio <= 1)) throw ConfigError("rw must be in [0, 1]");
  if (!(skew >= 0)) throw ConfigError("skew must be non-negative");
  if (!(inject_abort >= 0 && inject_abort < 1)) throw ConfigError("inject-abort must be in [0, 1)");
  if (txn_count == 0 && !(duration_s > 0)) throw ConfigError("need --txns or --duration");
  if (table_rows < 1) throw ConfigError("table_rows must be at least 1");
  if (fixed_tps < 0) throw ConfigError("fixed-tps must be non-negative");
  if (burst_on_ms < 0 || burst_off_ms < 0) throw ConfigError("burst lengths must be non-negative");
  if (burst_off_ms > 0 && !(burst_on_ms > 0)) throw ConfigError("burst-off needs burst-on");
  if (hot_rows > table_rows) throw ConfigError("hot_rows exceeds table_rows");
  if (hot_write && kind != WorkloadKind::kReadWriteMix) throw ConfigError("hot-write needs rw_mix");
  if (hot_write && tl > table_rows) throw ConfigError("tl exceeds table_rows");
  if (kind == WorkloadKind::kHotspotScan) {
    if (hot_rows == 0) throw ConfigError("hotspot_scan needs hot_rows > 0");
    if (hot_rows < tl) throw ConfigError("hotspot_scan needs hot_rows >= tl");
  }
  if ((kind == WorkloadKind::kUniformUpdate || kind == WorkloadKind::kReadWriteMix) &&
      tl > table_rows)
    throw ConfigError("tl exceeds table_rows");
}

void prepare_tables(Engine& engine, const WorkloadSpec& spec) {
  spec.validate();
  engine.load_rows(kMainSpace, spec.table_rows, Value::of_int(spec.initial_value));
  if (spec.kind == WorkloadKind::kTransfer)
    engine.load_rows(kLedgerSpace, spec.table_rows, Value::of_int(0));
}

namespace {

using Rng = std::mt19937_64;

struct ThreadResult {
  std::vector<double> latency_us;
  std::uint64_t started = 0;
  std::uint64_t committed = 0;
  std::uint64_t queries = 0;
};

// Distinct keys in ascending order.
template <typename Draw>
std::vector<std::uint64_t> distinct_keys(std::uint32_t n, Draw draw) {
  std::vector<std::uint64_t> keys;
  keys.reserve(n);
  while (keys.size() < n) {
    std::uint64_t k = draw();
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

class Client {
 public:
  Client(Engine& engine, const WorkloadSpec& spec, const ZipfSampler& zipf, std::uint64_t seed)
      : engine_(engine), spec_(spec), zipf_(zipf), rng_(seed) {}

  // True if the transaction committed. Abort causes are counted by the engine.
  bool run_one(ThreadResult& out) {
    TxnPtr txn = engine_.begin();
    Status s = body(txn, out);
    if (s != Status::kOk) {
      engine_.rollback(txn, cause_of(s));
      return false;
    }
    if (spec_.inject_abort > 0 && coin(spec_.inject_abort)) {
      engine_.rollback(txn, AbortCause::kInjected);
      return false;
    }
    return engine_.commit(txn) == Status::kOk;
  }

 private:
  bool coin(double p) { return std::uniform_real_distribution<double>(0, 1)(rng_) < p; }
  std::uint64_t uniform(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(rng_);
  }

  Status body(const TxnPtr& txn, ThreadResult& out) {
    auto inc = [&](const RowId& row) {
      ++out.queries;
      return engine_.increment(txn, row, 1);
    };
    switch (spec_.kind) {
      case WorkloadKind::kHotspotUpdate:
        for (std::uint32_t i = 0; i < spec_.tl; ++i)
          if (Status s = inc(hot_row()); s != Status::kOk) return s;
        break;
      case WorkloadKind::kUniformUpdate:
        for (auto k : distinct_keys(spec_.tl, [&] { return uniform(spec_.table_rows); }))
          if (Status s = inc(row_at(kMainSpace, k)); s != Status::kOk) return s;
        break;
      case WorkloadKind::kReadWriteMix: {
        std::uint32_t rest = spec_.tl;
        if (spec_.hot_write) {
          if (Status s = inc(hot_row()); s != Status::kOk) return s;
          --rest;
        }
        auto draw = [&] {
          for (;;)
            if (auto k = zipf_(rng_); !spec_.hot_write || k != 0) return k;
        };
        for (auto k : distinct_keys(rest, draw)) {
          RowId row = row_at(kMainSpace, k);
          Status s;
          if (coin(spec_.write_ratio)) {
            s = inc(row);
          } else {
            ++out.queries;
            s = engine_.read_for_share(txn, row, nullptr);
          }
          if (s != Status::kOk) return s;
        }
        break;
      }
      case WorkloadKind::kHotspotScan:
        for (auto k : distinct_keys(spec_.tl, [&] { return uniform(spec_.hot_rows); }))
          if (Status s = inc(row_at(kMainSpace, k)); s != Status::kOk) return s;
        break;
      case WorkloadKind::kTransfer: {
        if (Status s = inc(hot_row()); s != Status::kOk) return s;
        if (Status s = inc(row_at(kLedgerSpace, uniform(spec_.table_rows))); s != Status::kOk)
          return s;
        break;
      }
    }
    return Status::kOk;
  }

  Engine& engine_;
  const WorkloadSpec& spec_;
  const ZipfSampler& zipf_;
  Rng rng_;
};

double percentile(std::vector<double>& v, double p) {
  if (v.empty()) return 0;
  std::size_t idx = static_cast<std::size_t>(std::ceil(p * static_cast<double>(v.size()))) ;
  idx = std::min(v.size() - 1, idx == 0 ? 0 : idx - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(idx), v.end());
  return v[idx];
}

// Arrival time of the k-th token, in seconds from the start.
double arrival_s(const WorkloadSpec& spec, std::uint64_t k) {
  if (spec.burst_on_ms <= 0 || spec.burst_off_ms <= 0) return static_cast<double>(k) / spec.fixed_tps;
  double on = spec.burst_on_ms / 1000.0;
  double period = on + spec.burst_off_ms / 1000.0;
  auto per_burst = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(spec.fixed_tps * on));
  return static_cast<double>(k / per_burst) * period +
         static_cast<double>(k % per_burst) / spec.fixed_tps;
}

}  // namespace

MetricsReport run_workload(Engine& engine, const WorkloadSpec& spec) {
  spec.validate();
  const ZipfSampler zipf(spec.table_rows, spec.kind == WorkloadKind::kReadWriteMix ? spec.skew : 0.0);
  const EngineStats before = engine.stats();

  std::atomic<bool> stop{false};
  std::atomic<std::uint64_t> tickets{0};
  std::vector<ThreadResult> results(spec.threads);
  const auto start = Clock::now();

  auto worker = [&](std::uint32_t tid) {
    Client client(engine, spec, zipf, spec.seed * 1000003 + tid);
    ThreadResult& out = results[tid];
    while (!stop.load(std::memory_order_relaxed)) {
      std::uint64_t k = tickets.fetch_add(1);
      if (spec.txn_count > 0 && k >= spec.txn_count) break;
      Clock::time_point arrival = Clock::now();
      if (spec.fixed_tps > 0) {
        arrival = start + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(arrival_s(spec, k)));
        std::this_thread::sleep_until(arrival);
        if (stop.load(std::memory_order_relaxed)) break;
      }
      ++out.started;
      if (client.run_one(out)) {
        ++out.committed;
        out.latency_us.push_back(
            std::chrono::duration<double, std::micro>(Clock::now() - arrival).count());
      }
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(spec.threads);
  for (std::uint32_t t = 0; t < spec.threads; ++t) threads.emplace_back(worker, t);
  if (spec.txn_count == 0) {
    std::this_thread::sleep_for(std::chrono::duration<double>(spec.duration_s));
    stop.store(true);
  }
  for (auto& t : threads) t.join();
  const double wall = std::chrono::duration<double>(Clock::now() - start).count();
  const EngineStats after = engine.stats();

  MetricsReport m;
  std::vector<double> lat;
  for (auto& r : results) {
    m.started += r.started;
    m.committed += r.committed;
    m.queries += r.queries;
    lat.insert(lat.end(), r.latency_us.begin(), r.latency_us.end());
  }
  for (std::size_t c = 0; c < m.abort_count.size(); ++c) {
    m.abort_count[c] = after.aborts_by_cause[c] - before.aborts_by_cause[c];
    m.aborted += m.abort_count[c];
  }
  m.wall_s = wall;
  m.tps = wall > 0 ? static_cast<double>(m.committed) / wall : 0;
  m.p50_latency_ms = percentile(lat, 0.50) / 1000.0;
  m.p95_latency_ms = percentile(lat, 0.95) / 1000.0;
  m.p99_latency_ms = percentile(lat, 0.99) / 1000.0;
  m.lock_acquisitions = after.locks.acquisitions - before.locks.acquisitions;
  m.locks_per_query =
      m.queries ? static_cast<double>(m.lock_acquisitions) / static_cast<double>(m.queries) : 0;
  m.lock_wait_time_ms = static_cast<double>(after.locks.wait_time_ns - before.locks.wait_time_ns) / 1e6;
  m.hotspot_promotions = after.hot.promotions - before.hot.promotions;
  m.hotspot_evictions = after.hot.evictions - before.hot.evictions;
  m.group_count = after.hot.groups - before.hot.groups;
  const auto members = after.hot.group_members - before.hot.group_members;
  m.avg_group_size = m.group_count ? static_cast<double>(members) / static_cast<double>(m.group_count) : 0;
  return m;
}

std::string report_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["tps"] = m.tps;
  j["p50_latency_ms"] = m.p50_latency_ms;
  j["p95_latency_ms"] = m.p95_latency_ms;
  j["p99_latency_ms"] = m.p99_latency_ms;
  nlohmann::ordered_json a;
  for (auto c : {AbortCause::kTimeout, AbortCause::kRuleAbort, AbortCause::kCascade,
                 AbortCause::kInjected})
    a[std::string(to_string(c))] = m.abort_count[static_cast<std::size_t>(c)];
  j["abort_count"] = a;
  j["lock_acquisitions"] = m.lock_acquisitions;
  j["locks_per_query"] = m.locks_per_query;
  j["lock_wait_time_ms"] = m.lock_wait_time_ms;
  j["hotspot_promotions"] = m.hotspot_promotions;
  j["hotspot_evictions"] = m.hotspot_evictions;
  j["group_count"] = m.group_count;
  j["avg_group_size"] = m.avg_group_size;
  return j.dump(2);
}

std::string report_csv_header() {
  return "tps,p50_latency_ms,p95_latency_ms,p99_latency_ms,abort_timeout,abort_rule_abort,"
         "abort_cascade,abort_injected,lock_acquisitions,locks_per_query,lock_wait_time_ms,"
         "hotspot_promotions,hotspot_evictions,group_count,avg_group_size";
}

std::string report_csv_row(const MetricsReport& m) {
  std::ostringstream o;
  o << m.tps << ',' << m.p50_latency_ms << ',' << m.p95_latency_ms << ',' << m.p99_latency_ms;
  for (auto n : m.abort_count) o << ',' << n;
  o << ',' << m.lock_acquisitions << ',' << m.locks_per_query << ',' << m.lock_wait_time_ms << ','
    << m.hotspot_promotions << ',' << m.hotspot_evictions << ',' << m.group_count << ','
    << m.avg_group_size;
  return o.str();
}

}  // namespace hotlock
