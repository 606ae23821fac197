// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fails.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "hotlock/engine.hpp"
#include "hotlock/history.hpp"
#include "hotlock/recovery.hpp"
#include "hotlock/undo_log.hpp"
#include "hotlock/workload.hpp"

using namespace hotlock;
using namespace std::chrono_literals;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Verdict {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void report(int id, const std::string& name, const Verdict& v) {
  std::cout << (v.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << v.detail
            << std::endl;
  if (!v.pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int prec = 1) {
  std::ostringstream o;
  o.setf(std::ios::fixed);
  o.precision(prec);
  o << v;
  return o.str();
}

std::string temp_path(const std::string& tag) {
  static int n = 0;
  return (fs::temp_directory_path() /
          ("hotlock_acc_" + std::to_string(::getpid()) + "_" + tag + "_" + std::to_string(n++)))
      .string();
}

EngineConfig config_for(Protocol p) {
  EngineConfig cfg;
  cfg.protocol = p;
  return cfg;
}

// Net committed delta per row. Every write in these workloads is an
// increment, so final == initial + delta row by row.
std::map<RowId, std::int64_t> committed_deltas(const std::vector<HistoryEvent>& events,
                                               const std::set<TxnId>& committed) {
  std::map<RowId, std::int64_t> out;
  for (const auto& e : events)
    if (e.kind == EventKind::kWrite && committed.count(e.txn))
      out[e.row] += e.value.as_int() - e.prior.as_int();
  return out;
}

std::set<TxnId> committed_in(const std::vector<HistoryEvent>& events) {
  std::set<TxnId> s;
  for (const auto& e : events)
    if (e.kind == EventKind::kCommit) s.insert(e.txn);
  return s;
}

struct RunResult {
  MetricsReport m;
  EngineStats stats;
  std::vector<HistoryEvent> events;
  std::uint64_t hot_acquisitions = 0;
  bool counters_ok = true;
  std::string counter_mismatch;
};

RunResult run(const EngineConfig& cfg, const WorkloadSpec& spec, bool history = true) {
  EngineOptions opts;
  opts.record_history = history;
  Engine engine(cfg, opts);
  prepare_tables(engine, spec);
  RunResult r;
  r.m = run_workload(engine, spec);
  r.stats = engine.stats();
  r.hot_acquisitions = engine.locks().acquire_count(hot_row());
  if (!history) return r;
  r.events = engine.history().events();
  for (const auto& [row, delta] : committed_deltas(r.events, committed_in(r.events))) {
    auto v = engine.committed_value(row);
    if (!v || v->as_int() != spec.initial_value + delta) {
      r.counters_ok = false;
      r.counter_mismatch = row.to_string() + " expected " +
                           std::to_string(spec.initial_value + delta) + " got " +
                           (v ? std::to_string(v->as_int()) : "none");
      break;
    }
  }
  auto hot = check_counter_oracle(r.events, hot_row(), spec.initial_value,
                                  engine.committed_value(hot_row())->as_int());
  if (!hot.pass && r.counters_ok) {
    r.counters_ok = false;
    r.counter_mismatch = "hot row expected " + std::to_string(hot.expected) + " got " +
                         std::to_string(hot.actual);
  }
  return r;
}

// Commit order over every GroupLock history produced by this run.
struct OrderTally {
  std::size_t histories = 0;
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string first;
  void add(const std::vector<HistoryEvent>& events) {
    auto r = check_commit_order(events);
    ++histories;
    checked += r.checked;
    if (r.violations && first.empty()) first = r.first_violation;
    violations += r.violations;
  }
};

OrderTally g_commit_order;

WorkloadSpec rw_mix_preset() {
  WorkloadSpec spec;
  spec.kind = WorkloadKind::kReadWriteMix;
  spec.skew = 0.9;
  spec.tl = 8;
  spec.write_ratio = 0.5;
  return spec;
}

Verdict correctness_gate() {
  const auto t0 = Clock::now();
  std::size_t runs = 0, bad = 0;
  std::uint64_t commits = 0;
  std::string first_bad;
  for (auto p : {Protocol::kTwoPL, Protocol::kQueueLock, Protocol::kGroupLock})
    for (auto kind : {WorkloadKind::kHotspotUpdate, WorkloadKind::kReadWriteMix,
                      WorkloadKind::kTransfer})
      for (std::uint32_t threads : {8u, 64u, 256u}) {
        auto cfg = config_for(p);
        cfg.lock_wait_timeout = 100ms;
        WorkloadSpec spec = kind == WorkloadKind::kReadWriteMix ? rw_mix_preset() : WorkloadSpec{};
        spec.kind = kind;
        spec.threads = threads;
        spec.txn_count = 10000;
        spec.seed = 1000 + runs;
        auto r = run(cfg, spec);
        ++runs;
        commits += r.m.committed;
        auto ser = check_serializable(r.events);
        std::string why;
        if (!ser.acyclic) why = "cycle";
        else if (!r.counters_ok) why = "counter " + r.counter_mismatch;
        else if (r.m.started != spec.txn_count) why = "started " + std::to_string(r.m.started);
        if (p == Protocol::kGroupLock) g_commit_order.add(r.events);
        if (!why.empty()) {
          ++bad;
          if (first_bad.empty())
            first_bad = std::string(to_string(p)) + "/" + std::string(to_string(kind)) + "/" +
                        std::to_string(threads) + ": " + why;
        }
      }
  const double secs = seconds_since(t0);
  Verdict v;
  v.pass = bad == 0 && secs < 600;
  v.detail = std::to_string(runs) + " runs, " + std::to_string(commits) + " commits, " +
             std::to_string(bad) + " violating, " + fmt(secs) + " s" +
             (first_bad.empty() ? "" : "; first: " + first_bad);
  return v;
}

Verdict commit_order() {
  // A dedicated run with many small groups on top of the gate histories.
  auto cfg = config_for(Protocol::kGroupLock);
  cfg.commit_latency_injection = 200us;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::kHotspotUpdate;
  spec.threads = 64;
  spec.txn_count = 10000;
  g_commit_order.add(run(cfg, spec).events);
  Verdict v;
  v.pass = g_commit_order.violations == 0 && g_commit_order.checked > 0;
  v.detail = std::to_string(g_commit_order.histories) + " histories, " +
             std::to_string(g_commit_order.checked) + " ordered pairs, " +
             std::to_string(g_commit_order.violations) + " violations" +
             (g_commit_order.first.empty() ? "" : "; first: " + g_commit_order.first);
  return v;
}

Verdict rollback_order() {
  // Every transaction opens with an increment of one hot key; the rest of
  // its 15 operations spread uniformly over a large table, so cascades come
  // from the injected aborts and not from collisions elsewhere.
  std::vector<double> ratios;
  std::size_t checked = 0, violations = 0;
  std::string detail, first;
  for (double inject : {0.005, 0.01, 0.02, 0.03}) {
    auto cfg = config_for(Protocol::kGroupLock);
    WorkloadSpec spec;
    spec.kind = WorkloadKind::kReadWriteMix;
    spec.hot_write = true;
    spec.skew = 0;
    spec.table_rows = 1'000'000;
    spec.tl = 16;
    spec.write_ratio = 0.5;
    spec.threads = 64;
    spec.txn_count = 20000;
    spec.inject_abort = inject;
    auto r = run(cfg, spec);
    auto ro = check_rollback_order(r.events);
    checked += ro.checked;
    violations += ro.violations;
    if (ro.violations && first.empty()) first = ro.first_violation;
    g_commit_order.add(r.events);
    const double ratio = static_cast<double>(r.m.abort_count[static_cast<std::size_t>(
                             AbortCause::kCascade)]) /
                         static_cast<double>(r.m.started);
    ratios.push_back(ratio);
    detail += (detail.empty() ? "" : ", ") + fmt(inject * 100, 1) + "% -> " + fmt(ratio * 100, 2) + "%";
  }
  bool monotone = std::is_sorted(ratios.begin(), ratios.end());
  Verdict v;
  v.pass = violations == 0 && checked > 0 && monotone;
  v.detail = "cascade ratio " + detail + (monotone ? " (monotone)" : " (NOT monotone)") + "; " +
             std::to_string(checked) + " join pairs, " + std::to_string(violations) +
             " order violations" + (first.empty() ? "" : "; first: " + first);
  return v;
}

Verdict one_lock_per_group() {
  auto cfg = config_for(Protocol::kGroupLock);
  cfg.group_batch_size = 10;
  cfg.commit_latency_injection = 1ms;
  WorkloadSpec spec;
  spec.kind = WorkloadKind::kHotspotUpdate;
  spec.threads = 64;
  spec.txn_count = 1000;
  auto r = run(cfg, spec);
  g_commit_order.add(r.events);
  const auto bound = (r.m.committed + 9) / 10 + 32;
  Verdict v;
  v.pass = r.m.committed == 1000 && r.hot_acquisitions <= bound;
  v.detail = std::to_string(r.m.committed) + " commits, " + std::to_string(r.hot_acquisitions) +
             " hot-row lock acquisitions (bound " + std::to_string(bound) + "), " +
             std::to_string(r.stats.hot.groups) + " groups";
  return v;
}

double tps_of(Protocol p, WorkloadKind kind, std::uint32_t threads, double secs,
              std::chrono::microseconds sync = 0us) {
  auto cfg = config_for(p);
  cfg.commit_latency_injection = sync;
  WorkloadSpec spec;
  spec.kind = kind;
  spec.threads = threads;
  spec.duration_s = secs;
  return run(cfg, spec, false).m.tps;
}

Verdict directional_throughput() {
  const auto t0 = Clock::now();
  const double g0 = tps_of(Protocol::kGroupLock, WorkloadKind::kHotspotUpdate, 256, 4);
  const double p0 = tps_of(Protocol::kTwoPL, WorkloadKind::kHotspotUpdate, 256, 4);
  const double g1 = tps_of(Protocol::kGroupLock, WorkloadKind::kHotspotUpdate, 256, 4, 1000us);
  const double p1 = tps_of(Protocol::kTwoPL, WorkloadKind::kHotspotUpdate, 256, 4, 1000us);
  const double r0 = g0 / std::max(p0, 1e-9), r1 = g1 / std::max(p1, 1e-9);
  Verdict v;
  v.pass = r0 >= 2.0 && r1 >= 4.0 && seconds_since(t0) < 300;
  v.detail = "no sync: group " + fmt(g0, 0) + " vs 2pl " + fmt(p0, 0) + " TPS (" + fmt(r0, 2) +
             "x); 1ms sync: group " + fmt(g1, 0) + " vs 2pl " + fmt(p1, 0) + " TPS (" +
             fmt(r1, 2) + "x); " + std::to_string(std::thread::hardware_concurrency()) + " cores";
  return v;
}

Verdict detection_overhead() {
  auto tps = [](Protocol p) { return tps_of(p, WorkloadKind::kUniformUpdate, 256, 0.5); };
  std::vector<double> ratios;
  std::string detail;
  for (int trial = 0; trial < 25; ++trial) {
    // ABBA order cancels linear drift in machine speed within a trial.
    const double g1 = tps(Protocol::kGroupLock), p1 = tps(Protocol::kTwoPL);
    const double p2 = tps(Protocol::kTwoPL), g2 = tps(Protocol::kGroupLock);
    const double r = (g1 + g2) / std::max(p1 + p2, 1e-9);
    ratios.push_back(r);
    detail += (detail.empty() ? "" : " ") + fmt(r, 3);
  }
  std::sort(ratios.begin(), ratios.end());
  const double median = ratios[ratios.size() / 2];
  Verdict v;
  v.pass = median >= 0.95;
  v.detail = "median group/2pl TPS ratio " + fmt(median, 3) + " (trials " + detail + ")";
  return v;
}

Verdict deadlock_rule() {
  auto cfg = config_for(Protocol::kGroupLock);
  Engine e(cfg);
  const RowId t1 = hot_row(), t2 = row_at(kMainSpace, 100);
  e.load_row(t1, Value::of_int(1));
  e.load_row(t2, Value::of_int(100));
  e.hot().force_promote(t1, HotMode::kGroup);
  const auto t0 = Clock::now();
  auto a = e.begin();
  auto b = e.begin();
  Status s1 = e.increment(a, t1, 1);  // 2
  Status s2 = e.increment(b, t1, 1);  // 3
  Status s3 = e.increment(b, t2, 1);  // 101
  Status blocked = e.increment(a, t2, 1);
  Status b_commit = Status::kOk;
  std::thread committer([&] { b_commit = e.commit(b); });
  if (must_abort(blocked)) e.rollback(a, cause_of(blocked));
  committer.join();
  const auto wall = Clock::now() - t0;
  auto st = e.stats();
  const auto rule = st.aborts_by_cause[static_cast<std::size_t>(AbortCause::kRuleAbort)];
  const auto timeouts = st.aborts_by_cause[static_cast<std::size_t>(AbortCause::kTimeout)];
  const bool setup_ok = s1 == Status::kOk && s2 == Status::kOk && s3 == Status::kOk;
  Verdict v;
  v.pass = setup_ok && blocked == Status::kRuleAbort && rule == 1 && timeouts == 0 &&
           st.locks.timeouts == 0 && wall < cfg.lock_wait_timeout &&
           e.committed_value(t1)->as_int() == 1 && e.committed_value(t2)->as_int() == 100 &&
           st.locks.deadlock_checks == 0;
  v.detail = std::string("blocked update -> ") + std::string(to_string(blocked)) +
             ", dependent commit -> " + std::string(to_string(b_commit)) + ", rule aborts " +
             std::to_string(rule) + ", timeouts " + std::to_string(timeouts) + ", wall " +
             fmt(std::chrono::duration<double, std::milli>(wall).count(), 2) + " ms (timeout " +
             std::to_string(cfg.lock_wait_timeout.count() / 1000) + " ms), final t1=" +
             std::to_string(e.committed_value(t1)->as_int()) +
             " t2=" + std::to_string(e.committed_value(t2)->as_int());
  return v;
}

struct LoggedRun {
  std::string path;
  std::uint64_t load_bytes = 0;
  std::vector<HistoryEvent> events;
  std::int64_t initial = 0;
};

LoggedRun logged_run(const WorkloadSpec& spec) {
  LoggedRun out;
  out.path = temp_path("log");
  out.initial = spec.initial_value;
  EngineOptions opts;
  opts.log_path = out.path;
  auto cfg = config_for(Protocol::kGroupLock);
  Engine engine(cfg, opts);
  prepare_tables(engine, spec);
  engine.log()->flush();
  out.load_bytes = fs::file_size(out.path);
  run_workload(engine, spec);
  engine.log()->flush();
  out.events = engine.history().events();
  return out;
}

struct CrashCheck {
  bool ok = true;
  std::string why;
  std::size_t rolled_back = 0;
  std::size_t hot_rolled_back = 0;
};

CrashCheck check_crash_point(const LoggedRun& lr, std::uint64_t cut, std::mt19937_64& rng) {
  CrashCheck c;
  const std::string once = temp_path("cut"), twice = temp_path("cut");
  fs::copy_file(lr.path, once, fs::copy_options::overwrite_existing);
  fs::resize_file(once, cut);
  fs::copy_file(once, twice, fs::copy_options::overwrite_existing);

  auto ref = recover(once);
  c.rolled_back = ref.rolled_back.size();
  // Hot transactions first, in strictly descending hot order.
  bool plain_seen = false;
  HotOrder prev = kNoHotOrder;
  for (auto [txn, order] : ref.rolled_back) {
    if (order == kNoHotOrder) {
      plain_seen = true;
      continue;
    }
    ++c.hot_rolled_back;
    if (plain_seen || (prev != kNoHotOrder && order >= prev)) {
      c.ok = false;
      c.why = "rollback order at txn " + std::to_string(txn);
    }
    prev = order;
  }

  // Counter oracle against the in-memory history, restricted to the
  // transactions whose commit reached the log.
  std::set<TxnId> durable;
  for (auto& [txn, seq] : ref.committed) durable.insert(txn);
  auto deltas = committed_deltas(lr.events, durable);
  for (const auto& [row, v] : ref.table) {
    auto it = deltas.find(row);
    const std::int64_t expect = lr.initial + (it == deltas.end() ? 0 : it->second);
    if (v.as_int() != expect && c.ok) {
      c.ok = false;
      c.why = "counter " + row.to_string() + " expected " + std::to_string(expect) + " got " +
              std::to_string(v.as_int());
    }
  }
  for (const auto& [row, d] : deltas)
    if (!ref.table.count(row) && c.ok) {
      c.ok = false;
      c.why = "row " + row.to_string() + " missing";
    }

  // Crash again part-way through the rollback, then recover to the end.
  RecoveryOptions crash;
  crash.crash_after_clrs = ref.clrs_written == 0 ? 0 : rng() % (ref.clrs_written + 1);
  recover(twice, crash);
  auto again = recover(twice);
  if (again.table != ref.table && c.ok) {
    c.ok = false;
    c.why = "double crash diverged after " + std::to_string(*crash.crash_after_clrs) + " CLRs";
  }
  fs::remove(once);
  fs::remove(twice);
  return c;
}

Verdict recovery() {
  std::mt19937_64 rng(2024);
  std::vector<LoggedRun> runs;
  {
    WorkloadSpec spec;
    spec.kind = WorkloadKind::kTransfer;
    spec.threads = 64;
    spec.txn_count = 3000;
    spec.table_rows = 200;
    spec.inject_abort = 0.02;
    runs.push_back(logged_run(spec));
  }
  {
    WorkloadSpec spec;
    spec.kind = WorkloadKind::kReadWriteMix;
    spec.hot_write = true;
    spec.skew = 0;
    spec.table_rows = 2000;
    spec.tl = 4;
    spec.write_ratio = 0.5;
    spec.threads = 64;
    spec.txn_count = 3000;
    spec.inject_abort = 0.02;
    runs.push_back(logged_run(spec));
  }
  std::size_t points = 0, bad = 0, rolled = 0, hot_rolled = 0, multi = 0;
  std::string first;
  for (int i = 0; i < 100; ++i) {
    const auto& lr = runs[i % runs.size()];
    const auto size = fs::file_size(lr.path);
    const auto cut = lr.load_bytes + rng() % (size - lr.load_bytes + 1);
    auto c = check_crash_point(lr, cut, rng);
    ++points;
    rolled += c.rolled_back;
    hot_rolled += c.hot_rolled_back;
    if (c.hot_rolled_back >= 2) ++multi;
    if (!c.ok) {
      ++bad;
      if (first.empty()) first = c.why;
    }
  }
  for (auto& lr : runs) fs::remove(lr.path);
  Verdict v;
  v.pass = bad == 0 && multi > 0;
  v.detail = std::to_string(points) + " crash points, " + std::to_string(bad) + " failing, " +
             std::to_string(rolled) + " txns rolled back (" + std::to_string(hot_rolled) +
             " hot; " + std::to_string(multi) + " points with 2+ hot actives)" +
             (first.empty() ? "" : "; first: " + first);
  return v;
}

// Total time spent in Sync while a 10-member hot group commits.
double group_sync_ms(bool group_commit, std::size_t members) {
  auto cfg = config_for(Protocol::kGroupLock);
  cfg.commit_latency_injection = 1ms;
  cfg.group_commit = group_commit;
  EngineOptions opts;
  opts.start_sweeper = false;
  Engine e(cfg, opts);
  e.load_row(hot_row(), Value::of_int(0));
  e.hot().force_promote(hot_row(), HotMode::kGroup);
  std::vector<TxnPtr> ts;
  for (std::size_t i = 0; i < members; ++i) {
    ts.push_back(e.begin());
    if (e.increment(ts.back(), hot_row(), 1) != Status::kOk) return -1;
  }
  const auto before = e.stats().commit.sync_time_ns;
  std::vector<std::thread> ths;
  for (auto& t : ts) ths.emplace_back([&e, t] { e.commit(t); });
  for (auto& th : ths) th.join();
  if (e.committed_value(hot_row())->as_int() != static_cast<std::int64_t>(members)) return -1;
  return static_cast<double>(e.stats().commit.sync_time_ns - before) / 1e6;
}

Verdict group_commit_latency() {
  const double single = group_sync_ms(true, 1);
  const double on = group_sync_ms(true, 10);
  const double off = group_sync_ms(false, 10);
  Verdict v;
  v.pass = single > 0 && on > 0 && off > 0 && on <= 2 * single && off >= 8 * single;
  v.detail = "single sleep " + fmt(single, 2) + " ms; 10-txn group: enabled " + fmt(on, 2) +
             " ms (" + fmt(on / single, 2) + "x), disabled " + fmt(off, 2) + " ms (" +
             fmt(off / single, 2) + "x)";
  return v;
}

Verdict dynamic_batch_latency() {
  auto p95 = [](bool dynamic) {
    auto cfg = config_for(Protocol::kGroupLock);
    cfg.dynamic_batch = dynamic;
    cfg.sweep_interval = 10ms;
    WorkloadSpec spec;
    spec.kind = WorkloadKind::kHotspotUpdate;
    spec.threads = 64;
    spec.fixed_tps = 20000;
    spec.burst_on_ms = 50;
    spec.burst_off_ms = 50;
    spec.duration_s = 4;
    auto r = run(cfg, spec, false);
    return std::make_pair(r.m.p95_latency_ms, r.stats.hot.sweep_grants);
  };
  auto [on, on_sweeps] = p95(true);
  auto [off, off_sweeps] = p95(false);
  Verdict v;
  v.pass = on < off;
  v.detail = "p95 dynamic on " + fmt(on, 2) + " ms vs off " + fmt(off, 2) + " ms (sweeper grants " +
             std::to_string(on_sweeps) + " / " + std::to_string(off_sweeps) + ")";
  return v;
}

Verdict header_encoding() {
  std::mt19937_64 rng(99);
  std::size_t bad = 0;
  for (int i = 0; i < 100000; ++i) {
    const std::uint64_t v = rng() & ~kHotHeaderBit;
    auto h = decode_header(encode_hot_order(v));
    auto c = decode_header(encode_trx_no(v));
    if (!h.hot || h.value != v || c.hot || c.value != v) ++bad;
    const std::uint64_t raw = rng();
    if (decode_header(raw).hot != ((raw >> 63) == 1)) ++bad;
  }
  Verdict v;
  v.pass = bad == 0;
  v.detail = "1e5 random values, " + std::to_string(bad) + " mismatches";
  return v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run (default: all)");
  CLI11_PARSE(app, argc, argv);
  auto want = [&](int id) { return only.empty() || std::count(only.begin(), only.end(), id); };

  struct Criterion {
    int id;
    const char* name;
    Verdict (*fn)();
  };
  // Commit order (2) aggregates the GroupLock histories of 1, 3 and 4.
  const Criterion all[] = {
      {1, "correctness gate", correctness_gate},
      {3, "rollback order and cascade ratio", rollback_order},
      {4, "one lock per group", one_lock_per_group},
      {2, "commit order", commit_order},
      {5, "directional throughput", directional_throughput},
      {6, "detection overhead", detection_overhead},
      {7, "deadlock rule", deadlock_rule},
      {8, "recovery", recovery},
      {9, "group commit latency", group_commit_latency},
      {10, "dynamic batch latency", dynamic_batch_latency},
      {11, "header encoding", header_encoding},
  };
  for (const auto& c : all) {
    if (!want(c.id)) continue;
    try {
      report(c.id, c.name, c.fn());
    } catch (const std::exception& e) {
      report(c.id, c.name, Verdict{false, std::string("exception: ") + e.what()});
    }
  }
  return g_failures == 0 ? 0 : 1;
}
