#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hotlock/engine.hpp"
#include "hotlock/history.hpp"
#include "hotlock/recovery.hpp"
#include "hotlock/workload.hpp"

using namespace hotlock;

namespace {

bool on_off(const std::string& s) {
  if (s == "on") return true;
  if (s == "off") return false;
  throw ConfigError("expected on|off, got '" + s + "'");
}

int print_checks(const std::vector<HistoryEvent>& events, const RowId* counter_row,
                 std::int64_t initial, std::optional<std::int64_t> final_value) {
  auto ser = check_serializable(events);
  auto co = check_commit_order(events);
  auto ro = check_rollback_order(events);
  nlohmann::ordered_json j;
  j["committed"] = ser.committed;
  j["edges"] = ser.edges;
  j["acyclic"] = ser.acyclic;
  if (!ser.acyclic) j["cycle"] = ser.cycle;
  j["commit_order_violations"] = co.violations;
  j["rollback_order_violations"] = ro.violations;
  bool ok = ser.acyclic && co.violations == 0 && ro.violations == 0;
  if (counter_row && final_value) {
    auto oracle = check_counter_oracle(events, *counter_row, initial, *final_value);
    j["counter_expected"] = oracle.expected;
    j["counter_actual"] = oracle.actual;
    j["counter_pass"] = oracle.pass;
    ok = ok && oracle.pass;
  }
  std::cerr << j.dump() << "\n";
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hot-row concurrency control bench"};
  app.require_subcommand(1);

  WorkloadSpec spec;
  EngineConfig cfg;
  std::string protocol = "group", workload = "hotspot_update", report = "json";
  std::string dynamic_batch = "on", group_commit = "on";
  double sync_latency_ms = 0, timeout_ms = 1000, sweep_ms = 10;
  std::string dump_history, log_path;
  bool verify = false, fsync = false;

  auto* run = app.add_subcommand("run", "run a workload and print a metrics report");
  run->add_option("--protocol", protocol, "2pl|queue|group")->check(CLI::IsMember({"2pl", "queue", "group"}));
  run->add_option("--workload", workload,
                  "hotspot_update|uniform_update|rw_mix|hotspot_scan|transfer");
  run->add_option("--threads", spec.threads);
  auto* dur = run->add_option("--duration", spec.duration_s, "seconds");
  auto* txns = run->add_option("--txns", spec.txn_count, "transactions to start");
  dur->excludes(txns);
  run->add_option("--tl", spec.tl, "operations per transaction");
  run->add_option("--rw", spec.write_ratio, "write probability per operation");
  run->add_option("--skew", spec.skew, "Zipf skew factor");
  run->add_option("--rows", spec.table_rows, "rows in the main table");
  run->add_option("--hot-rows", spec.hot_rows, "designated hot keys");
  run->add_flag("--hot-write", spec.hot_write, "rw_mix: open every transaction with a hot-key increment");
  run->add_option("--hot-threshold", cfg.hot_threshold);
  run->add_option("--batch-size", cfg.group_batch_size);
  run->add_option("--dynamic-batch", dynamic_batch)->check(CLI::IsMember({"on", "off"}));
  run->add_option("--group-commit", group_commit)->check(CLI::IsMember({"on", "off"}));
  run->add_option("--sync-latency", sync_latency_ms, "milliseconds slept in Sync");
  run->add_option("--lock-timeout", timeout_ms, "milliseconds");
  run->add_option("--sweep-interval", sweep_ms, "milliseconds");
  run->add_option("--inject-abort", spec.inject_abort);
  run->add_option("--fixed-tps", spec.fixed_tps);
  run->add_option("--burst-on", spec.burst_on_ms, "milliseconds of arrivals per burst");
  run->add_option("--burst-off", spec.burst_off_ms, "milliseconds of silence between bursts");
  run->add_option("--seed", spec.seed);
  run->add_option("--report", report)->check(CLI::IsMember({"json", "csv"}));
  run->add_option("--dump-history", dump_history);
  run->add_option("--log-path", log_path);
  run->add_flag("--fsync", fsync, "fdatasync the log in Sync");
  run->add_flag("--verify", verify, "check the history after the run");

  std::string recover_path;
  auto* rec = app.add_subcommand("recover", "roll back unfinished transactions in a log");
  rec->add_option("--log-path", recover_path)->required();

  std::string history_path;
  auto* chk = app.add_subcommand("check", "check a dumped history");
  chk->add_option("--history", history_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      spec.kind = parse_workload(workload);
      cfg.protocol = parse_protocol(protocol);
      cfg.dynamic_batch = on_off(dynamic_batch);
      cfg.group_commit = on_off(group_commit);
      cfg.commit_latency_injection =
          std::chrono::microseconds(static_cast<std::int64_t>(sync_latency_ms * 1000));
      cfg.lock_wait_timeout = std::chrono::microseconds(static_cast<std::int64_t>(timeout_ms * 1000));
      cfg.sweep_interval = std::chrono::microseconds(static_cast<std::int64_t>(sweep_ms * 1000));
      cfg.validate();
      spec.validate();

      EngineOptions opts;
      opts.log_path = log_path;
      opts.fsync = fsync;
      opts.record_history = verify || !dump_history.empty();
      Engine engine(cfg, opts);
      prepare_tables(engine, spec);
      MetricsReport m = run_workload(engine, spec);
      if (report == "json")
        std::cout << report_json(m) << "\n";
      else
        std::cout << report_csv_header() << "\n" << report_csv_row(m) << "\n";

      int rc = 0;
      if (opts.record_history) {
        auto events = engine.history().events();
        if (!dump_history.empty()) {
          std::ofstream out(dump_history);
          hotlock::dump_history(out, events);
        }
        if (verify) {
          const bool counter = spec.kind == WorkloadKind::kHotspotUpdate || spec.hot_write ||
                               spec.kind == WorkloadKind::kTransfer;
          RowId row = hot_row();
          rc = print_checks(events, counter ? &row : nullptr, spec.initial_value,
                            counter ? std::optional(engine.committed_value(row)->as_int())
                                    : std::nullopt);
        }
      }
      return rc;
    }
    if (rec->parsed()) {
      RecoveryResult r = recover(recover_path);
      nlohmann::ordered_json j;
      j["records"] = r.records;
      j["truncated_bytes"] = r.truncated_bytes;
      j["rows"] = r.table.size();
      j["committed"] = r.committed.size();
      j["already_rolled_back"] = r.already_rolled_back.size();
      nlohmann::json order = nlohmann::json::array();
      for (auto& [txn, hot] : r.rolled_back) order.push_back({{"txn", txn}, {"hot_order", hot}});
      j["rolled_back"] = order;
      j["clrs_written"] = r.clrs_written;
      std::cout << j.dump(2) << "\n";
      return 0;
    }
    if (chk->parsed()) {
      std::ifstream in(history_path);
      if (!in) throw Error("cannot open " + history_path);
      auto events = load_history(in);
      return print_checks(events, nullptr, 0, std::nullopt);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
