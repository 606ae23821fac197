#include "hotlock/types.hpp"

#include <string>

namespace hotlock {

std::string RowId::to_string() const {
  return "<" + std::to_string(space_id) + "," + std::to_string(page_no) + "," +
         std::to_string(heap_no) + ">";
}

std::size_t RowIdHash::operator()(const RowId& r) const noexcept {
  std::uint64_t h = (std::uint64_t{r.space_id} << 40) ^ (std::uint64_t{r.page_no} << 12) ^ r.heap_no;
  // splitmix64 finalizer
  h ^= h >> 30;
  h *= 0xbf58476d1ce4e5b9ULL;
  h ^= h >> 27;
  h *= 0x94d049bb133111ebULL;
  h ^= h >> 31;
  return static_cast<std::size_t>(h);
}

std::int64_t Value::as_int() const {
  if (auto* p = std::get_if<std::int64_t>(&v_)) return *p;
  throw Error("value is not an integer");
}

const std::string& Value::bytes() const {
  if (auto* p = std::get_if<std::string>(&v_)) return *p;
  throw Error("value is not a byte string");
}

std::string Value::to_string() const {
  if (is_int()) return std::to_string(std::get<std::int64_t>(v_));
  return std::get<std::string>(v_);
}

std::string_view to_string(Protocol p) {
  switch (p) {
    case Protocol::kTwoPL: return "2pl";
    case Protocol::kQueueLock: return "queue";
    case Protocol::kGroupLock: return "group";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "2pl") return Protocol::kTwoPL;
  if (s == "queue") return Protocol::kQueueLock;
  if (s == "group") return Protocol::kGroupLock;
  throw ConfigError("unknown protocol '" + std::string(s) + "'");
}

std::string_view to_string(TxnState s) {
  switch (s) {
    case TxnState::kActive: return "ACTIVE";
    case TxnState::kPreparing: return "PREPARING";
    case TxnState::kCommitted: return "COMMITTED";
    case TxnState::kAborted: return "ABORTED";
  }
  return "?";
}

std::string_view to_string(HotUpdateStatus s) {
  switch (s) {
    case HotUpdateStatus::kNone: return "NONE";
    case HotUpdateStatus::kWaiting: return "WAITING";
    case HotUpdateStatus::kGranted: return "GRANTED";
    case HotUpdateStatus::kRunning: return "RUNNING";
  }
  return "?";
}

std::string_view to_string(Status s) {
  switch (s) {
    case Status::kOk: return "ok";
    case Status::kNotFound: return "not_found";
    case Status::kTimedOut: return "timed_out";
    case Status::kRuleAbort: return "rule_abort";
    case Status::kDeadlockVictim: return "deadlock_victim";
    case Status::kCascadeAbort: return "cascade_abort";
    case Status::kMultipleHotRows: return "multiple_hot_rows";
    case Status::kHotOrderConflict: return "hot_order_conflict";
    case Status::kShutdown: return "shutdown";
  }
  return "?";
}

std::string_view to_string(AbortCause c) {
  switch (c) {
    case AbortCause::kTimeout: return "timeout";
    case AbortCause::kRuleAbort: return "rule_abort";
    case AbortCause::kCascade: return "cascade";
    case AbortCause::kInjected: return "injected";
  }
  return "?";
}

AbortCause cause_of(Status s) {
  switch (s) {
    case Status::kTimedOut: return AbortCause::kTimeout;
    case Status::kCascadeAbort: return AbortCause::kCascade;
    default: return AbortCause::kRuleAbort;
  }
}

void EngineConfig::validate() const {
  if (hot_threshold < 1) throw ConfigError("hot_threshold must be >= 1");
  if (group_batch_size < 1) throw ConfigError("group_batch_size must be >= 1");
  if (spin_delay.count() < 0) throw ConfigError("spin_delay must be >= 0");
  if (lock_wait_timeout <= spin_delay) throw ConfigError("lock_wait_timeout must exceed spin_delay");
  if (sweep_interval.count() <= 0) throw ConfigError("sweep_interval must be > 0");
  if (evict_idle_sweeps < 1) throw ConfigError("evict_idle_sweeps must be >= 1");
  if (commit_latency_injection.count() < 0) throw ConfigError("commit latency must be >= 0");
}

}  // namespace hotlock
