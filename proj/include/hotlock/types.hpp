#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

namespace hotlock {

using TxnId = std::uint64_t;
using HotOrder = std::uint64_t;
using CommitSeq = std::uint64_t;

inline constexpr TxnId kNoTxn = 0;
inline constexpr HotOrder kNoHotOrder = 0;

/// Physical identity of a row: tablespace, page and slot within the page.
struct RowId {
  std::uint32_t space_id = 0;
  std::uint32_t page_no = 0;
  std::uint32_t heap_no = 0;

  friend auto operator<=>(const RowId&, const RowId&) = default;

  std::string to_string() const;
};

struct RowIdHash {
  std::size_t operator()(const RowId& r) const noexcept;
};

// Logical row number -> RowId for the benchmark tables.
inline constexpr std::uint32_t kRowsPerPage = 64;
inline RowId row_at(std::uint32_t space_id, std::uint64_t index) {
  return RowId{space_id, static_cast<std::uint32_t>(index / kRowsPerPage),
               static_cast<std::uint32_t>(index % kRowsPerPage)};
}

/// Row payload. Counters take the integer path; everything else is opaque bytes.
class Value {
 public:
  Value() = default;
  static Value of_int(std::int64_t v) { return Value(v); }
  static Value of_bytes(std::string b) { return Value(std::move(b)); }

  bool is_int() const noexcept { return std::holds_alternative<std::int64_t>(v_); }
  std::int64_t as_int() const;
  const std::string& bytes() const;
  std::string to_string() const;

  friend bool operator==(const Value&, const Value&) = default;

 private:
  explicit Value(std::int64_t v) : v_(v) {}
  explicit Value(std::string b) : v_(std::move(b)) {}
  std::variant<std::int64_t, std::string> v_{std::int64_t{0}};
};

enum class Protocol : std::uint8_t { kTwoPL, kQueueLock, kGroupLock };

std::string_view to_string(Protocol p);
Protocol parse_protocol(std::string_view s);

enum class LockMode : std::uint8_t { kShared, kExclusive };

inline bool compatible(LockMode a, LockMode b) {
  return a == LockMode::kShared && b == LockMode::kShared;
}

enum class TxnState : std::uint8_t { kActive, kPreparing, kCommitted, kAborted };
enum class HotUpdateStatus : std::uint8_t { kNone, kWaiting, kGranted, kRunning };

std::string_view to_string(TxnState s);
std::string_view to_string(HotUpdateStatus s);

/// Outcome of a transactional operation. Anything other than kOk/kNotFound
/// means the transaction must be rolled back by the caller.
enum class Status : std::uint8_t {
  kOk,
  kNotFound,
  kTimedOut,
  kRuleAbort,         // hot+cold blocking rule
  kDeadlockVictim,    // wait-for cycle (2PL only)
  kCascadeAbort,      // a hot-row predecessor rolled back
  kMultipleHotRows,   // second hot row in one transaction
  kHotOrderConflict,  // re-update of a hot row after successors wrote it
  kShutdown,
};

std::string_view to_string(Status s);
inline bool must_abort(Status s) { return s != Status::kOk && s != Status::kNotFound; }

/// Abort accounting buckets; every abort falls in exactly one.
enum class AbortCause : std::uint8_t { kTimeout, kRuleAbort, kCascade, kInjected };

std::string_view to_string(AbortCause c);
AbortCause cause_of(Status s);

struct EngineConfig {
  Protocol protocol = Protocol::kGroupLock;
  std::uint32_t hot_threshold = 32;
  std::uint32_t group_batch_size = 10;
  std::chrono::microseconds lock_wait_timeout{1'000'000};
  std::chrono::microseconds spin_delay{10};
  std::chrono::microseconds sweep_interval{10'000};
  // Consecutive idle sweeps before a hot entry is evicted.
  std::uint32_t evict_idle_sweeps = 10;
  std::chrono::microseconds commit_latency_injection{0};
  bool dynamic_batch = true;
  bool group_commit = true;

  void validate() const;
  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

// Undo applied out of reverse order; a rollback-ordering bug.
class OrderingViolation : public Error {
 public:
  using Error::Error;
};

class InvariantViolation : public Error {
 public:
  using Error::Error;
};

class LogError : public Error {
 public:
  using Error::Error;
};

class EngineShutdown : public Error {
 public:
  using Error::Error;
};

}  // namespace hotlock

template <>
struct std::hash<hotlock::RowId> {
  std::size_t operator()(const hotlock::RowId& r) const noexcept { return hotlock::RowIdHash{}(r); }
};
