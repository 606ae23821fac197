#pragma once

#include <atomic>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include "hotlock/types.hpp"

namespace hotlock {

enum class EventKind : std::uint8_t { kRead, kWrite, kSfu, kCommit, kAbort };

std::string_view to_string(EventKind k);

struct HistoryEvent {
  std::uint64_t seq = 0;
  TxnId txn = kNoTxn;
  EventKind kind = EventKind::kRead;
  RowId row{};
  Value value;                       // observed (READ/SFU) or written (WRITE)
  Value prior;                       // WRITE: image replaced
  TxnId observed_writer = kNoTxn;    // READ/SFU: writer of the observed version
  HotOrder hot_order = kNoHotOrder;  // order held by txn on this row, if any
  CommitSeq commit_seq = 0;          // COMMIT only
  AbortCause cause = AbortCause::kRuleAbort;  // ABORT only
};

/// Append-only sink. Transactions buffer their own events and hand them
/// over in one piece when they end.
class History {
 public:
  std::uint64_t next_seq() { return seq_.fetch_add(1, std::memory_order_relaxed) + 1; }
  void append(std::vector<HistoryEvent>&& events);
  std::vector<HistoryEvent> events() const;  // sorted by seq
  std::size_t size() const;
  void clear();

 private:
  std::atomic<std::uint64_t> seq_{0};
  mutable std::mutex mu_;
  std::vector<HistoryEvent> events_;
};

class HistoryError : public Error {
 public:
  using Error::Error;
};

struct SerializabilityResult {
  bool acyclic = true;
  std::vector<TxnId> cycle;  // witness, first node repeated at the end
  std::size_t committed = 0;
  std::size_t edges = 0;
};

// Conflict-graph test over the committed projection. Throws HistoryError for
// malformed input (unterminated txn, events after the terminal one, reads of
// aborted or never-committed writers by committed readers).
SerializabilityResult check_serializable(const std::vector<HistoryEvent>& events);

struct CounterOracleResult {
  bool pass = false;
  std::int64_t expected = 0;
  std::int64_t actual = 0;
};

// final == initial + sum of (written - prior) over committed writes of row.
CounterOracleResult check_counter_oracle(const std::vector<HistoryEvent>& events, const RowId& row,
                                         std::int64_t initial, std::int64_t final_value);

struct OrderCheckResult {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::string first_violation;
};

// Committed txns on one hot row: commit_seq increases with hot_order.
OrderCheckResult check_commit_order(const std::vector<HistoryEvent>& events);
// A txn that joined a hot row after an aborting txn (and before that abort
// completed) must itself be aborted first.
OrderCheckResult check_rollback_order(const std::vector<HistoryEvent>& events);

void dump_history(std::ostream& out, const std::vector<HistoryEvent>& events);
std::vector<HistoryEvent> load_history(std::istream& in);

}  // namespace hotlock
