#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hotlock/types.hpp"

namespace hotlock {

struct RecoveryOptions {
  // Cut the file back to its last valid record.
  bool truncate_tail = true;
  // Test hook: stop (as if the process died) after writing this many
  // compensation records.
  std::optional<std::size_t> crash_after_clrs;
};

struct RecoveryResult {
  std::map<RowId, Value> table;
  // Commit sequence of the last committed writer, per row (0 = load).
  std::map<RowId, CommitSeq> row_ts;
  std::map<TxnId, CommitSeq> committed;
  // Transactions rolled back by this pass, in rollback order, with their
  // hot update order (kNoHotOrder if none).
  std::vector<std::pair<TxnId, HotOrder>> rolled_back;
  std::set<TxnId> already_rolled_back;
  std::size_t records = 0;
  std::size_t clrs_written = 0;
  std::uint64_t truncated_bytes = 0;
  bool crashed = false;
  TxnId max_txn = kNoTxn;
  CommitSeq max_commit_seq = 0;
  HotOrder max_hot_order = kNoHotOrder;
};

// Replays the log, then rolls back every transaction that has neither a
// commit marker nor a rollback marker: hot ones in descending hot order
// first, the rest afterwards. Compensation and rollback markers are
// appended to the same file. Throws LogError if the file cannot be read.
RecoveryResult recover(const std::string& log_path, const RecoveryOptions& opts = {});

}  // namespace hotlock
