#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include "hotlock/event.hpp"
#include "hotlock/history.hpp"
#include "hotlock/types.hpp"
#include "hotlock/version_store.hpp"

namespace hotlock {

class HotRowState;

struct HeldLock {
  RowId row;
  LockMode mode;
};

/// Per-transaction descriptor. Driven by one client thread; fields other
/// threads touch are atomic or guarded by the structure that publishes them
/// (lock shard, hot-row mutex, flush queue).
class Transaction {
 public:
  Transaction(TxnId id, Protocol protocol, Snapshot snap, const EngineConfig& cfg);
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;

  TxnId id() const { return id_; }
  Protocol protocol() const { return protocol_; }
  const EngineConfig& config() const { return cfg_; }
  const Snapshot& snapshot() const { return snap_; }
  Clock::time_point started_at() const { return started_at_; }

  TxnState state() const { return state_.load(std::memory_order_acquire); }
  // Throws InvariantViolation on an illegal edge.
  void transition(TxnState to);

  bool abort_requested() const { return abort_word_.load(std::memory_order_acquire) != 0; }
  AbortCause abort_cause() const {
    return static_cast<AbortCause>(abort_word_.load(std::memory_order_acquire) - 1);
  }
  // First request wins. Wakes the transaction if it is blocked.
  bool request_abort(AbortCause cause);

  std::uint32_t next_write_seq() { return ++write_seq_; }
  std::size_t undo_size() const { return undo_count_.load(std::memory_order_relaxed); }
  void push_undo(UndoRecord rec);
  std::vector<UndoRecord>& undo() { return undo_; }

  std::optional<RowId> waiting_row() const;
  void set_waiting_row(std::optional<RowId> row);

  Event event;

  // Hot-row execution state.
  std::atomic<HotUpdateStatus> hot_status{HotUpdateStatus::kNone};
  std::atomic<bool> is_leader{false};
  std::atomic<HotOrder> hot_order{kNoHotOrder};
  // Address of the hot entry whose dep_list holds this txn, else null.
  std::atomic<const HotRowState*> dep_entry{nullptr};
  std::shared_ptr<HotRowState> hot_entry;  // owner thread only
  bool queued_for_update = false;
  bool holds_turn = false;
  // Queue-mode hot rows whose turn this txn owns.
  std::vector<std::shared_ptr<HotRowState>> queue_turns;
  bool hot_header_logged = false;

  std::vector<HeldLock> held_locks;  // owner thread only

  // Commit pipeline.
  std::atomic<bool> commit_enqueued{false};
  std::atomic<bool> commit_done{false};
  std::atomic<bool> pipeline_lead{false};
  CommitSeq commit_seq = 0;

  std::vector<HistoryEvent> events;

 private:
  const TxnId id_;
  const Protocol protocol_;
  const Snapshot snap_;
  const EngineConfig cfg_;
  const Clock::time_point started_at_;

  std::atomic<TxnState> state_{TxnState::kActive};
  // 0 = no request, else 1 + AbortCause.
  std::atomic<std::uint8_t> abort_word_{0};

  std::uint32_t write_seq_ = 0;
  std::vector<UndoRecord> undo_;
  std::atomic<std::size_t> undo_count_{0};

  mutable std::mutex wait_mu_;
  std::optional<RowId> waiting_row_;
};

using TxnPtr = std::shared_ptr<Transaction>;

struct GlobalCounters {
  std::atomic<TxnId> next_txn_id{1};
  std::atomic<HotOrder> global_hot_update_order{1};
  std::atomic<CommitSeq> next_commit_seq{1};

  TxnId take_txn_id() { return next_txn_id.fetch_add(1); }
  HotOrder take_hot_order() { return global_hot_update_order.fetch_add(1); }
  CommitSeq take_commit_seq() { return next_commit_seq.fetch_add(1); }
};

}  // namespace hotlock
