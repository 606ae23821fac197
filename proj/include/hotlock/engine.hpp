#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "hotlock/commit_pipeline.hpp"
#include "hotlock/history.hpp"
#include "hotlock/hotspot.hpp"
#include "hotlock/lock_manager.hpp"
#include "hotlock/recovery.hpp"
#include "hotlock/transaction.hpp"
#include "hotlock/types.hpp"
#include "hotlock/undo_log.hpp"
#include "hotlock/version_store.hpp"

namespace hotlock {

struct EngineOptions {
  std::string log_path;  // empty: no log
  bool truncate_log = true;
  bool fsync = false;
  bool record_history = true;
  bool start_sweeper = true;
};

struct EngineStats {
  LockStats locks;
  HotspotStats hot;
  CommitStats commit;
  std::uint64_t begun = 0;
  std::uint64_t committed = 0;
  std::uint64_t aborted = 0;
  std::array<std::uint64_t, 4> aborts_by_cause{};  // indexed by AbortCause
  std::uint64_t undo_order_violations = 0;
  std::uint64_t chain_order_violations = 0;
  std::uint64_t active_list_scans = 0;
};

/// Facade shared by client threads. Every operation returns a Status; an
/// abort status means the caller must call rollback() (commit() rolls back
/// by itself).
class Engine {
 public:
  explicit Engine(const EngineConfig& cfg, const EngineOptions& opts = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Throws EngineShutdown after shutdown().
  TxnPtr begin();
  // Throws ConfigError. New transactions see the new settings; hot rows of
  // the old protocol drain and are evicted by the sweeper.
  void set_protocol(const EngineConfig& cfg);
  EngineConfig config() const;
  void set_group_commit(bool on);

  void load_row(const RowId& row, const Value& v);
  // Rows row_at(space, 0..count-1).
  void load_rows(std::uint32_t space, std::uint64_t count, const Value& v);
  // Installs a recovered table on an empty engine and moves counters past it.
  void restore(const RecoveryResult& r);

  // Snapshot read, never blocks.
  Status read(const TxnPtr& txn, const RowId& row, Value* out);
  // Locking read of the newest committed value (or own write).
  Status read_for_share(const TxnPtr& txn, const RowId& row, Value* out);
  // Exclusive read that keeps the row's execution turn until the txn's
  // next write on it or its end.
  Status select_for_update(const TxnPtr& txn, const RowId& row, Value* out);
  Status update(const TxnPtr& txn, const RowId& row, const Value& v);
  Status increment(const TxnPtr& txn, const RowId& row, std::int64_t delta, Value* out = nullptr);

  // kOk once durable and visible; otherwise the txn has been rolled back.
  Status commit(const TxnPtr& txn);
  void rollback(const TxnPtr& txn, AbortCause cause);

  void shutdown();
  // Stops all further log writes, as if the process died now.
  void simulate_crash();

  // Newest committed value.
  std::optional<Value> committed_value(const RowId& row) const;
  CommitSeq visible_seq() const { return visible_.load(std::memory_order_acquire); }

  EngineStats stats() const;
  VersionStore& storage() { return storage_; }
  LockManager& locks() { return locks_; }
  HotspotManager& hot() { return hot_; }
  History& history() { return history_; }
  CommitPipeline& pipeline() { return *pipeline_; }
  GlobalCounters& counters() { return counters_; }
  UndoLog* log() { return log_.get(); }

 private:
  using WriteFn = std::function<Value(const Value&)>;
  Status write(const TxnPtr& txn, const RowId& row, const WriteFn& fn, Value* out);
  Status exclusive_access(const TxnPtr& txn, const RowId& row, HotAccess kind,
                          const std::function<void(bool hot)>& apply);
  Status precheck(const Transaction& txn) const;
  Status acquire(const TxnPtr& txn, const RowId& row, LockMode mode);
  void record(Transaction& txn, HistoryEvent ev);
  void flush_member(Transaction& txn);
  void commit_member(Transaction& txn);
  void release_locks(Transaction& txn);
  void finish(Transaction& txn);

  mutable std::mutex cfg_mu_;
  EngineConfig cfg_;
  const EngineOptions opts_;

  GlobalCounters counters_;
  VersionStore storage_;
  History history_;
  HotspotManager hot_;
  LockManager locks_;
  std::unique_ptr<UndoLog> log_;
  std::unique_ptr<CommitPipeline> pipeline_;

  std::atomic<CommitSeq> visible_{0};
  std::atomic<bool> shutdown_{false};
  std::atomic<std::uint64_t> begun_{0}, committed_{0}, aborted_{0}, undo_violations_{0};
  std::array<std::atomic<std::uint64_t>, 4> by_cause_{};
};

}  // namespace hotlock
