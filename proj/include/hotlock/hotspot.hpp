#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <thread>
#include <unordered_map>
#include <vector>

#include "hotlock/history.hpp"
#include "hotlock/lock_manager.hpp"
#include "hotlock/transaction.hpp"
#include "hotlock/types.hpp"

namespace hotlock {

enum class HotMode : std::uint8_t { kGroup, kQueue };
enum class HotAccess : std::uint8_t { kWrite, kRead, kSfu };

/// Per-hot-row group state (value type of the hot row hash).
class HotRowState {
 public:
  HotRowState(const RowId& r, HotMode m) : row(r), mode(m) {}

  const RowId row;
  const HotMode mode;

  mutable std::mutex mu;
  std::deque<TxnPtr> dep_list;         // strictly increasing hot_update_order
  std::deque<TxnPtr> waiting_updates;  // FIFO
  bool granting_new_trx = false;
  bool switching_new_leader = false;
  std::uint32_t grants_in_group = 0;
  // False while lock_sys still holds waiters that predate the hot path.
  bool legacy_waiters_drained = true;

  Transaction* leader = nullptr;    // group lock holder / queue turn owner
  TxnPtr designate;                 // chosen as next leader, lock not yet held
  Transaction* executing = nullptr; // holds the execution turn
  bool stalled = false;             // leader left with an empty queue, no dynamic batch
  int rolling_back = 0;
  bool evicted = false;
  std::uint32_t idle_sweeps = 0;

  std::atomic<int> inside_apply{0};

  bool group_active_locked() const {
    return leader || designate || stalled || !legacy_waiters_drained;
  }
};

struct HotspotStats {
  std::uint64_t promotions = 0;
  std::uint64_t evictions = 0;
  std::uint64_t groups = 0;          // leaders that founded a group
  std::uint64_t group_members = 0;   // dep_list appends
  std::uint64_t grants = 0;          // follower grants
  std::uint64_t cascade_requests = 0;
  std::uint64_t sweep_grants = 0;
  std::uint64_t sweep_grants_dynamic = 0;  // must stay 0
  std::uint64_t apply_overlaps = 0;
  std::uint64_t order_violations = 0;
};

class HotspotManager final : public LockHooks {
 public:
  HotspotManager(const EngineConfig& cfg, LockManager& locks, History& history,
                 GlobalCounters& counters);
  ~HotspotManager() override;
  HotspotManager(const HotspotManager&) = delete;
  HotspotManager& operator=(const HotspotManager&) = delete;

  void configure(const EngineConfig& cfg);

  // LockHooks
  bool hotspot_block_check(const Transaction& waiter, const Transaction& blocker) override;
  void on_waiter_enqueued(const Transaction& waiter, const RowId& row, std::size_t queue_len) override;

  std::shared_ptr<HotRowState> find(const RowId& row) const;
  bool is_hot(const RowId& row) const { return find(row) != nullptr; }
  std::size_t hot_count() const { return count_.load(std::memory_order_acquire); }
  bool maybe_promote(const RowId& row, std::size_t wait_queue_len, HotMode mode);
  std::shared_ptr<HotRowState> force_promote(const RowId& row, HotMode mode);

  // Evicts idle entries and grants stalled groups. Returns evicted rows.
  std::vector<RowId> sweep();
  void start_sweeper();
  void stop_sweeper();

  struct Outcome {
    Status status = Status::kOk;
    bool fallback = false;  // caller must use the plain lock path
  };
  // Group update path or the queue-then-lock path. apply runs
  // while the caller holds the row's execution turn.
  Outcome execute(const TxnPtr& txn, const std::shared_ptr<HotRowState>& e, HotAccess kind,
                  const std::function<void()>& apply);

  // txn already holds the row's X lock (it queued before promotion): take
  // over as group leader instead of writing on the plain path.
  Outcome adopt(const TxnPtr& txn, const std::shared_ptr<HotRowState>& e, HotAccess kind,
                const std::function<void()>& apply);
  // Plain 2PL writer on a group row: wait until no group member is left.
  Status wait_drained(Transaction& txn, const std::shared_ptr<HotRowState>& e);

  // Gives up an execution turn retained by SELECT FOR UPDATE.
  void release_turn(Transaction& txn);

  // Order gate: runs enqueue once the dep_list predecessor has entered the
  // commit queue. Non-ok means the txn must roll back.
  Status commit_gate(Transaction& txn, const std::function<void()>& enqueue);

  // Leader commit: stop granting, drain the granted follower, release the row
  // lock and hand the group over. Removes the row from txn.held_locks.
  void hot_commit_release(Transaction& txn);
  // Called for every released lock; row may or may not be hot.
  void after_release(Transaction& txn, const RowId& row, bool passed);
  // Commit stage: drop txn from its dep_list.
  void on_commit(Transaction& txn);

  // Rollback, first half: waits until txn is the dep_list tail with no
  // grant or leader switch in flight, requesting cascade aborts of every
  // successor meanwhile. Undo runs between the two halves.
  void begin_rollback(Transaction& txn);
  void finish_rollback(Transaction& txn, AbortCause cause);

  // Releases queue turns owned by a finished txn.
  void on_txn_end(Transaction& txn);

  HotspotStats stats() const;
  std::vector<TxnId> dep_list_ids(const RowId& row) const;
  std::vector<TxnId> waiting_ids(const RowId& row) const;

 private:
  Outcome execute_group(const TxnPtr& txn, const std::shared_ptr<HotRowState>& e, HotAccess kind,
                        const std::function<void()>& apply);
  Outcome execute_queue(const TxnPtr& txn, const std::shared_ptr<HotRowState>& e);
  Outcome lead_locked(std::unique_lock<std::mutex>& lk, const TxnPtr& txn,
                      const std::shared_ptr<HotRowState>& e, HotAccess kind,
                      const std::function<void()>& apply);
  void run_apply(HotRowState& e, const std::function<void()>& apply);
  void append_locked(const std::shared_ptr<HotRowState>& e, const TxnPtr& txn);
  void handle_release_locked(HotRowState& e, bool passed);
  void post_update_locked(HotRowState& e, Transaction& txn);
  void kick_locked(HotRowState& e);
  void handoff_locked(HotRowState& e);
  void handoff_queue_locked(HotRowState& e);
  void refresh_legacy_locked(HotRowState& e);
  Status abort_status(const Transaction& txn) const;
  Status acquire_status(AcquireResult r, const Transaction& txn) const;
  void sleep_spin() const;
  void sweeper_main();

  LockManager& locks_;
  History& history_;
  GlobalCounters& counters_;

  std::atomic<std::uint32_t> threshold_;
  std::atomic<std::uint32_t> batch_;
  std::atomic<bool> dynamic_batch_;
  std::atomic<std::int64_t> spin_us_;
  std::atomic<std::int64_t> sweep_us_;
  std::atomic<std::uint32_t> evict_idle_sweeps_;
  std::atomic<Protocol> protocol_;

  mutable std::shared_mutex table_mu_;
  std::unordered_map<RowId, std::shared_ptr<HotRowState>> table_;
  std::atomic<std::size_t> count_{0};
  // Evicted entries stay allocated: other threads may still hold a raw
  // dep_entry pointer to them.
  std::vector<std::shared_ptr<HotRowState>> retired_;

  std::mutex sweeper_mu_;
  std::condition_variable sweeper_cv_;
  bool sweeper_stop_ = false;
  std::thread sweeper_;

  std::atomic<std::uint64_t> promotions_{0}, evictions_{0}, groups_{0}, group_members_{0},
      grants_{0}, cascade_requests_{0}, sweep_grants_{0}, sweep_grants_dynamic_{0},
      apply_overlaps_{0}, order_violations_{0};
};

}  // namespace hotlock
