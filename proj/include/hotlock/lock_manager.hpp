#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <vector>

#include "hotlock/transaction.hpp"
#include "hotlock/types.hpp"

namespace hotlock {

enum class AcquireResult : std::uint8_t {
  kGranted,
  kTimedOut,
  kAbortedByRule,
  kDeadlockVictim,
  kAbortRequested,  // someone else asked this txn to abort while it waited
};

class LockHooks {
 public:
  virtual ~LockHooks() = default;
  // True if waiter must abort instead of blocking behind blocker.
  virtual bool hotspot_block_check(const Transaction& waiter, const Transaction& blocker) = 0;
  // Called after the shard mutex is dropped.
  virtual void on_waiter_enqueued(const Transaction& waiter, const RowId& row, std::size_t queue_len) = 0;
};

struct LockStats {
  std::uint64_t acquisitions = 0;
  std::uint64_t fast_path = 0;
  std::uint64_t lock_objects = 0;
  std::uint64_t waits = 0;
  std::uint64_t wait_time_ns = 0;
  std::uint64_t deadlock_checks = 0;
  std::uint64_t deadlock_victims = 0;
  std::uint64_t rule_aborts = 0;
  std::uint64_t timeouts = 0;
  std::uint64_t exclusion_violations = 0;
};

// Finds a wait-for cycle that passes through start. The returned path
// begins at start; the closing edge back to start is implicit.
std::optional<std::vector<TxnId>> find_cycle_through(
    TxnId start, const std::function<std::vector<TxnId>(TxnId)>& blockers);

// Fewest undo records; ties go to the younger (larger id) transaction.
TxnId choose_victim(const std::vector<TxnId>& cycle, const std::function<std::size_t(TxnId)>& undo_size);

class LockManager {
 public:
  static constexpr std::size_t kShards = 64;

  explicit LockManager(LockHooks* hooks = nullptr);
  LockManager(const LockManager&) = delete;
  LockManager& operator=(const LockManager&) = delete;

  AcquireResult acquire(const TxnPtr& txn, const RowId& row, LockMode mode, bool detect_deadlocks,
                        std::chrono::microseconds timeout);

  // Releases one row. Returns true if the lock passed to a waiter.
  bool release(Transaction& txn, const RowId& row, std::vector<TxnId>* woken = nullptr);

  // Releases everything txn holds, in acquisition order. on_row sees every
  // released row with its passed flag. Txn must be PREPARING or ABORTED.
  std::vector<TxnId> release_all(Transaction& txn,
                                 const std::function<void(const RowId&, bool)>& on_row = {});

  // Wait-for search from a waiter that is already enqueued.
  std::optional<TxnId> detect_deadlock(const TxnPtr& waiter);

  bool holds(const Transaction& txn, const RowId& row, LockMode mode) const;
  std::size_t wait_queue_len(const RowId& row) const;
  std::vector<TxnId> waiter_ids(const RowId& row) const;
  std::vector<TxnId> holder_ids(const RowId& row) const;
  std::uint64_t acquire_count(const RowId& row) const;

  // Throws InvariantViolation if granted/waiting structures disagree.
  void validate() const;
  LockStats stats() const;

 private:
  struct Request {
    TxnPtr txn;
    LockMode mode;
    bool upgrade = false;
    std::atomic<bool> granted{false};
  };
  struct Holder {
    TxnPtr txn;
    LockMode mode;
  };
  struct Entry {
    std::vector<Holder> holders;
    std::list<std::shared_ptr<Request>> waiters;
    // Lightweight waiter ids, kept in the same order as waiters.
    std::list<TxnId> trx_lock_wait;
    bool materialized = false;
    std::uint64_t acquire_count = 0;
  };
  struct Shard {
    mutable std::mutex mu;
    std::unordered_map<RowId, Entry> rows;
  };

  Shard& shard_for(const RowId& row) const;
  // Grants from the head of the queue while compatible. Returns woken txns.
  std::vector<TxnPtr> grant_waiters_locked(Entry& e);
  void add_holder_locked(Entry& e, const TxnPtr& txn, LockMode mode, bool upgrade);
  bool rule_blocks_locked(const Entry& e, const Transaction& waiter, LockMode mode,
                          const Request* self) const;
  std::vector<TxnPtr> blockers_of(const Transaction& waiter) const;
  // Returns true if the request had already been granted.
  bool cancel(const RowId& row, const std::shared_ptr<Request>& req);

  mutable std::array<Shard, kShards> shards_;
  LockHooks* hooks_;

  std::atomic<std::uint64_t> acquisitions_{0}, fast_path_{0}, lock_objects_{0}, waits_{0},
      wait_time_ns_{0}, deadlock_checks_{0}, deadlock_victims_{0}, rule_aborts_{0}, timeouts_{0},
      exclusion_violations_{0};
};

}  // namespace hotlock
