#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <vector>

#include "hotlock/transaction.hpp"
#include "hotlock/types.hpp"

namespace hotlock {

enum class CommitStage : std::uint8_t { kFlush, kSync, kCommit };

struct CommitStats {
  std::uint64_t batches = 0;
  std::uint64_t commits = 0;
  std::uint64_t syncs = 0;
  std::uint64_t sync_time_ns = 0;  // time spent in the Sync stage
  std::uint64_t max_batch = 0;
};

/// Flush / Sync / Commit with a rotating batch leader. Admission order into
/// the queue is the commit order.
class CommitPipeline {
 public:
  struct Stages {
    std::function<void(Transaction&)> flush_member;  // assigns commit_seq, logs
    std::function<void()> flush_batch;               // writes the batch to the log
    std::function<void()> sync;                      // durability barrier
    std::function<void(Transaction&)> commit_member; // publish and release
  };

  CommitPipeline(Stages stages, bool group_commit, std::chrono::microseconds sync_latency);
  CommitPipeline(const CommitPipeline&) = delete;
  CommitPipeline& operator=(const CommitPipeline&) = delete;

  // Admits txn to the flush queue. Callers serialize admissions that must
  // keep an order (the hot-row commit gate does).
  void enqueue(const TxnPtr& txn);
  // Blocks until txn has passed the Commit stage, leading batches if needed.
  void run(const TxnPtr& txn);

  // Takes effect at the next batch cut.
  void set_group_commit(bool on) { group_commit_.store(on); }
  bool group_commit() const { return group_commit_.load(); }
  void set_sync_latency(std::chrono::microseconds d) { latency_us_.store(d.count()); }

  void set_trace(bool on);
  std::vector<TxnId> admission_trace() const;
  CommitStats stats() const;

 private:
  void lead(std::unique_lock<std::mutex>& lk, const TxnPtr& self);

  Stages stages_;
  std::atomic<bool> group_commit_;
  std::atomic<std::int64_t> latency_us_;

  mutable std::mutex mu_;
  std::deque<TxnPtr> queue_;
  bool leader_active_ = false;
  bool trace_on_ = false;
  std::vector<TxnId> trace_;

  std::atomic<std::uint64_t> batches_{0}, commits_{0}, syncs_{0}, sync_ns_{0}, max_batch_{0};
};

}  // namespace hotlock
