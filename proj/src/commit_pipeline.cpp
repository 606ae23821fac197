#include "hotlock/commit_pipeline.hpp"

#include <thread>

namespace hotlock {

CommitPipeline::CommitPipeline(Stages stages, bool group_commit,
                               std::chrono::microseconds sync_latency)
    : stages_(std::move(stages)), group_commit_(group_commit), latency_us_(sync_latency.count()) {}

void CommitPipeline::enqueue(const TxnPtr& txn) {
  std::lock_guard lk(mu_);
  queue_.push_back(txn);
  txn->commit_enqueued.store(true, std::memory_order_release);
  if (trace_on_) trace_.push_back(txn->id());
}

void CommitPipeline::run(const TxnPtr& txn) {
  std::unique_lock lk(mu_);
  if (!leader_active_) {
    leader_active_ = true;
    lead(lk, txn);
    return;
  }
  while (!txn->commit_done.load(std::memory_order_acquire)) {
    if (txn->pipeline_lead.exchange(false)) {
      lead(lk, txn);
      return;
    }
    lk.unlock();
    txn->event.wait_until(Clock::now() + std::chrono::milliseconds(20));
    lk.lock();
  }
}

// Called with leader_active_ set; returns once self is committed and
// leadership has moved on.
void CommitPipeline::lead(std::unique_lock<std::mutex>& lk, const TxnPtr& self) {
  while (!self->commit_done.load(std::memory_order_acquire)) {
    const bool grouped = group_commit_.load();
    if (grouped) {
      // Give followers that are about to enqueue a chance to join.
      lk.unlock();
      std::this_thread::yield();
      lk.lock();
    }
    std::vector<TxnPtr> batch;
    if (grouped) {
      batch.assign(queue_.begin(), queue_.end());
      queue_.clear();
    } else if (!queue_.empty()) {
      batch.push_back(std::move(queue_.front()));
      queue_.pop_front();
    }
    if (batch.empty()) {
      // self is admitted but not yet visible: cannot happen once enqueue()
      // ran, kept as a guard.
      lk.unlock();
      std::this_thread::yield();
      lk.lock();
      continue;
    }
    lk.unlock();

    for (auto& m : batch) stages_.flush_member(*m);
    stages_.flush_batch();

    auto t0 = Clock::now();
    stages_.sync();
    auto us = latency_us_.load();
    if (us > 0) std::this_thread::sleep_for(std::chrono::microseconds(us));
    sync_ns_.fetch_add(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count());
    syncs_.fetch_add(1);

    for (auto& m : batch) {
      stages_.commit_member(*m);
      m->commit_done.store(true, std::memory_order_release);
      if (m != self) m->event.set();
    }
    batches_.fetch_add(1);
    commits_.fetch_add(batch.size());
    auto mx = max_batch_.load();
    while (batch.size() > mx && !max_batch_.compare_exchange_weak(mx, batch.size())) {
    }
    lk.lock();
  }
  if (queue_.empty()) {
    leader_active_ = false;
  } else {
    queue_.front()->pipeline_lead.store(true, std::memory_order_release);
    queue_.front()->event.set();
  }
}

void CommitPipeline::set_trace(bool on) {
  std::lock_guard lk(mu_);
  trace_on_ = on;
  trace_.clear();
}

std::vector<TxnId> CommitPipeline::admission_trace() const {
  std::lock_guard lk(mu_);
  return trace_;
}

CommitStats CommitPipeline::stats() const {
  CommitStats s;
  s.batches = batches_.load();
  s.commits = commits_.load();
  s.syncs = syncs_.load();
  s.sync_time_ns = sync_ns_.load();
  s.max_batch = max_batch_.load();
  return s;
}

}  // namespace hotlock
