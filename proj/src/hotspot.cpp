#include "hotlock/hotspot.hpp"

#include <algorithm>

namespace hotlock {

namespace {

template <typename Q>
bool erase_txn(Q& q, const Transaction* t) {
  auto it = std::find_if(q.begin(), q.end(), [&](const TxnPtr& p) { return p.get() == t; });
  if (it == q.end()) return false;
  q.erase(it);
  return true;
}

template <typename Q>
std::ptrdiff_t position_of(const Q& q, const Transaction* t) {
  auto it = std::find_if(q.begin(), q.end(), [&](const TxnPtr& p) { return p.get() == t; });
  return it == q.end() ? -1 : std::distance(q.begin(), it);
}

}  // namespace

HotspotManager::HotspotManager(const EngineConfig& cfg, LockManager& locks, History& history,
                               GlobalCounters& counters)
    : locks_(locks), history_(history), counters_(counters) {
  configure(cfg);
}

HotspotManager::~HotspotManager() { stop_sweeper(); }

void HotspotManager::configure(const EngineConfig& cfg) {
  threshold_.store(cfg.hot_threshold);
  batch_.store(cfg.group_batch_size);
  dynamic_batch_.store(cfg.dynamic_batch);
  spin_us_.store(cfg.spin_delay.count());
  sweep_us_.store(cfg.sweep_interval.count());
  evict_idle_sweeps_.store(cfg.evict_idle_sweeps);
  protocol_.store(cfg.protocol);
}

void HotspotManager::sleep_spin() const {
  auto us = spin_us_.load(std::memory_order_relaxed);
  if (us > 0)
    std::this_thread::sleep_for(std::chrono::microseconds(us));
  else
    std::this_thread::yield();
}

Status HotspotManager::abort_status(const Transaction& txn) const {
  switch (txn.abort_cause()) {
    case AbortCause::kCascade: return Status::kCascadeAbort;
    case AbortCause::kTimeout: return Status::kTimedOut;
    default: return Status::kRuleAbort;
  }
}

Status HotspotManager::acquire_status(AcquireResult r, const Transaction& txn) const {
  switch (r) {
    case AcquireResult::kGranted: return Status::kOk;
    case AcquireResult::kTimedOut: return Status::kTimedOut;
    case AcquireResult::kAbortedByRule: return Status::kRuleAbort;
    case AcquireResult::kDeadlockVictim: return Status::kDeadlockVictim;
    case AcquireResult::kAbortRequested: return abort_status(txn);
  }
  return Status::kRuleAbort;
}

bool HotspotManager::hotspot_block_check(const Transaction& waiter, const Transaction& blocker) {
  const HotRowState* a = waiter.dep_entry.load(std::memory_order_acquire);
  return a != nullptr && a == blocker.dep_entry.load(std::memory_order_acquire);
}

void HotspotManager::on_waiter_enqueued(const Transaction& waiter, const RowId& row,
                                        std::size_t queue_len) {
  if (waiter.protocol() == Protocol::kTwoPL) return;
  maybe_promote(row, queue_len,
                waiter.protocol() == Protocol::kQueueLock ? HotMode::kQueue : HotMode::kGroup);
}

std::shared_ptr<HotRowState> HotspotManager::find(const RowId& row) const {
  if (count_.load(std::memory_order_acquire) == 0) return nullptr;
  std::shared_lock lk(table_mu_);
  auto it = table_.find(row);
  return it == table_.end() ? nullptr : it->second;
}

bool HotspotManager::maybe_promote(const RowId& row, std::size_t wait_queue_len, HotMode mode) {
  if (wait_queue_len <= threshold_.load(std::memory_order_relaxed)) return false;
  std::unique_lock lk(table_mu_);
  if (table_.count(row)) return false;
  auto e = std::make_shared<HotRowState>(row, mode);
  // Whoever is already queued in lock_sys drains before the hot path runs.
  e->legacy_waiters_drained = false;
  table_.emplace(row, std::move(e));
  count_.fetch_add(1, std::memory_order_release);
  promotions_.fetch_add(1, std::memory_order_relaxed);
  return true;
}

std::shared_ptr<HotRowState> HotspotManager::force_promote(const RowId& row, HotMode mode) {
  std::unique_lock lk(table_mu_);
  auto it = table_.find(row);
  if (it != table_.end()) return it->second;
  auto e = std::make_shared<HotRowState>(row, mode);
  e->legacy_waiters_drained = locks_.wait_queue_len(row) == 0;
  table_.emplace(row, e);
  count_.fetch_add(1, std::memory_order_release);
  promotions_.fetch_add(1, std::memory_order_relaxed);
  return e;
}

void HotspotManager::run_apply(HotRowState& e, const std::function<void()>& apply) {
  if (e.inside_apply.fetch_add(1, std::memory_order_acq_rel) > 0)
    apply_overlaps_.fetch_add(1, std::memory_order_relaxed);
  apply();
  e.inside_apply.fetch_sub(1, std::memory_order_acq_rel);
}

void HotspotManager::append_locked(const std::shared_ptr<HotRowState>& e, const TxnPtr& txn) {
  HotOrder o = counters_.take_hot_order();
  if (!e->dep_list.empty() && e->dep_list.back()->hot_order.load() >= o)
    order_violations_.fetch_add(1, std::memory_order_relaxed);
  txn->hot_order.store(o, std::memory_order_release);
  e->dep_list.push_back(txn);
  txn->hot_entry = e;
  txn->dep_entry.store(e.get(), std::memory_order_release);
  group_members_.fetch_add(1, std::memory_order_relaxed);
}

void HotspotManager::kick_locked(HotRowState& e) {
  if (!e.leader || e.switching_new_leader || e.granting_new_trx || e.executing || e.rolling_back > 0)
    return;
  if (e.grants_in_group >= batch_.load(std::memory_order_relaxed)) return;
  if (e.waiting_updates.empty()) return;
  TxnPtr next = std::move(e.waiting_updates.front());
  e.waiting_updates.pop_front();
  e.granting_new_trx = true;
  ++e.grants_in_group;
  e.executing = next.get();
  next->hot_status.store(HotUpdateStatus::kGranted, std::memory_order_release);
  grants_.fetch_add(1, std::memory_order_relaxed);
  next->event.set();
}

void HotspotManager::post_update_locked(HotRowState& e, Transaction& txn) {
  if (e.executing == &txn) {
    e.executing = nullptr;
    if (txn.hot_status.load() == HotUpdateStatus::kGranted) e.granting_new_trx = false;
  }
  if (e.leader == &txn && txn.hot_status.load() == HotUpdateStatus::kRunning)
    e.switching_new_leader = false;
  if (e.switching_new_leader) return;
  kick_locked(e);
}

void HotspotManager::handoff_locked(HotRowState& e) {
  if (e.leader || e.designate) return;
  if (!e.waiting_updates.empty()) {
    e.designate = std::move(e.waiting_updates.front());
    e.waiting_updates.pop_front();
    e.stalled = false;
    e.designate->is_leader.store(true, std::memory_order_release);
    e.designate->hot_status.store(HotUpdateStatus::kRunning, std::memory_order_release);
    e.designate->event.set();
  } else if (!dynamic_batch_.load(std::memory_order_relaxed)) {
    e.stalled = true;
  }
}

void HotspotManager::handoff_queue_locked(HotRowState& e) {
  if (e.leader || e.designate || e.waiting_updates.empty()) return;
  e.designate = std::move(e.waiting_updates.front());
  e.waiting_updates.pop_front();
  e.designate->event.set();
}

void HotspotManager::refresh_legacy_locked(HotRowState& e) {
  if (e.legacy_waiters_drained || e.leader || e.designate) return;
  if (locks_.wait_queue_len(e.row) == 0 && locks_.holder_ids(e.row).empty()) {
    e.legacy_waiters_drained = true;
    if (e.mode == HotMode::kGroup)
      handoff_locked(e);
    else
      handoff_queue_locked(e);
  }
}

void HotspotManager::handle_release_locked(HotRowState& e, bool passed) {
  if (passed) {
    e.legacy_waiters_drained = false;
    return;
  }
  e.legacy_waiters_drained = true;
  handoff_locked(e);
}

HotspotManager::Outcome HotspotManager::execute(const TxnPtr& txn,
                                                const std::shared_ptr<HotRowState>& e,
                                                HotAccess kind, const std::function<void()>& apply) {
  if (e->mode == HotMode::kQueue) return execute_queue(txn, e);
  return execute_group(txn, e, kind, apply);
}

HotspotManager::Outcome HotspotManager::execute_group(const TxnPtr& txn,
                                                      const std::shared_ptr<HotRowState>& e,
                                                      HotAccess kind,
                                                      const std::function<void()>& apply) {
  std::unique_lock lk(e->mu);
  if (e->evicted) return {Status::kOk, true};

  const HotRowState* cur = txn->dep_entry.load(std::memory_order_acquire);
  if (cur == e.get()) {
    if (txn->holds_turn) {
      lk.unlock();
      run_apply(*e, apply);
      lk.lock();
      if (kind == HotAccess::kWrite) {
        txn->holds_turn = false;
        post_update_locked(*e, *txn);
      }
      return {};
    }
    // Nobody has touched the row since our last write: update in place.
    if (e->dep_list.back().get() == txn.get() && !e->executing && !e->granting_new_trx &&
        e->rolling_back == 0) {
      e->executing = txn.get();
      lk.unlock();
      run_apply(*e, apply);
      lk.lock();
      e->executing = nullptr;
      kick_locked(*e);
      return {};
    }
    return {Status::kHotOrderConflict};
  }
  if (cur) return {Status::kMultipleHotRows};
  if (locks_.holds(*txn, e->row, LockMode::kExclusive)) return lead_locked(lk, txn, e, kind, apply);

  const auto timeout = txn->config().lock_wait_timeout;
  refresh_legacy_locked(*e);
  if (e->group_active_locked()) {
    txn->hot_status.store(HotUpdateStatus::kWaiting, std::memory_order_release);
    e->waiting_updates.push_back(txn);
    kick_locked(*e);
    const auto deadline = Clock::now() + timeout;
    for (;;) {
      if (txn->hot_status.load() == HotUpdateStatus::kGranted || e->designate.get() == txn.get()) break;
      Status fail = Status::kOk;
      if (txn->abort_requested())
        fail = abort_status(*txn);
      else if (Clock::now() >= deadline)
        fail = Status::kTimedOut;
      if (fail != Status::kOk) {
        erase_txn(e->waiting_updates, txn.get());
        txn->hot_status.store(HotUpdateStatus::kNone);
        return {fail};
      }
      lk.unlock();
      txn->event.wait_until(deadline);
      lk.lock();
    }
    if (txn->hot_status.load() == HotUpdateStatus::kGranted) {
      if (txn->abort_requested()) {
        e->executing = nullptr;
        e->granting_new_trx = false;
        txn->hot_status.store(HotUpdateStatus::kNone);
        kick_locked(*e);
        return {abort_status(*txn)};
      }
      append_locked(e, txn);
      lk.unlock();
      run_apply(*e, apply);
      lk.lock();
      if (kind == HotAccess::kSfu) {
        txn->holds_turn = true;
        txn->queued_for_update = true;
        return {};
      }
      post_update_locked(*e, *txn);
      return {};
    }
    if (txn->abort_requested()) {
      e->designate.reset();
      txn->is_leader.store(false);
      txn->hot_status.store(HotUpdateStatus::kNone);
      handoff_locked(*e);
      return {abort_status(*txn)};
    }
  } else {
    e->designate = txn;
  }

  // Leader path: take the row lock once for the whole group.
  lk.unlock();
  AcquireResult r = locks_.acquire(txn, e->row, LockMode::kExclusive, false, timeout);
  lk.lock();
  if (e->designate.get() == txn.get()) e->designate.reset();
  if (r != AcquireResult::kGranted) {
    txn->is_leader.store(false);
    txn->hot_status.store(HotUpdateStatus::kNone);
    handoff_locked(*e);
    return {acquire_status(r, *txn)};
  }
  return lead_locked(lk, txn, e, kind, apply);
}

HotspotManager::Outcome HotspotManager::lead_locked(std::unique_lock<std::mutex>& lk,
                                                    const TxnPtr& txn,
                                                    const std::shared_ptr<HotRowState>& e,
                                                    HotAccess kind,
                                                    const std::function<void()>& apply) {
  while (e->rolling_back > 0 && !e->evicted) {
    lk.unlock();
    sleep_spin();
    lk.lock();
  }
  if (e->evicted) {
    txn->is_leader.store(false);
    txn->hot_status.store(HotUpdateStatus::kNone);
    return {Status::kOk, true};
  }
  if (txn->abort_requested()) {
    txn->is_leader.store(false);
    txn->hot_status.store(HotUpdateStatus::kNone);
    return {abort_status(*txn)};
  }
  e->leader = txn.get();
  e->grants_in_group = 0;
  e->stalled = false;
  e->switching_new_leader = false;
  txn->is_leader.store(true, std::memory_order_release);
  txn->hot_status.store(HotUpdateStatus::kRunning, std::memory_order_release);
  groups_.fetch_add(1, std::memory_order_relaxed);
  append_locked(e, txn);
  e->executing = txn.get();
  lk.unlock();
  run_apply(*e, apply);
  lk.lock();
  if (kind == HotAccess::kSfu) {
    txn->holds_turn = true;
    txn->queued_for_update = true;
    return {};
  }
  post_update_locked(*e, *txn);
  return {};
}

HotspotManager::Outcome HotspotManager::adopt(const TxnPtr& txn,
                                              const std::shared_ptr<HotRowState>& e,
                                              HotAccess kind, const std::function<void()>& apply) {
  std::unique_lock lk(e->mu);
  if (e->evicted || e->mode != HotMode::kGroup) return {Status::kOk, true};
  const HotRowState* cur = txn->dep_entry.load(std::memory_order_acquire);
  if (cur == e.get()) return {Status::kHotOrderConflict};
  if (cur) return {Status::kMultipleHotRows};
  return lead_locked(lk, txn, e, kind, apply);
}

Status HotspotManager::wait_drained(Transaction& txn, const std::shared_ptr<HotRowState>& e) {
  const auto deadline = Clock::now() + txn.config().lock_wait_timeout;
  std::unique_lock lk(e->mu);
  while (!e->evicted && !e->dep_list.empty()) {
    if (txn.abort_requested()) return abort_status(txn);
    if (Clock::now() >= deadline) return Status::kTimedOut;
    lk.unlock();
    sleep_spin();
    lk.lock();
  }
  return Status::kOk;
}

HotspotManager::Outcome HotspotManager::execute_queue(const TxnPtr& txn,
                                                      const std::shared_ptr<HotRowState>& e) {
  std::unique_lock lk(e->mu);
  if (e->evicted || e->leader == txn.get()) return {Status::kOk, true};
  refresh_legacy_locked(*e);
  if (!e->leader && !e->designate && e->waiting_updates.empty()) {
    e->leader = txn.get();
  } else {
    txn->hot_status.store(HotUpdateStatus::kWaiting);
    e->waiting_updates.push_back(txn);
    kick_locked(*e);
    const auto deadline = Clock::now() + txn->config().lock_wait_timeout;
    while (e->designate.get() != txn.get()) {
      Status fail = Status::kOk;
      if (txn->abort_requested())
        fail = abort_status(*txn);
      else if (Clock::now() >= deadline)
        fail = Status::kTimedOut;
      if (fail != Status::kOk) {
        erase_txn(e->waiting_updates, txn.get());
        txn->hot_status.store(HotUpdateStatus::kNone);
        return {fail};
      }
      lk.unlock();
      txn->event.wait_until(deadline);
      lk.lock();
    }
    e->designate.reset();
    e->leader = txn.get();
  }
  txn->hot_status.store(HotUpdateStatus::kRunning);
  txn->queue_turns.push_back(e);
  return {Status::kOk, true};
}

void HotspotManager::release_turn(Transaction& txn) {
  if (!txn.holds_turn || !txn.hot_entry) return;
  auto e = txn.hot_entry;
  std::lock_guard lk(e->mu);
  txn.holds_turn = false;
  post_update_locked(*e, txn);
}

Status HotspotManager::commit_gate(Transaction& txn, const std::function<void()>& enqueue) {
  auto e = txn.hot_entry;
  if (!e || txn.dep_entry.load() != e.get()) {
    enqueue();
    txn.commit_enqueued.store(true, std::memory_order_release);
    return Status::kOk;
  }
  const auto deadline = Clock::now() + txn.config().lock_wait_timeout;
  std::unique_lock lk(e->mu);
  for (;;) {
    if (txn.abort_requested()) return abort_status(txn);
    auto pos = position_of(e->dep_list, &txn);
    const Transaction* pred = pos > 0 ? e->dep_list[pos - 1].get() : nullptr;
    if (!pred || pred->commit_enqueued.load(std::memory_order_acquire)) {
      // Admission to the flush queue happens under the row mutex so that
      // queue order equals dep_list order.
      enqueue();
      txn.commit_enqueued.store(true, std::memory_order_release);
      if (pos >= 0 && static_cast<std::size_t>(pos + 1) < e->dep_list.size())
        e->dep_list[pos + 1]->event.set();
      return Status::kOk;
    }
    if (Clock::now() >= deadline) return Status::kTimedOut;
    lk.unlock();
    txn.event.wait_until(deadline);
    lk.lock();
  }
}

void HotspotManager::hot_commit_release(Transaction& txn) {
  auto e = txn.hot_entry;
  if (!e) return;
  std::unique_lock lk(e->mu);
  if (e->leader != &txn) return;
  e->switching_new_leader = true;
  // Followers already granted finish their update before the lock goes.
  while (e->granting_new_trx || (e->executing && e->executing != &txn)) {
    lk.unlock();
    sleep_spin();
    lk.lock();
  }
  e->leader = nullptr;
  txn.is_leader.store(false, std::memory_order_release);
  lk.unlock();
  bool passed = locks_.release(txn, e->row);
  std::erase_if(txn.held_locks, [&](const HeldLock& h) { return h.row == e->row; });
  lk.lock();
  handle_release_locked(*e, passed);
  e->switching_new_leader = false;
}

void HotspotManager::after_release(Transaction& txn, const RowId& row, bool passed) {
  auto e = find(row);
  if (!e || e->mode != HotMode::kGroup) return;
  std::lock_guard lk(e->mu);
  if (e->leader == &txn) {
    e->leader = nullptr;
    txn.is_leader.store(false, std::memory_order_release);
  } else if (e->leader) {
    return;
  }
  handle_release_locked(*e, passed);
}

void HotspotManager::on_commit(Transaction& txn) {
  auto e = txn.hot_entry;
  if (!e) return;
  std::lock_guard lk(e->mu);
  erase_txn(e->dep_list, &txn);
  txn.dep_entry.store(nullptr, std::memory_order_release);
  txn.hot_status.store(HotUpdateStatus::kNone, std::memory_order_release);
  txn.is_leader.store(false, std::memory_order_release);
  if (e->executing == &txn) e->executing = nullptr;
}

void HotspotManager::begin_rollback(Transaction& txn) {
  auto e = txn.hot_entry;
  if (!e || txn.dep_entry.load() != e.get()) return;
  std::unique_lock lk(e->mu);
  ++e->rolling_back;
  if (e->executing == &txn) {
    e->executing = nullptr;
    if (txn.hot_status.load() == HotUpdateStatus::kGranted) e->granting_new_trx = false;
  }
  txn.holds_turn = false;
  if (e->leader == &txn && txn.hot_status.load() == HotUpdateStatus::kRunning)
    e->switching_new_leader = false;
  for (;;) {
    auto pos = position_of(e->dep_list, &txn);
    for (std::size_t i = static_cast<std::size_t>(pos) + 1; i < e->dep_list.size(); ++i)
      if (e->dep_list[i]->request_abort(AbortCause::kCascade))
        cascade_requests_.fetch_add(1, std::memory_order_relaxed);
    if (e->dep_list.back().get() == &txn && !e->granting_new_trx && !e->switching_new_leader &&
        !e->executing)
      break;
    lk.unlock();
    sleep_spin();
    lk.lock();
  }
}

void HotspotManager::finish_rollback(Transaction& txn, AbortCause cause) {
  auto e = txn.hot_entry;
  if (!e || txn.dep_entry.load() != e.get()) return;
  std::lock_guard lk(e->mu);
  erase_txn(e->dep_list, &txn);
  txn.dep_entry.store(nullptr, std::memory_order_release);
  HistoryEvent ev;
  ev.seq = history_.next_seq();
  ev.txn = txn.id();
  ev.kind = EventKind::kAbort;
  ev.row = e->row;
  ev.hot_order = txn.hot_order.load();
  ev.cause = cause;
  txn.events.push_back(std::move(ev));
  --e->rolling_back;
  txn.hot_status.store(HotUpdateStatus::kNone, std::memory_order_release);
  if (e->leader == &txn) {
    // The row lock goes with the rest of txn's locks; after_release hands over.
    e->leader = nullptr;
    txn.is_leader.store(false, std::memory_order_release);
  } else {
    kick_locked(*e);
  }
}

void HotspotManager::on_txn_end(Transaction& txn) {
  for (auto& e : txn.queue_turns) {
    std::lock_guard lk(e->mu);
    if (e->leader == &txn) e->leader = nullptr;
    handoff_queue_locked(*e);
  }
  txn.queue_turns.clear();
  if (auto e = txn.hot_entry) {
    std::lock_guard lk(e->mu);
    if (e->designate.get() == &txn) {
      e->designate.reset();
      handoff_locked(*e);
    }
  }
  txn.hot_entry.reset();
}

std::vector<RowId> HotspotManager::sweep() {
  std::vector<std::shared_ptr<HotRowState>> entries;
  {
    std::shared_lock lk(table_mu_);
    for (auto& [row, e] : table_) entries.push_back(e);
  }
  const Protocol cur = protocol_.load();
  const bool dynamic = dynamic_batch_.load();
  std::vector<std::shared_ptr<HotRowState>> victims;
  for (auto& e : entries) {
    std::lock_guard lk(e->mu);
    refresh_legacy_locked(*e);
    if (e->mode == HotMode::kGroup && e->stalled && !e->leader && !e->designate &&
        !e->waiting_updates.empty()) {
      e->stalled = false;
      handoff_locked(*e);
      sweep_grants_.fetch_add(1, std::memory_order_relaxed);
      if (dynamic) sweep_grants_dynamic_.fetch_add(1, std::memory_order_relaxed);
    }
    bool idle = e->dep_list.empty() && e->waiting_updates.empty() && !e->leader && !e->designate &&
                !e->executing && e->rolling_back == 0;
    if (!idle) {
      e->idle_sweeps = 0;
      continue;
    }
    bool demote = cur == Protocol::kTwoPL || (cur == Protocol::kQueueLock) != (e->mode == HotMode::kQueue);
    if (demote || ++e->idle_sweeps >= evict_idle_sweeps_.load()) {
      e->evicted = true;
      e->stalled = false;
      victims.push_back(e);
    }
  }
  std::vector<RowId> out;
  if (!victims.empty()) {
    std::unique_lock lk(table_mu_);
    for (auto& e : victims) {
      auto it = table_.find(e->row);
      if (it != table_.end() && it->second == e) {
        table_.erase(it);
        count_.fetch_sub(1, std::memory_order_release);
        evictions_.fetch_add(1, std::memory_order_relaxed);
        out.push_back(e->row);
        retired_.push_back(e);
      }
    }
  }
  return out;
}

void HotspotManager::start_sweeper() {
  std::lock_guard lk(sweeper_mu_);
  if (sweeper_.joinable()) return;
  sweeper_stop_ = false;
  sweeper_ = std::thread([this] { sweeper_main(); });
}

void HotspotManager::stop_sweeper() {
  {
    std::lock_guard lk(sweeper_mu_);
    sweeper_stop_ = true;
  }
  sweeper_cv_.notify_all();
  if (sweeper_.joinable()) sweeper_.join();
}

void HotspotManager::sweeper_main() {
  std::unique_lock lk(sweeper_mu_);
  while (!sweeper_stop_) {
    sweeper_cv_.wait_for(lk, std::chrono::microseconds(sweep_us_.load()),
                         [&] { return sweeper_stop_; });
    if (sweeper_stop_) break;
    lk.unlock();
    sweep();
    lk.lock();
  }
}

HotspotStats HotspotManager::stats() const {
  HotspotStats s;
  s.promotions = promotions_.load();
  s.evictions = evictions_.load();
  s.groups = groups_.load();
  s.group_members = group_members_.load();
  s.grants = grants_.load();
  s.cascade_requests = cascade_requests_.load();
  s.sweep_grants = sweep_grants_.load();
  s.sweep_grants_dynamic = sweep_grants_dynamic_.load();
  s.apply_overlaps = apply_overlaps_.load();
  s.order_violations = order_violations_.load();
  return s;
}

std::vector<TxnId> HotspotManager::dep_list_ids(const RowId& row) const {
  std::vector<TxnId> out;
  if (auto e = find(row)) {
    std::lock_guard lk(e->mu);
    for (auto& t : e->dep_list) out.push_back(t->id());
  }
  return out;
}

std::vector<TxnId> HotspotManager::waiting_ids(const RowId& row) const {
  std::vector<TxnId> out;
  if (auto e = find(row)) {
    std::lock_guard lk(e->mu);
    for (auto& t : e->waiting_updates) out.push_back(t->id());
  }
  return out;
}

}  // namespace hotlock
