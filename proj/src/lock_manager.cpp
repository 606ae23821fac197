#include "hotlock/lock_manager.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace hotlock {

namespace {

constexpr auto kRuleRecheck = std::chrono::milliseconds(5);

}  // namespace

std::optional<std::vector<TxnId>> find_cycle_through(
    TxnId start, const std::function<std::vector<TxnId>(TxnId)>& blockers) {
  struct Frame {
    TxnId node;
    std::vector<TxnId> next;
    std::size_t i = 0;
  };
  std::unordered_set<TxnId> visited{start};
  std::vector<Frame> stack;
  stack.push_back({start, blockers(start)});
  while (!stack.empty()) {
    Frame& f = stack.back();
    if (f.i == f.next.size()) {
      stack.pop_back();
      continue;
    }
    TxnId n = f.next[f.i++];
    if (n == start) {
      std::vector<TxnId> path;
      path.reserve(stack.size());
      for (const auto& fr : stack) path.push_back(fr.node);
      return path;
    }
    if (visited.insert(n).second) {
      auto next = blockers(n);
      stack.push_back({n, std::move(next)});
    }
  }
  return std::nullopt;
}

TxnId choose_victim(const std::vector<TxnId>& cycle,
                    const std::function<std::size_t(TxnId)>& undo_size) {
  TxnId best = cycle.front();
  std::size_t best_w = undo_size(best);
  for (TxnId t : cycle) {
    std::size_t w = undo_size(t);
    if (w < best_w || (w == best_w && t > best)) {
      best = t;
      best_w = w;
    }
  }
  return best;
}

LockManager::LockManager(LockHooks* hooks) : hooks_(hooks) {}

LockManager::Shard& LockManager::shard_for(const RowId& row) const {
  return shards_[RowIdHash{}(row) % kShards];
}

void LockManager::add_holder_locked(Entry& e, const TxnPtr& txn, LockMode mode, bool upgrade) {
  if (mode == LockMode::kExclusive) {
    for (const auto& h : e.holders)
      if (h.txn.get() != txn.get()) exclusion_violations_.fetch_add(1);
  } else {
    for (const auto& h : e.holders)
      if (h.txn.get() != txn.get() && h.mode == LockMode::kExclusive) exclusion_violations_.fetch_add(1);
  }
  if (upgrade) {
    for (auto& h : e.holders)
      if (h.txn.get() == txn.get()) h.mode = mode;
  } else {
    e.holders.push_back({txn, mode});
  }
  ++e.acquire_count;
  acquisitions_.fetch_add(1, std::memory_order_relaxed);
}

std::vector<TxnPtr> LockManager::grant_waiters_locked(Entry& e) {
  std::vector<TxnPtr> woken;
  while (!e.waiters.empty()) {
    auto& req = e.waiters.front();
    bool ok = std::all_of(e.holders.begin(), e.holders.end(), [&](const Holder& h) {
      return h.txn.get() == req->txn.get() || compatible(h.mode, req->mode);
    });
    if (!ok) break;
    add_holder_locked(e, req->txn, req->mode, req->upgrade);
    req->granted.store(true, std::memory_order_release);
    woken.push_back(req->txn);
    e.waiters.pop_front();
    e.trx_lock_wait.pop_front();
  }
  return woken;
}

bool LockManager::rule_blocks_locked(const Entry& e, const Transaction& waiter, LockMode mode,
                                     const Request* self) const {
  if (!hooks_) return false;
  for (const auto& h : e.holders) {
    if (h.txn.get() == &waiter || compatible(h.mode, mode)) continue;
    if (hooks_->hotspot_block_check(waiter, *h.txn)) return true;
  }
  for (const auto& w : e.waiters) {
    if (w.get() == self) break;
    if (w->txn.get() == &waiter || compatible(w->mode, mode)) continue;
    if (hooks_->hotspot_block_check(waiter, *w->txn)) return true;
  }
  return false;
}

AcquireResult LockManager::acquire(const TxnPtr& txn, const RowId& row, LockMode mode,
                                   bool detect_deadlocks, std::chrono::microseconds timeout) {
  Shard& s = shard_for(row);
  std::shared_ptr<Request> req;
  std::size_t qlen = 0;
  {
    std::unique_lock lk(s.mu);
    Entry& e = s.rows[row];
    bool upgrade = false;
    for (const auto& h : e.holders) {
      if (h.txn.get() != txn.get()) continue;
      if (h.mode == LockMode::kExclusive || mode == LockMode::kShared) return AcquireResult::kGranted;
      upgrade = true;
    }
    bool others_compatible = std::all_of(e.holders.begin(), e.holders.end(), [&](const Holder& h) {
      return h.txn.get() == txn.get() || compatible(h.mode, mode);
    });
    if (others_compatible && (e.waiters.empty() || upgrade)) {
      add_holder_locked(e, txn, mode, upgrade);
      if (!e.materialized) fast_path_.fetch_add(1, std::memory_order_relaxed);
      lk.unlock();
      if (upgrade) {
        for (auto& hl : txn->held_locks)
          if (hl.row == row) hl.mode = mode;
      } else {
        txn->held_locks.push_back({row, mode});
      }
      return AcquireResult::kGranted;
    }
    if (rule_blocks_locked(e, *txn, mode, nullptr)) {
      rule_aborts_.fetch_add(1, std::memory_order_relaxed);
      return AcquireResult::kAbortedByRule;
    }
    // Conflict: the holders' implicit locks and this request become objects.
    if (!e.materialized) {
      e.materialized = true;
      lock_objects_.fetch_add(e.holders.size(), std::memory_order_relaxed);
    }
    lock_objects_.fetch_add(1, std::memory_order_relaxed);
    req = std::make_shared<Request>();
    req->txn = txn;
    req->mode = mode;
    req->upgrade = upgrade;
    if (upgrade) {
      e.waiters.push_front(req);
      e.trx_lock_wait.push_front(txn->id());
    } else {
      e.waiters.push_back(req);
      e.trx_lock_wait.push_back(txn->id());
    }
    qlen = e.waiters.size();
    txn->set_waiting_row(row);
  }
  waits_.fetch_add(1, std::memory_order_relaxed);
  auto t0 = Clock::now();
  if (hooks_) hooks_->on_waiter_enqueued(*txn, row, qlen);

  auto finish = [&](AcquireResult r) {
    txn->set_waiting_row(std::nullopt);
    wait_time_ns_.fetch_add(
        std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0).count(),
        std::memory_order_relaxed);
    if (req->granted.load(std::memory_order_acquire)) {
      if (req->upgrade) {
        for (auto& hl : txn->held_locks)
          if (hl.row == row) hl.mode = mode;
      } else {
        txn->held_locks.push_back({row, mode});
      }
    }
    return r;
  };

  if (detect_deadlocks) {
    if (auto victim = detect_deadlock(txn)) {
      if (*victim == txn->id()) {
        if (!cancel(row, req)) return finish(AcquireResult::kDeadlockVictim);
        return finish(AcquireResult::kGranted);
      }
    }
  }

  const auto deadline = t0 + timeout;
  auto next_recheck = t0 + kRuleRecheck;
  for (;;) {
    if (req->granted.load(std::memory_order_acquire)) return finish(AcquireResult::kGranted);
    if (txn->abort_requested()) {
      cancel(row, req);
      return finish(AcquireResult::kAbortRequested);
    }
    auto now = Clock::now();
    if (now >= deadline) {
      if (cancel(row, req)) return finish(AcquireResult::kGranted);
      timeouts_.fetch_add(1, std::memory_order_relaxed);
      return finish(AcquireResult::kTimedOut);
    }
    // A blocker may have joined our hot row's dep_list since we enqueued.
    if (hooks_ && now >= next_recheck && txn->dep_entry.load(std::memory_order_acquire)) {
      next_recheck = now + kRuleRecheck;
      bool fire = false;
      {
        Shard& sh = shard_for(row);
        std::lock_guard lk(sh.mu);
        auto it = sh.rows.find(row);
        if (it != sh.rows.end() && !req->granted.load())
          fire = rule_blocks_locked(it->second, *txn, mode, req.get());
      }
      if (fire) {
        if (cancel(row, req)) return finish(AcquireResult::kGranted);
        rule_aborts_.fetch_add(1, std::memory_order_relaxed);
        return finish(AcquireResult::kAbortedByRule);
      }
    }
    auto until = deadline;
    if (hooks_ && txn->dep_entry.load(std::memory_order_relaxed)) until = std::min(until, next_recheck);
    txn->event.wait_until(until);
  }
}

bool LockManager::cancel(const RowId& row, const std::shared_ptr<Request>& req) {
  Shard& s = shard_for(row);
  std::vector<TxnPtr> woken;
  {
    std::lock_guard lk(s.mu);
    if (req->granted.load(std::memory_order_acquire)) return true;
    Entry& e = s.rows[row];
    auto it = std::find(e.waiters.begin(), e.waiters.end(), req);
    if (it != e.waiters.end()) {
      auto idx = std::distance(e.waiters.begin(), it);
      e.waiters.erase(it);
      e.trx_lock_wait.erase(std::next(e.trx_lock_wait.begin(), idx));
    }
    woken = grant_waiters_locked(e);
  }
  for (auto& t : woken) t->event.set();
  return false;
}

bool LockManager::release(Transaction& txn, const RowId& row, std::vector<TxnId>* woken_ids) {
  Shard& s = shard_for(row);
  std::vector<TxnPtr> woken;
  {
    std::lock_guard lk(s.mu);
    auto it = s.rows.find(row);
    if (it == s.rows.end()) return false;
    Entry& e = it->second;
    auto h = std::find_if(e.holders.begin(), e.holders.end(),
                          [&](const Holder& x) { return x.txn.get() == &txn; });
    if (h == e.holders.end()) return false;
    e.holders.erase(h);
    woken = grant_waiters_locked(e);
    if (e.holders.empty() && e.waiters.empty()) e.materialized = false;
  }
  for (auto& t : woken) {
    if (woken_ids) woken_ids->push_back(t->id());
    t->event.set();
  }
  return !woken.empty();
}

std::vector<TxnId> LockManager::release_all(Transaction& txn,
                                            const std::function<void(const RowId&, bool)>& on_row) {
  auto st = txn.state();
  if (st != TxnState::kPreparing && st != TxnState::kAborted)
    throw InvariantViolation("release_all on txn " + std::to_string(txn.id()) + " in state " +
                             std::string(to_string(st)));
  std::vector<TxnId> woken;
  auto held = std::move(txn.held_locks);
  txn.held_locks.clear();
  for (const auto& hl : held) {
    bool passed = release(txn, hl.row, &woken);
    if (on_row) on_row(hl.row, passed);
  }
  return woken;
}

std::vector<TxnPtr> LockManager::blockers_of(const Transaction& waiter) const {
  std::vector<TxnPtr> out;
  auto row = waiter.waiting_row();
  if (!row) return out;
  Shard& s = shard_for(*row);
  std::lock_guard lk(s.mu);
  auto it = s.rows.find(*row);
  if (it == s.rows.end()) return out;
  const Entry& e = it->second;
  auto self = std::find_if(e.waiters.begin(), e.waiters.end(),
                           [&](const auto& r) { return r->txn.get() == &waiter; });
  if (self == e.waiters.end()) return out;
  LockMode mode = (*self)->mode;
  for (const auto& h : e.holders)
    if (h.txn.get() != &waiter && !compatible(h.mode, mode)) out.push_back(h.txn);
  for (auto w = e.waiters.begin(); w != self; ++w)
    if ((*w)->txn.get() != &waiter && !compatible((*w)->mode, mode)) out.push_back((*w)->txn);
  return out;
}

std::optional<TxnId> LockManager::detect_deadlock(const TxnPtr& waiter) {
  deadlock_checks_.fetch_add(1, std::memory_order_relaxed);
  std::unordered_map<TxnId, TxnPtr> seen{{waiter->id(), waiter}};
  auto blockers = [&](TxnId id) {
    std::vector<TxnId> ids;
    auto it = seen.find(id);
    if (it == seen.end()) return ids;
    for (auto& b : blockers_of(*it->second)) {
      ids.push_back(b->id());
      seen.emplace(b->id(), b);
    }
    return ids;
  };
  auto cycle = find_cycle_through(waiter->id(), blockers);
  if (!cycle) return std::nullopt;
  // Transactions already in commit cannot be aborted.
  std::vector<TxnId> candidates;
  for (TxnId id : *cycle)
    if (seen.at(id)->state() == TxnState::kActive) candidates.push_back(id);
  if (candidates.empty()) candidates.push_back(waiter->id());
  TxnId victim = choose_victim(candidates, [&](TxnId id) { return seen.at(id)->undo_size(); });
  deadlock_victims_.fetch_add(1, std::memory_order_relaxed);
  if (victim != waiter->id()) seen.at(victim)->request_abort(AbortCause::kRuleAbort);
  return victim;
}

bool LockManager::holds(const Transaction& txn, const RowId& row, LockMode mode) const {
  Shard& s = shard_for(row);
  std::lock_guard lk(s.mu);
  auto it = s.rows.find(row);
  if (it == s.rows.end()) return false;
  for (const auto& h : it->second.holders)
    if (h.txn.get() == &txn && (h.mode == LockMode::kExclusive || mode == LockMode::kShared)) return true;
  return false;
}

std::size_t LockManager::wait_queue_len(const RowId& row) const {
  Shard& s = shard_for(row);
  std::lock_guard lk(s.mu);
  auto it = s.rows.find(row);
  return it == s.rows.end() ? 0 : it->second.waiters.size();
}

std::vector<TxnId> LockManager::waiter_ids(const RowId& row) const {
  Shard& s = shard_for(row);
  std::lock_guard lk(s.mu);
  auto it = s.rows.find(row);
  if (it == s.rows.end()) return {};
  return {it->second.trx_lock_wait.begin(), it->second.trx_lock_wait.end()};
}

std::vector<TxnId> LockManager::holder_ids(const RowId& row) const {
  Shard& s = shard_for(row);
  std::lock_guard lk(s.mu);
  std::vector<TxnId> out;
  auto it = s.rows.find(row);
  if (it != s.rows.end())
    for (const auto& h : it->second.holders) out.push_back(h.txn->id());
  return out;
}

std::uint64_t LockManager::acquire_count(const RowId& row) const {
  Shard& s = shard_for(row);
  std::lock_guard lk(s.mu);
  auto it = s.rows.find(row);
  return it == s.rows.end() ? 0 : it->second.acquire_count;
}

void LockManager::validate() const {
  for (const auto& s : shards_) {
    std::lock_guard lk(s.mu);
    for (const auto& [row, e] : s.rows) {
      if (e.waiters.size() != e.trx_lock_wait.size())
        throw InvariantViolation("waiter map size mismatch at " + row.to_string());
      auto id = e.trx_lock_wait.begin();
      std::unordered_set<const Transaction*> seen;
      for (const auto& w : e.waiters) {
        if (w->txn->id() != *id++) throw InvariantViolation("waiter map order mismatch at " + row.to_string());
        if (!seen.insert(w->txn.get()).second)
          throw InvariantViolation("txn queued twice at " + row.to_string());
      }
      std::size_t x = 0;
      std::unordered_set<const Transaction*> held;
      for (const auto& h : e.holders) {
        if (h.mode == LockMode::kExclusive) ++x;
        if (!held.insert(h.txn.get()).second) throw InvariantViolation("duplicate holder at " + row.to_string());
      }
      if (x > 1 || (x == 1 && e.holders.size() > 1))
        throw InvariantViolation("exclusive lock shared at " + row.to_string());
      for (const auto& w : e.waiters)
        if (held.count(w->txn.get()) && !w->upgrade)
          throw InvariantViolation("holder also waiting at " + row.to_string());
    }
  }
}

LockStats LockManager::stats() const {
  LockStats st;
  st.acquisitions = acquisitions_.load();
  st.fast_path = fast_path_.load();
  st.lock_objects = lock_objects_.load();
  st.waits = waits_.load();
  st.wait_time_ns = wait_time_ns_.load();
  st.deadlock_checks = deadlock_checks_.load();
  st.deadlock_victims = deadlock_victims_.load();
  st.rule_aborts = rule_aborts_.load();
  st.timeouts = timeouts_.load();
  st.exclusion_violations = exclusion_violations_.load();
  return st;
}

}  // namespace hotlock
