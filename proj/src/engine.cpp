#include "hotlock/engine.hpp"

#include <cstdio>
#include <cstdlib>

namespace hotlock {

namespace {

Status status_for(AbortCause c) {
  switch (c) {
    case AbortCause::kCascade: return Status::kCascadeAbort;
    case AbortCause::kTimeout: return Status::kTimedOut;
    default: return Status::kRuleAbort;
  }
}

Status from_acquire(AcquireResult r, const Transaction& txn) {
  switch (r) {
    case AcquireResult::kGranted: return Status::kOk;
    case AcquireResult::kTimedOut: return Status::kTimedOut;
    case AcquireResult::kAbortedByRule: return Status::kRuleAbort;
    case AcquireResult::kDeadlockVictim: return Status::kDeadlockVictim;
    case AcquireResult::kAbortRequested: return status_for(txn.abort_cause());
  }
  return Status::kRuleAbort;
}

[[noreturn]] void fail_stop(const std::exception& e) {
  std::fprintf(stderr, "fatal: %s\n", e.what());
  std::abort();
}

}  // namespace

Engine::Engine(const EngineConfig& cfg, const EngineOptions& opts)
    : cfg_(cfg), opts_(opts), hot_(cfg, locks_, history_, counters_), locks_(&hot_) {
  cfg_.validate();
  if (!opts_.log_path.empty())
    log_ = std::make_unique<UndoLog>(opts_.log_path, opts_.truncate_log, opts_.fsync);
  CommitPipeline::Stages stages;
  stages.flush_member = [this](Transaction& t) { flush_member(t); };
  stages.flush_batch = [this] {
    if (!log_) return;
    try {
      log_->flush();
    } catch (const LogError& e) {
      fail_stop(e);
    }
  };
  stages.sync = [this] {
    if (!log_) return;
    try {
      log_->sync();
    } catch (const LogError& e) {
      fail_stop(e);
    }
  };
  stages.commit_member = [this](Transaction& t) { commit_member(t); };
  pipeline_ = std::make_unique<CommitPipeline>(std::move(stages), cfg_.group_commit,
                                               cfg_.commit_latency_injection);
  if (opts_.start_sweeper) hot_.start_sweeper();
}

Engine::~Engine() {
  hot_.stop_sweeper();
  if (log_) {
    try {
      log_->flush();
    } catch (...) {
    }
  }
}

TxnPtr Engine::begin() {
  if (shutdown_.load(std::memory_order_acquire)) throw EngineShutdown("engine is shutting down");
  EngineConfig cfg = config();
  TxnId id = counters_.take_txn_id();
  begun_.fetch_add(1, std::memory_order_relaxed);
  return std::make_shared<Transaction>(id, cfg.protocol, Snapshot{visible_seq(), id}, cfg);
}

void Engine::set_protocol(const EngineConfig& cfg) {
  cfg.validate();
  std::lock_guard lk(cfg_mu_);
  cfg_ = cfg;
  hot_.configure(cfg);
  pipeline_->set_group_commit(cfg.group_commit);
  pipeline_->set_sync_latency(cfg.commit_latency_injection);
}

EngineConfig Engine::config() const {
  std::lock_guard lk(cfg_mu_);
  return cfg_;
}

void Engine::set_group_commit(bool on) {
  std::lock_guard lk(cfg_mu_);
  cfg_.group_commit = on;
  pipeline_->set_group_commit(on);
}

void Engine::load_row(const RowId& row, const Value& v) {
  storage_.install(row, v, 0);
  if (log_) log_->append_load(row, v);
}

void Engine::load_rows(std::uint32_t space, std::uint64_t count, const Value& v) {
  for (std::uint64_t i = 0; i < count; ++i) load_row(row_at(space, i), v);
  if (log_) log_->flush();
}

void Engine::restore(const RecoveryResult& r) {
  for (const auto& [row, v] : r.table) {
    auto ts = r.row_ts.find(row);
    storage_.install(row, v, ts == r.row_ts.end() ? 0 : ts->second);
    if (log_) log_->append_load(row, v);
  }
  if (log_) log_->flush();
  counters_.next_txn_id.store(r.max_txn + 1);
  counters_.global_hot_update_order.store(r.max_hot_order + 1);
  counters_.next_commit_seq.store(r.max_commit_seq + 1);
  visible_.store(r.max_commit_seq);
}

Status Engine::precheck(const Transaction& txn) const {
  if (txn.state() != TxnState::kActive)
    throw InvariantViolation("operation on txn " + std::to_string(txn.id()) + " in state " +
                             std::string(to_string(txn.state())));
  if (txn.abort_requested()) return status_for(txn.abort_cause());
  return Status::kOk;
}

void Engine::record(Transaction& txn, HistoryEvent ev) {
  if (!opts_.record_history) return;
  ev.seq = history_.next_seq();
  ev.txn = txn.id();
  txn.events.push_back(std::move(ev));
}

Status Engine::acquire(const TxnPtr& txn, const RowId& row, LockMode mode) {
  // Queue and group locking rely on timeouts plus the hot-row rule.
  AcquireResult r = locks_.acquire(txn, row, mode, txn->protocol() == Protocol::kTwoPL,
                                   txn->config().lock_wait_timeout);
  return from_acquire(r, *txn);
}

Status Engine::exclusive_access(const TxnPtr& txn, const RowId& row, HotAccess kind,
                                const std::function<void(bool)>& apply) {
  const bool two_pl = txn->protocol() == Protocol::kTwoPL;
  if (!two_pl) {
    if (auto e = hot_.find(row)) {
      auto o = hot_.execute(txn, e, kind, [&] { apply(true); });
      if (!o.fallback || o.status != Status::kOk) return o.status;
    }
  }
  if (Status s = acquire(txn, row, LockMode::kExclusive); s != Status::kOk) return s;
  if (auto e = hot_.find(row); e && e->mode == HotMode::kGroup) {
    if (!two_pl) {
      auto o = hot_.adopt(txn, e, kind, [&] { apply(true); });
      if (!o.fallback || o.status != Status::kOk) return o.status;
    } else if (Status s = hot_.wait_drained(*txn, e); s != Status::kOk) {
      return s;
    }
  }
  apply(false);
  return Status::kOk;
}

Status Engine::write(const TxnPtr& txn, const RowId& row, const WriteFn& fn, Value* out) {
  if (Status s = precheck(*txn); s != Status::kOk) return s;
  if (!storage_.contains(row)) return Status::kNotFound;
  return exclusive_access(txn, row, HotAccess::kWrite, [&](bool hot) {
    auto cur = storage_.current_read(row);
    Value next = fn(cur->value);
    HotOrder order = hot ? txn->hot_order.load() : kNoHotOrder;
    UndoRecord rec = storage_.apply_update(txn->id(), order, row, next, txn->next_write_seq());
    if (log_) {
      if (hot && !txn->hot_header_logged) {
        log_->append_header(txn->id(), encode_hot_order(order));
        txn->hot_header_logged = true;
      }
      log_->append_undo(txn->id(), rec);
    }
    txn->push_undo(rec);
    HistoryEvent w;
    w.kind = EventKind::kWrite;
    w.row = row;
    w.value = next;
    w.prior = cur->value;
    w.observed_writer = cur->writer;
    w.hot_order = order;
    record(*txn, std::move(w));
    if (out) *out = std::move(next);
  });
}

Status Engine::update(const TxnPtr& txn, const RowId& row, const Value& v) {
  return write(txn, row, [&](const Value&) { return v; }, nullptr);
}

Status Engine::increment(const TxnPtr& txn, const RowId& row, std::int64_t delta, Value* out) {
  return write(txn, row, [&](const Value& cur) { return Value::of_int(cur.as_int() + delta); }, out);
}

Status Engine::read(const TxnPtr& txn, const RowId& row, Value* out) {
  if (Status s = precheck(*txn); s != Status::kOk) return s;
  auto r = storage_.read(txn->snapshot(), row);
  if (!r) return Status::kNotFound;
  HistoryEvent ev;
  ev.kind = EventKind::kRead;
  ev.row = row;
  ev.value = r->value;
  ev.observed_writer = r->writer;
  record(*txn, std::move(ev));
  if (out) *out = std::move(r->value);
  return Status::kOk;
}

Status Engine::read_for_share(const TxnPtr& txn, const RowId& row, Value* out) {
  if (Status s = precheck(*txn); s != Status::kOk) return s;
  if (!storage_.contains(row)) return Status::kNotFound;
  auto observe = [&](const ReadResult& r, HotOrder order) {
    HistoryEvent ev;
    ev.kind = EventKind::kRead;
    ev.row = row;
    ev.value = r.value;
    ev.observed_writer = r.writer;
    ev.hot_order = order;
    record(*txn, std::move(ev));
    if (out) *out = r.value;
  };
  if (txn->protocol() != Protocol::kTwoPL) {
    if (auto e = hot_.find(row); e && e->mode == HotMode::kGroup) {
      auto o = hot_.execute(txn, e, HotAccess::kRead,
                            [&] { observe(*storage_.current_read(row), txn->hot_order.load()); });
      if (!o.fallback || o.status != Status::kOk) return o.status;
    }
  }
  if (Status s = acquire(txn, row, LockMode::kShared); s != Status::kOk) return s;
  if (auto e = hot_.find(row); e && e->mode == HotMode::kGroup)
    if (Status s = hot_.wait_drained(*txn, e); s != Status::kOk) return s;
  // Newest committed version, or our own write.
  auto r = storage_.read(Snapshot{kOpenTs - 1, txn->id()}, row);
  observe(*r, kNoHotOrder);
  return Status::kOk;
}

Status Engine::select_for_update(const TxnPtr& txn, const RowId& row, Value* out) {
  if (Status s = precheck(*txn); s != Status::kOk) return s;
  if (!storage_.contains(row)) return Status::kNotFound;
  return exclusive_access(txn, row, HotAccess::kSfu, [&](bool hot) {
    auto cur = storage_.current_read(row);
    HistoryEvent ev;
    ev.kind = EventKind::kSfu;
    ev.row = row;
    ev.value = cur->value;
    ev.observed_writer = cur->writer;
    ev.hot_order = hot ? txn->hot_order.load() : kNoHotOrder;
    record(*txn, std::move(ev));
    if (out) *out = cur->value;
  });
}

Status Engine::commit(const TxnPtr& txn) {
  if (txn->state() != TxnState::kActive)
    throw InvariantViolation("commit of txn " + std::to_string(txn->id()) + " in state " +
                             std::string(to_string(txn->state())));
  if (txn->abort_requested()) {
    Status s = status_for(txn->abort_cause());
    rollback(txn, txn->abort_cause());
    return s;
  }
  hot_.release_turn(*txn);
  txn->transition(TxnState::kPreparing);
  Status s = hot_.commit_gate(*txn, [&] { pipeline_->enqueue(txn); });
  if (s != Status::kOk) {
    rollback(txn, cause_of(s));
    return s;
  }
  pipeline_->run(txn);
  return Status::kOk;
}

void Engine::flush_member(Transaction& txn) {
  txn.commit_seq = counters_.take_commit_seq();
  if (log_ && !txn.undo().empty()) {
    if (txn.hot_header_logged) log_->append_header(txn.id(), encode_trx_no(txn.commit_seq));
    log_->append_commit(txn.id(), txn.commit_seq);
  }
}

void Engine::commit_member(Transaction& txn) {
  storage_.commit_versions(txn.undo(), txn.commit_seq);
  visible_.store(txn.commit_seq, std::memory_order_release);
  hot_.hot_commit_release(txn);
  release_locks(txn);
  HotOrder order = txn.dep_entry.load() ? txn.hot_order.load() : kNoHotOrder;
  hot_.on_commit(txn);
  txn.transition(TxnState::kCommitted);
  HistoryEvent ev;
  ev.kind = EventKind::kCommit;
  ev.commit_seq = txn.commit_seq;
  ev.hot_order = order;
  record(txn, std::move(ev));
  finish(txn);
  committed_.fetch_add(1, std::memory_order_relaxed);
}

void Engine::rollback(const TxnPtr& txn, AbortCause cause) {
  TxnState st = txn->state();
  if (st == TxnState::kCommitted || st == TxnState::kAborted) return;
  hot_.begin_rollback(*txn);
  auto& undo = txn->undo();
  for (auto it = undo.rbegin(); it != undo.rend(); ++it) {
    try {
      storage_.undo_apply(*it);
    } catch (const OrderingViolation&) {
      undo_violations_.fetch_add(1, std::memory_order_relaxed);
    }
    if (log_) log_->append_clr(txn->id(), it->write_seq, it->row, it->before);
  }
  if (log_ && !undo.empty()) log_->append_rollback_done(txn->id());
  const bool hot = txn->dep_entry.load() != nullptr;
  hot_.finish_rollback(*txn, cause);
  if (!hot) {
    HistoryEvent ev;
    ev.kind = EventKind::kAbort;
    ev.cause = cause;
    record(*txn, std::move(ev));
  }
  txn->transition(TxnState::kAborted);
  release_locks(*txn);
  finish(*txn);
  aborted_.fetch_add(1, std::memory_order_relaxed);
  by_cause_[static_cast<std::size_t>(cause)].fetch_add(1, std::memory_order_relaxed);
}

void Engine::release_locks(Transaction& txn) {
  locks_.release_all(txn, [&](const RowId& row, bool passed) { hot_.after_release(txn, row, passed); });
}

void Engine::finish(Transaction& txn) {
  hot_.on_txn_end(txn);
  if (opts_.record_history) history_.append(std::move(txn.events));
  txn.events.clear();
}

void Engine::shutdown() { shutdown_.store(true, std::memory_order_release); }

void Engine::simulate_crash() {
  if (log_) log_->freeze();
}

std::optional<Value> Engine::committed_value(const RowId& row) const {
  auto r = storage_.read(Snapshot{kOpenTs - 1, kNoTxn}, row);
  if (!r) return std::nullopt;
  return r->value;
}

EngineStats Engine::stats() const {
  EngineStats s;
  s.locks = locks_.stats();
  s.hot = hot_.stats();
  s.commit = pipeline_->stats();
  s.begun = begun_.load();
  s.committed = committed_.load();
  s.aborted = aborted_.load();
  for (std::size_t i = 0; i < s.aborts_by_cause.size(); ++i) s.aborts_by_cause[i] = by_cause_[i].load();
  s.undo_order_violations = undo_violations_.load();
  s.chain_order_violations = storage_.chain_order_violations();
  s.active_list_scans = storage_.active_list_scans();
  return s;
}

}  // namespace hotlock
