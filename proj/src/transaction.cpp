#include "hotlock/transaction.hpp"

#include <string>

namespace hotlock {

Transaction::Transaction(TxnId id, Protocol protocol, Snapshot snap, const EngineConfig& cfg)
    : id_(id), protocol_(protocol), snap_(snap), cfg_(cfg), started_at_(Clock::now()) {}

void Transaction::transition(TxnState to) {
  TxnState from = state_.load(std::memory_order_acquire);
  bool ok = (from == TxnState::kActive && (to == TxnState::kPreparing || to == TxnState::kAborted)) ||
            (from == TxnState::kPreparing && (to == TxnState::kCommitted || to == TxnState::kAborted));
  if (!ok) {
    throw InvariantViolation("txn " + std::to_string(id_) + ": illegal transition " +
                             std::string(to_string(from)) + " -> " + std::string(to_string(to)));
  }
  state_.store(to, std::memory_order_release);
}

bool Transaction::request_abort(AbortCause cause) {
  std::uint8_t expected = 0;
  auto word = static_cast<std::uint8_t>(static_cast<std::uint8_t>(cause) + 1);
  if (!abort_word_.compare_exchange_strong(expected, word, std::memory_order_acq_rel)) return false;
  event.set();
  return true;
}

void Transaction::push_undo(UndoRecord rec) {
  undo_.push_back(std::move(rec));
  undo_count_.store(undo_.size(), std::memory_order_relaxed);
}

std::optional<RowId> Transaction::waiting_row() const {
  std::lock_guard lk(wait_mu_);
  return waiting_row_;
}

void Transaction::set_waiting_row(std::optional<RowId> row) {
  std::lock_guard lk(wait_mu_);
  waiting_row_ = row;
}

}  // namespace hotlock
