#include "hotlock/version_store.hpp"

namespace hotlock {

VersionStore::VersionStore() = default;
VersionStore::~VersionStore() = default;

VersionStore::Shard& VersionStore::shard_for(const RowId& row) const {
  return shards_[RowIdHash{}(row) % kShards];
}

VersionStore::RowChain* VersionStore::find(const RowId& row) const {
  Shard& s = shard_for(row);
  std::shared_lock lk(s.mu);
  auto it = s.rows.find(row);
  return it == s.rows.end() ? nullptr : it->second.get();
}

void VersionStore::install(const RowId& row, Value value, CommitSeq commit_ts) {
  Shard& s = shard_for(row);
  RowChain* chain = nullptr;
  {
    std::unique_lock lk(s.mu);
    auto& slot = s.rows[row];
    if (!slot) slot = std::make_unique<RowChain>();
    chain = slot.get();
  }
  std::lock_guard lk(chain->write_mu);
  auto v = std::make_unique<Version>();
  v->value = std::move(value);
  v->del_ts.store(commit_ts, std::memory_order_relaxed);
  v->prev = chain->head.load(std::memory_order_relaxed);
  chain->head.store(v.get(), std::memory_order_release);
  chain->arena.push_back(std::move(v));
}

bool VersionStore::contains(const RowId& row) const { return find(row) != nullptr; }

std::size_t VersionStore::row_count() const {
  std::size_t n = 0;
  for (auto& s : shards_) {
    std::shared_lock lk(s.mu);
    n += s.rows.size();
  }
  return n;
}

std::optional<ReadResult> VersionStore::read(const Snapshot& snap, const RowId& row) const {
  const RowChain* chain = find(row);
  if (!chain) return std::nullopt;
  for (const Version* v = chain->head.load(std::memory_order_acquire); v; v = v->prev) {
    if (snap.own_txn != kNoTxn && v->writer == snap.own_txn) return ReadResult{v->value, v->writer};
    if (v->del_ts.load(std::memory_order_acquire) <= snap.high_water)
      return ReadResult{v->value, v->writer};
  }
  return std::nullopt;
}

std::optional<ReadResult> VersionStore::current_read(const RowId& row) const {
  const RowChain* chain = find(row);
  if (!chain) return std::nullopt;
  const Version* v = chain->head.load(std::memory_order_acquire);
  if (!v) return std::nullopt;
  return ReadResult{v->value, v->writer};
}

UndoRecord VersionStore::apply_update(TxnId txn, HotOrder order, const RowId& row,
                                      Value new_value, std::uint32_t write_seq) {
  RowChain* chain = find(row);
  if (!chain) throw NotFound("row " + row.to_string());
  std::lock_guard lk(chain->write_mu);
  Version* head = chain->head.load(std::memory_order_relaxed);
  if (head && head->writer != txn && head->del_ts.load(std::memory_order_acquire) == kOpenTs) {
    // Stacked uncommitted versions are legal only on hot rows, in order.
    if (order == kNoHotOrder || head->writer_order == kNoHotOrder || head->writer_order >= order)
      chain_order_violations_.fetch_add(1);
  }
  auto v = std::make_unique<Version>();
  v->value = new_value;
  v->writer = txn;
  v->writer_order = order;
  v->prev = head;
  UndoRecord rec{row, v.get(), head ? head->value : Value{}, std::move(new_value), write_seq};
  chain->head.store(v.get(), std::memory_order_release);
  chain->arena.push_back(std::move(v));
  return rec;
}

void VersionStore::undo_apply(const UndoRecord& rec) {
  RowChain* chain = find(rec.row);
  if (!chain) throw NotFound("row " + rec.row.to_string());
  std::lock_guard lk(chain->write_mu);
  Version* head = chain->head.load(std::memory_order_relaxed);
  if (head != rec.version)
    throw OrderingViolation("undo of " + rec.row.to_string() + " is not at chain head");
  chain->head.store(head->prev, std::memory_order_release);
}

void VersionStore::commit_versions(const std::vector<UndoRecord>& undo, CommitSeq commit_ts) {
  for (const auto& rec : undo) rec.version->del_ts.store(commit_ts, std::memory_order_release);
}

std::vector<VersionInfo> VersionStore::chain(const RowId& row) const {
  std::vector<VersionInfo> out;
  const RowChain* chain = find(row);
  if (!chain) return out;
  for (const Version* v = chain->head.load(std::memory_order_acquire); v; v = v->prev)
    out.push_back({v->value, v->writer, v->writer_order, v->del_ts.load()});
  return out;
}

}  // namespace hotlock
