#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <unordered_map>
#include <vector>

#include "hotlock/types.hpp"

namespace hotlock {

inline constexpr CommitSeq kOpenTs = std::numeric_limits<CommitSeq>::max();

struct Version {
  Value value;
  TxnId writer = kNoTxn;
  HotOrder writer_order = kNoHotOrder;
  std::atomic<CommitSeq> del_ts{kOpenTs};
  Version* prev = nullptr;
};

struct Snapshot {
  CommitSeq high_water = 0;
  TxnId own_txn = kNoTxn;
};

struct UndoRecord {
  RowId row;
  Version* version = nullptr;
  Value before;
  Value after;
  std::uint32_t write_seq = 0;
};

struct ReadResult {
  Value value;
  TxnId writer = kNoTxn;  // kNoTxn for the initial load
};

struct VersionInfo {
  Value value;
  TxnId writer;
  HotOrder writer_order;
  CommitSeq del_ts;
};

/// Multi-versioned rows. Writers must be serialized per row by the caller
/// (row lock or hot-row turn); readers never block and never look at the
/// set of live transactions.
class VersionStore {
 public:
  VersionStore();
  VersionStore(const VersionStore&) = delete;
  VersionStore& operator=(const VersionStore&) = delete;
  ~VersionStore();

  // Installs a committed version; creates the row if missing.
  void install(const RowId& row, Value value, CommitSeq commit_ts = 0);
  bool contains(const RowId& row) const;
  std::size_t row_count() const;

  std::optional<ReadResult> read(const Snapshot& snap, const RowId& row) const;
  std::optional<ReadResult> current_read(const RowId& row) const;

  // Throws NotFound if the row does not exist.
  UndoRecord apply_update(TxnId txn, HotOrder order, const RowId& row, Value new_value,
                          std::uint32_t write_seq);
  // Throws OrderingViolation unless rec.version is the chain head.
  void undo_apply(const UndoRecord& rec);
  void commit_versions(const std::vector<UndoRecord>& undo, CommitSeq commit_ts);

  std::vector<VersionInfo> chain(const RowId& row) const;

  std::uint64_t active_list_scans() const { return active_list_scans_.load(); }
  std::uint64_t chain_order_violations() const { return chain_order_violations_.load(); }

 private:
  struct RowChain {
    std::mutex write_mu;
    std::atomic<Version*> head{nullptr};
    std::vector<std::unique_ptr<Version>> arena;
  };
  struct Shard {
    mutable std::shared_mutex mu;
    std::unordered_map<RowId, std::unique_ptr<RowChain>> rows;
  };
  static constexpr std::size_t kShards = 64;

  RowChain* find(const RowId& row) const;
  Shard& shard_for(const RowId& row) const;

  mutable std::array<Shard, kShards> shards_;
  // Incremented by any scan of live transactions; reads never do one.
  std::atomic<std::uint64_t> active_list_scans_{0};
  std::atomic<std::uint64_t> chain_order_violations_{0};
};

}  // namespace hotlock
