#include <gtest/gtest.h>

#include "hotlock/version_store.hpp"

using namespace hotlock;

namespace {

const RowId kRow{1, 0, 1};

Snapshot snap(CommitSeq hw, TxnId own = kNoTxn) { return Snapshot{hw, own}; }

}  // namespace

TEST(VersionStore, SnapshotSeesVersionCommittedAtOrBelowHighWater) {
  VersionStore s;
  s.install(kRow, Value::of_int(1), 0);
  auto rec = s.apply_update(7, kNoHotOrder, kRow, Value::of_int(5), 1);
  s.commit_versions({rec}, 5);
  EXPECT_EQ(s.read(snap(10), kRow)->value.as_int(), 5);
  EXPECT_EQ(s.read(snap(5), kRow)->value.as_int(), 5);
  EXPECT_EQ(s.read(snap(4), kRow)->value.as_int(), 1);
}

TEST(VersionStore, ReadYourWrites) {
  VersionStore s;
  s.install(kRow, Value::of_int(1));
  s.apply_update(3, kNoHotOrder, kRow, Value::of_int(9), 1);
  EXPECT_EQ(s.read(snap(0, 3), kRow)->value.as_int(), 9);
  EXPECT_EQ(s.read(snap(0, 3), kRow)->writer, 3u);
}

TEST(VersionStore, OpenVersionOfOtherTxnIsSkipped) {
  VersionStore s;
  s.install(kRow, Value::of_int(1));
  s.apply_update(3, kNoHotOrder, kRow, Value::of_int(9), 1);
  auto r = s.read(snap(100, 4), kRow);
  EXPECT_EQ(r->value.as_int(), 1);
  EXPECT_EQ(r->writer, kNoTxn);
}

TEST(VersionStore, MissingRow) {
  VersionStore s;
  EXPECT_FALSE(s.read(snap(1), kRow).has_value());
  EXPECT_FALSE(s.current_read(kRow).has_value());
  EXPECT_THROW(s.apply_update(1, kNoHotOrder, kRow, Value::of_int(1), 1), NotFound);
}

TEST(VersionStore, CurrentReadSeesUncommittedPredecessor) {
  VersionStore s;
  s.install(kRow, Value::of_int(1));
  EXPECT_EQ(s.current_read(kRow)->value.as_int(), 1);
  s.apply_update(1, 1, kRow, Value::of_int(2), 1);
  EXPECT_EQ(s.current_read(kRow)->value.as_int(), 2);
  s.apply_update(3, 2, kRow, Value::of_int(3), 1);
  s.apply_update(2, 3, kRow, Value::of_int(4), 1);
  EXPECT_EQ(s.current_read(kRow)->value.as_int(), 4);
  EXPECT_EQ(s.chain_order_violations(), 0u);
}

TEST(VersionStore, UndoStoresPriorImage) {
  VersionStore s;
  s.install(kRow, Value::of_int(1));
  auto rec = s.apply_update(1, kNoHotOrder, kRow, Value::of_int(2), 1);
  EXPECT_EQ(rec.before.as_int(), 1);
  EXPECT_EQ(rec.after.as_int(), 2);
  s.undo_apply(rec);
  EXPECT_EQ(s.current_read(kRow)->value.as_int(), 1);
}

TEST(VersionStore, OwnOverwriteKeepsTwoUndoRecords) {
  VersionStore s;
  s.install(kRow, Value::of_int(1));
  auto a = s.apply_update(1, kNoHotOrder, kRow, Value::of_int(2), 1);
  auto b = s.apply_update(1, kNoHotOrder, kRow, Value::of_int(3), 2);
  EXPECT_EQ(b.before.as_int(), 2);
  EXPECT_EQ(s.read(snap(0, 1), kRow)->value.as_int(), 3);
  s.undo_apply(b);
  s.undo_apply(a);
  EXPECT_EQ(s.current_read(kRow)->value.as_int(), 1);
  EXPECT_EQ(s.chain_order_violations(), 0u);
}

TEST(VersionStore, HundredIncrements) {
  VersionStore s;
  s.install(kRow, Value::of_int(40));
  for (std::uint32_t i = 1; i <= 100; ++i) {
    auto cur = s.current_read(kRow)->value.as_int();
    s.apply_update(1, kNoHotOrder, kRow, Value::of_int(cur + 1), i);
  }
  EXPECT_EQ(s.current_read(kRow)->value.as_int(), 140);
}

TEST(VersionStore, CascadeUndoInReverseRestoresOriginal) {
  VersionStore s;
  s.install(kRow, Value::of_int(1));
  auto r2 = s.apply_update(1, 1, kRow, Value::of_int(2), 1);
  auto r3 = s.apply_update(3, 2, kRow, Value::of_int(3), 1);
  auto r4 = s.apply_update(2, 3, kRow, Value::of_int(4), 1);
  s.undo_apply(r4);
  s.undo_apply(r3);
  s.undo_apply(r2);
  EXPECT_EQ(s.current_read(kRow)->value.as_int(), 1);
}

TEST(VersionStore, UndoOutOfOrderIsRejected) {
  VersionStore s;
  s.install(kRow, Value::of_int(1));
  auto r2 = s.apply_update(1, 1, kRow, Value::of_int(2), 1);
  s.apply_update(3, 2, kRow, Value::of_int(3), 1);
  EXPECT_THROW(s.undo_apply(r2), OrderingViolation);
  EXPECT_EQ(s.current_read(kRow)->value.as_int(), 3);
}

TEST(VersionStore, CommitStampsEveryOpenVersionOfTxn) {
  VersionStore s;
  s.install(kRow, Value::of_int(1));
  s.commit_versions({}, 3);  // read-only: no-op
  std::vector<UndoRecord> undo;
  undo.push_back(s.apply_update(1, kNoHotOrder, kRow, Value::of_int(2), 1));
  undo.push_back(s.apply_update(1, kNoHotOrder, kRow, Value::of_int(3), 2));
  s.commit_versions(undo, 7);
  auto chain = s.chain(kRow);
  ASSERT_EQ(chain.size(), 3u);
  EXPECT_EQ(chain[0].del_ts, 7u);
  EXPECT_EQ(chain[1].del_ts, 7u);
  EXPECT_EQ(s.read(snap(6), kRow)->value.as_int(), 1);
  EXPECT_EQ(s.read(snap(7), kRow)->value.as_int(), 3);
}

TEST(VersionStore, GroupCommitStampsIncreaseAlongChain) {
  VersionStore s;
  s.install(kRow, Value::of_int(0));
  std::vector<UndoRecord> recs;
  for (TxnId t = 1; t <= 10; ++t)
    recs.push_back(s.apply_update(t, t, kRow, Value::of_int(static_cast<std::int64_t>(t)), 1));
  for (TxnId t = 1; t <= 10; ++t) s.commit_versions({recs[t - 1]}, 100 + t);
  auto chain = s.chain(kRow);  // newest first
  for (std::size_t i = 0; i + 2 < chain.size(); ++i) EXPECT_GT(chain[i].del_ts, chain[i + 1].del_ts);
  EXPECT_EQ(s.chain_order_violations(), 0u);
}

TEST(VersionStore, StackingWithoutHotOrderIsCountedAsViolation) {
  VersionStore s;
  s.install(kRow, Value::of_int(0));
  s.apply_update(1, 5, kRow, Value::of_int(1), 1);
  s.apply_update(2, 4, kRow, Value::of_int(2), 1);
  EXPECT_EQ(s.chain_order_violations(), 1u);
}

TEST(VersionStore, ReadsNeverScanLiveTransactions) {
  VersionStore s;
  s.install(kRow, Value::of_int(0));
  for (int i = 0; i < 1000; ++i) s.read(snap(static_cast<CommitSeq>(i)), kRow);
  EXPECT_EQ(s.active_list_scans(), 0u);
}
