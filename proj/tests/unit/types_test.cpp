#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <thread>
#include <unordered_set>

#include "hotlock/transaction.hpp"
#include "hotlock/types.hpp"

using namespace hotlock;

TEST(RowId, LexicographicOrder) {
  EXPECT_LT((RowId{1, 9, 9}), (RowId{2, 0, 0}));
  EXPECT_LT((RowId{1, 1, 9}), (RowId{1, 2, 0}));
  EXPECT_LT((RowId{1, 1, 1}), (RowId{1, 1, 2}));
  EXPECT_EQ((RowId{3, 4, 5}), (RowId{3, 4, 5}));
  EXPECT_NE((RowId{3, 4, 5}), (RowId{3, 5, 4}));
  EXPECT_EQ((RowId{3, 4, 5}).to_string(), "<3,4,5>");
}

TEST(RowId, HashSpreadsNeighbours) {
  std::unordered_set<std::size_t> hashes;
  for (std::uint32_t s = 0; s < 4; ++s)
    for (std::uint32_t p = 0; p < 16; ++p)
      for (std::uint32_t h = 0; h < 16; ++h) hashes.insert(std::hash<RowId>{}(RowId{s, p, h}));
  EXPECT_EQ(hashes.size(), 4u * 16 * 16);
}

TEST(RowId, RowAtMapsIndexToPageAndSlot) {
  EXPECT_EQ(row_at(2, 0), (RowId{2, 0, 0}));
  EXPECT_EQ(row_at(2, kRowsPerPage + 3), (RowId{2, 1, 3}));
}

TEST(Value, IntAndBytes) {
  auto i = Value::of_int(-7);
  auto b = Value::of_bytes("abc");
  EXPECT_TRUE(i.is_int());
  EXPECT_EQ(i.as_int(), -7);
  EXPECT_FALSE(b.is_int());
  EXPECT_EQ(b.bytes(), "abc");
  EXPECT_THROW(b.as_int(), Error);
  EXPECT_NE(i, b);
}

TEST(Protocol, ParseRoundTrip) {
  for (auto p : {Protocol::kTwoPL, Protocol::kQueueLock, Protocol::kGroupLock})
    EXPECT_EQ(parse_protocol(to_string(p)), p);
  EXPECT_THROW(parse_protocol("occ"), ConfigError);
}

TEST(Status, AbortCauseBuckets) {
  EXPECT_EQ(cause_of(Status::kTimedOut), AbortCause::kTimeout);
  EXPECT_EQ(cause_of(Status::kCascadeAbort), AbortCause::kCascade);
  EXPECT_EQ(cause_of(Status::kRuleAbort), AbortCause::kRuleAbort);
  EXPECT_EQ(cause_of(Status::kDeadlockVictim), AbortCause::kRuleAbort);
  EXPECT_FALSE(must_abort(Status::kOk));
  EXPECT_FALSE(must_abort(Status::kNotFound));
  EXPECT_TRUE(must_abort(Status::kMultipleHotRows));
}

TEST(EngineConfig, Validation) {
  EngineConfig ok;
  EXPECT_NO_THROW(ok.validate());
  EXPECT_EQ(ok.hot_threshold, 32u);
  EXPECT_EQ(ok.group_batch_size, 10u);
  EXPECT_EQ(ok.spin_delay, std::chrono::microseconds(10));
  EXPECT_TRUE(ok.dynamic_batch);

  auto bad = ok;
  bad.hot_threshold = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = ok;
  bad.group_batch_size = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = ok;
  bad.lock_wait_timeout = bad.spin_delay;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = ok;
  bad.sweep_interval = std::chrono::microseconds(0);
  EXPECT_THROW(bad.validate(), ConfigError);
}

namespace {

std::shared_ptr<Transaction> make_txn(TxnId id) {
  return std::make_shared<Transaction>(id, Protocol::kTwoPL, Snapshot{0, id}, EngineConfig{});
}

}  // namespace

TEST(Transaction, LegalTransitions) {
  auto a = make_txn(1);
  EXPECT_EQ(a->state(), TxnState::kActive);
  a->transition(TxnState::kPreparing);
  a->transition(TxnState::kCommitted);
  EXPECT_EQ(a->state(), TxnState::kCommitted);

  auto b = make_txn(2);
  b->transition(TxnState::kAborted);
  auto c = make_txn(3);
  c->transition(TxnState::kPreparing);
  c->transition(TxnState::kAborted);
  EXPECT_EQ(c->state(), TxnState::kAborted);
}

TEST(Transaction, IllegalTransitionsThrow) {
  const TxnState all[] = {TxnState::kActive, TxnState::kPreparing, TxnState::kCommitted,
                          TxnState::kAborted};
  const std::set<std::pair<TxnState, TxnState>> legal = {
      {TxnState::kActive, TxnState::kPreparing},
      {TxnState::kActive, TxnState::kAborted},
      {TxnState::kPreparing, TxnState::kCommitted},
      {TxnState::kPreparing, TxnState::kAborted}};
  auto drive_to = [](Transaction& t, TxnState s) {
    if (s == TxnState::kPreparing || s == TxnState::kCommitted) t.transition(TxnState::kPreparing);
    if (s == TxnState::kCommitted) t.transition(TxnState::kCommitted);
    if (s == TxnState::kAborted) t.transition(TxnState::kAborted);
  };
  TxnId id = 1;
  for (auto from : all)
    for (auto to : all) {
      auto t = make_txn(id++);
      drive_to(*t, from);
      if (legal.count({from, to}))
        EXPECT_NO_THROW(t->transition(to));
      else
        EXPECT_THROW(t->transition(to), InvariantViolation)
            << to_string(from) << " -> " << to_string(to);
    }
}

TEST(Transaction, FirstAbortRequestWins) {
  auto t = make_txn(1);
  EXPECT_FALSE(t->abort_requested());
  EXPECT_TRUE(t->request_abort(AbortCause::kCascade));
  EXPECT_FALSE(t->request_abort(AbortCause::kTimeout));
  EXPECT_EQ(t->abort_cause(), AbortCause::kCascade);
}

TEST(GlobalCounters, UniqueUnderConcurrency) {
  GlobalCounters c;
  constexpr int kThreads = 8, kPer = 5000;
  std::vector<std::vector<std::uint64_t>> ids(kThreads), orders(kThreads), seqs(kThreads);
  std::vector<std::thread> ts;
  for (int i = 0; i < kThreads; ++i)
    ts.emplace_back([&, i] {
      for (int k = 0; k < kPer; ++k) {
        ids[i].push_back(c.take_txn_id());
        orders[i].push_back(c.take_hot_order());
        seqs[i].push_back(c.take_commit_seq());
      }
    });
  for (auto& t : ts) t.join();
  for (auto* stream : {&ids, &orders, &seqs}) {
    std::set<std::uint64_t> all;
    for (auto& v : *stream) {
      EXPECT_TRUE(std::is_sorted(v.begin(), v.end()));
      all.insert(v.begin(), v.end());
    }
    EXPECT_EQ(all.size(), static_cast<std::size_t>(kThreads * kPer));
    EXPECT_EQ(*all.begin(), 1u);
  }
}
