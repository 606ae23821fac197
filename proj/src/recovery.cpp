#include "hotlock/recovery.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <unordered_map>

#include "hotlock/undo_log.hpp"

namespace hotlock {

namespace {

struct TxnLog {
  std::vector<const LogRecord*> undo;  // log order
  std::set<std::uint32_t> compensated;
  HotOrder hot_order = kNoHotOrder;
  bool committed = false;
  bool rolled_back = false;
};

}  // namespace

RecoveryResult recover(const std::string& log_path, const RecoveryOptions& opts) {
  RecoveryResult res;
  LogReadResult log = read_log(log_path);
  res.records = log.records.size();
  res.truncated_bytes = log.file_bytes - log.valid_bytes;
  if (opts.truncate_tail && res.truncated_bytes > 0) {
    if (::truncate(log_path.c_str(), static_cast<off_t>(log.valid_bytes)) != 0)
      throw LogError("cannot truncate " + log_path + ": " + std::strerror(errno));
  }

  std::unordered_map<TxnId, TxnLog> txns;
  std::vector<TxnId> seen;
  auto txn_of = [&](TxnId id) -> TxnLog& {
    auto [it, fresh] = txns.try_emplace(id);
    if (fresh) seen.push_back(id);
    res.max_txn = std::max(res.max_txn, id);
    return it->second;
  };

  for (const LogRecord& r : log.records) {
    switch (r.type) {
      case LogType::kLoad:
        res.table[r.row] = r.after;
        res.row_ts.emplace(r.row, 0);
        break;
      case LogType::kHeader: {
        TxnLog& t = txn_of(r.txn);
        HeaderField h = decode_header(r.field);
        if (h.hot) {
          t.hot_order = h.value;
          res.max_hot_order = std::max(res.max_hot_order, h.value);
        }
        break;
      }
      case LogType::kUndo:
        txn_of(r.txn).undo.push_back(&r);
        res.table[r.row] = r.after;
        break;
      case LogType::kClr:
        txn_of(r.txn).compensated.insert(r.write_seq);
        res.table[r.row] = r.after;
        break;
      case LogType::kCommit: {
        TxnLog& t = txn_of(r.txn);
        t.committed = true;
        res.committed[r.txn] = r.field;
        res.max_commit_seq = std::max(res.max_commit_seq, r.field);
        for (const LogRecord* u : t.undo) res.row_ts[u->row] = r.field;
        break;
      }
      case LogType::kRollbackDone:
        txn_of(r.txn).rolled_back = true;
        res.already_rolled_back.insert(r.txn);
        break;
    }
  }

  std::vector<TxnId> hot, plain;
  for (TxnId id : seen) {
    const TxnLog& t = txns[id];
    if (t.committed || t.rolled_back) continue;
    (t.hot_order != kNoHotOrder ? hot : plain).push_back(id);
  }
  std::sort(hot.begin(), hot.end(),
            [&](TxnId a, TxnId b) { return txns[a].hot_order > txns[b].hot_order; });
  std::sort(plain.begin(), plain.end(), std::greater<>());

  UndoLog out(log_path, false, true);
  auto crash_now = [&] {
    return opts.crash_after_clrs && res.clrs_written >= *opts.crash_after_clrs;
  };
  for (const auto* group : {&hot, &plain}) {
    for (TxnId id : *group) {
      TxnLog& t = txns[id];
      for (auto it = t.undo.rbegin(); it != t.undo.rend(); ++it) {
        const LogRecord& u = **it;
        if (t.compensated.count(u.write_seq)) continue;
        if (crash_now()) {
          res.crashed = true;
          out.flush();
          return res;
        }
        res.table[u.row] = u.before;
        out.append_clr(id, u.write_seq, u.row, u.before);
        ++res.clrs_written;
      }
      out.append_rollback_done(id);
      out.flush();
      out.sync();
      res.rolled_back.emplace_back(id, t.hot_order);
    }
  }
  return res;
}

}  // namespace hotlock
