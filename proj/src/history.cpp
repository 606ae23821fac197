#include "hotlock/history.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <unordered_map>

#include <json.hpp>

namespace hotlock {

using nlohmann::json;

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::kRead: return "read";
    case EventKind::kWrite: return "write";
    case EventKind::kSfu: return "sfu";
    case EventKind::kCommit: return "commit";
    case EventKind::kAbort: return "abort";
  }
  return "?";
}

void History::append(std::vector<HistoryEvent>&& events) {
  std::lock_guard lk(mu_);
  events_.insert(events_.end(), std::make_move_iterator(events.begin()),
                 std::make_move_iterator(events.end()));
}

std::vector<HistoryEvent> History::events() const {
  std::vector<HistoryEvent> out;
  {
    std::lock_guard lk(mu_);
    out = events_;
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
  return out;
}

std::size_t History::size() const {
  std::lock_guard lk(mu_);
  return events_.size();
}

void History::clear() {
  std::lock_guard lk(mu_);
  events_.clear();
}

namespace {

bool is_read(EventKind k) { return k == EventKind::kRead || k == EventKind::kSfu; }
bool is_terminal(EventKind k) { return k == EventKind::kCommit || k == EventKind::kAbort; }

struct TxnSummary {
  bool committed = false;
  bool terminated = false;
  std::uint64_t terminal_seq = 0;
  CommitSeq commit_seq = 0;
};

std::vector<HistoryEvent> sorted_copy(const std::vector<HistoryEvent>& events) {
  std::vector<HistoryEvent> ev = events;
  std::stable_sort(ev.begin(), ev.end(), [](const auto& a, const auto& b) { return a.seq < b.seq; });
  for (std::size_t i = 1; i < ev.size(); ++i)
    if (ev[i].seq == ev[i - 1].seq)
      throw HistoryError("duplicate event seq " + std::to_string(ev[i].seq));
  return ev;
}

std::unordered_map<TxnId, TxnSummary> summarize(const std::vector<HistoryEvent>& ev) {
  std::unordered_map<TxnId, TxnSummary> txns;
  for (const auto& e : ev) {
    if (e.txn == kNoTxn) throw HistoryError("event " + std::to_string(e.seq) + " has no txn");
    TxnSummary& t = txns[e.txn];
    if (t.terminated)
      throw HistoryError("txn " + std::to_string(e.txn) + " has events after its end");
    if (is_terminal(e.kind)) {
      t.terminated = true;
      t.terminal_seq = e.seq;
      t.committed = e.kind == EventKind::kCommit;
      t.commit_seq = e.commit_seq;
    }
  }
  for (const auto& [id, t] : txns)
    if (!t.terminated) throw HistoryError("txn " + std::to_string(id) + " never ended");
  return txns;
}

}  // namespace

SerializabilityResult check_serializable(const std::vector<HistoryEvent>& events) {
  SerializabilityResult res;
  const auto ev = sorted_copy(events);
  const auto txns = summarize(ev);

  // Committed writes per row in install order.
  std::map<RowId, std::vector<std::pair<TxnId, std::uint64_t>>> writes;
  for (const auto& e : ev) {
    if (!txns.at(e.txn).committed) continue;
    if (e.kind == EventKind::kWrite) writes[e.row].emplace_back(e.txn, e.seq);
    if ((is_read(e.kind) || e.kind == EventKind::kWrite) && e.observed_writer != kNoTxn &&
        e.observed_writer != e.txn) {
      auto w = txns.find(e.observed_writer);
      if (w != txns.end() && !w->second.committed)
        throw HistoryError("committed txn " + std::to_string(e.txn) + " observed aborted txn " +
                           std::to_string(e.observed_writer));
    }
  }

  std::map<TxnId, std::set<TxnId>> adj;
  for (const auto& [id, t] : txns)
    if (t.committed) adj[id];
  res.committed = adj.size();
  auto add_edge = [&](TxnId a, TxnId b) {
    if (a != b && adj[a].insert(b).second) ++res.edges;
  };

  for (const auto& [row, ws] : writes)
    for (std::size_t i = 1; i < ws.size(); ++i) add_edge(ws[i - 1].first, ws[i].first);

  for (const auto& e : ev) {
    if (!is_read(e.kind) && e.kind != EventKind::kWrite) continue;
    if (!txns.at(e.txn).committed) continue;
    if (e.observed_writer == e.txn) continue;
    const bool known = e.observed_writer != kNoTxn && txns.count(e.observed_writer);
    if (known) add_edge(e.observed_writer, e.txn);
    if (!is_read(e.kind)) continue;
    // Next committed writer after the observed version.
    auto it = writes.find(e.row);
    if (it == writes.end()) continue;
    const auto& ws = it->second;
    std::size_t next = 0;
    if (known) {
      std::size_t pos = ws.size();
      for (std::size_t i = 0; i < ws.size(); ++i)
        if (ws[i].first == e.observed_writer && ws[i].second < e.seq) pos = i;
      if (pos == ws.size()) continue;
      next = pos + 1;
      while (next < ws.size() && ws[next].first == e.observed_writer) ++next;
    }
    if (next < ws.size()) add_edge(e.txn, ws[next].first);
  }

  // Iterative DFS with colors; a back edge closes a cycle.
  std::map<TxnId, int> color;
  std::map<TxnId, TxnId> parent;
  for (const auto& [root, _] : adj) {
    if (color[root] != 0) continue;
    std::vector<std::pair<TxnId, std::set<TxnId>::const_iterator>> stack;
    color[root] = 1;
    stack.emplace_back(root, adj[root].cbegin());
    while (!stack.empty()) {
      auto& [node, it] = stack.back();
      if (it == adj[node].cend()) {
        color[node] = 2;
        stack.pop_back();
        continue;
      }
      TxnId next = *it++;
      if (color[next] == 1) {
        res.acyclic = false;
        std::vector<TxnId> cyc{next};
        for (TxnId cur = node; cur != next; cur = parent[cur]) cyc.push_back(cur);
        std::reverse(cyc.begin() + 1, cyc.end());
        cyc.push_back(next);
        res.cycle = std::move(cyc);
        return res;
      }
      if (color[next] == 0) {
        color[next] = 1;
        parent[next] = node;
        stack.emplace_back(next, adj[next].cbegin());
      }
    }
  }
  return res;
}

CounterOracleResult check_counter_oracle(const std::vector<HistoryEvent>& events, const RowId& row,
                                         std::int64_t initial, std::int64_t final_value) {
  std::set<TxnId> committed;
  for (const auto& e : events)
    if (e.kind == EventKind::kCommit) committed.insert(e.txn);
  CounterOracleResult r;
  r.expected = initial;
  for (const auto& e : events)
    if (e.kind == EventKind::kWrite && e.row == row && committed.count(e.txn))
      r.expected += e.value.as_int() - e.prior.as_int();
  r.actual = final_value;
  r.pass = r.expected == r.actual;
  return r;
}

namespace {

struct HotJoin {
  TxnId txn;
  HotOrder order;
  std::uint64_t first_seq;
};

// Per hot row: every txn that carried a hot order there, with the seq of
// its first event on the row.
std::map<RowId, std::vector<HotJoin>> hot_joins(const std::vector<HistoryEvent>& ev) {
  std::map<RowId, std::map<TxnId, HotJoin>> tmp;
  for (const auto& e : ev) {
    if (e.hot_order == kNoHotOrder || is_terminal(e.kind)) continue;
    auto& m = tmp[e.row];
    auto it = m.find(e.txn);
    if (it == m.end()) {
      m.emplace(e.txn, HotJoin{e.txn, e.hot_order, e.seq});
    } else if (it->second.order != e.hot_order) {
      throw HistoryError("txn " + std::to_string(e.txn) + " has two hot orders on " +
                         e.row.to_string());
    }
  }
  std::map<RowId, std::vector<HotJoin>> out;
  for (auto& [row, m] : tmp) {
    auto& v = out[row];
    for (auto& [id, j] : m) v.push_back(j);
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.order < b.order; });
  }
  return out;
}

}  // namespace

OrderCheckResult check_commit_order(const std::vector<HistoryEvent>& events) {
  OrderCheckResult r;
  const auto ev = sorted_copy(events);
  const auto txns = summarize(ev);
  for (const auto& [row, joins] : hot_joins(ev)) {
    const HotJoin* prev = nullptr;
    for (const auto& j : joins) {
      const TxnSummary& t = txns.at(j.txn);
      if (!t.committed) continue;
      if (prev) {
        ++r.checked;
        if (txns.at(prev->txn).commit_seq >= t.commit_seq) {
          if (r.violations++ == 0)
            r.first_violation = row.to_string() + ": txn " + std::to_string(prev->txn) +
                                " (order " + std::to_string(prev->order) + ") committed after txn " +
                                std::to_string(j.txn) + " (order " + std::to_string(j.order) + ")";
        }
      }
      prev = &j;
    }
  }
  return r;
}

OrderCheckResult check_rollback_order(const std::vector<HistoryEvent>& events) {
  OrderCheckResult r;
  const auto ev = sorted_copy(events);
  const auto txns = summarize(ev);
  for (const auto& [row, joins] : hot_joins(ev)) {
    for (std::size_t i = 0; i < joins.size(); ++i) {
      const TxnSummary& a = txns.at(joins[i].txn);
      if (a.committed) continue;
      for (std::size_t k = i + 1; k < joins.size(); ++k) {
        if (joins[k].first_seq > a.terminal_seq) continue;
        ++r.checked;
        const TxnSummary& b = txns.at(joins[k].txn);
        if (b.committed || b.terminal_seq > a.terminal_seq) {
          if (r.violations++ == 0)
            r.first_violation = row.to_string() + ": txn " + std::to_string(joins[k].txn) +
                                " joined after aborting txn " + std::to_string(joins[i].txn) +
                                (b.committed ? " and committed" : " but finished its abort later");
        }
      }
    }
  }
  return r;
}

namespace {

json value_json(const Value& v) {
  if (v.is_int()) return v.as_int();
  return json{{"b", v.bytes()}};
}

Value value_from(const json& j) {
  if (j.is_number_integer()) return Value::of_int(j.get<std::int64_t>());
  if (j.is_object() && j.contains("b")) return Value::of_bytes(j.at("b").get<std::string>());
  throw HistoryError("bad value " + j.dump());
}

EventKind kind_from(const std::string& s) {
  for (auto k : {EventKind::kRead, EventKind::kWrite, EventKind::kSfu, EventKind::kCommit,
                 EventKind::kAbort})
    if (to_string(k) == s) return k;
  throw HistoryError("unknown event kind " + s);
}

AbortCause cause_from(const std::string& s) {
  for (auto c : {AbortCause::kTimeout, AbortCause::kRuleAbort, AbortCause::kCascade,
                 AbortCause::kInjected})
    if (to_string(c) == s) return c;
  throw HistoryError("unknown abort cause " + s);
}

}  // namespace

void dump_history(std::ostream& out, const std::vector<HistoryEvent>& events) {
  for (const auto& e : events) {
    json j{{"seq", e.seq}, {"txn", e.txn}, {"kind", to_string(e.kind)}};
    if (!is_terminal(e.kind)) {
      j["row"] = {e.row.space_id, e.row.page_no, e.row.heap_no};
      j["value"] = value_json(e.value);
      if (e.kind == EventKind::kWrite) j["prior"] = value_json(e.prior);
      j["writer"] = e.observed_writer;
    }
    if (e.hot_order != kNoHotOrder) j["hot_order"] = e.hot_order;
    if (e.kind == EventKind::kCommit) j["commit_seq"] = e.commit_seq;
    if (e.kind == EventKind::kAbort) j["cause"] = to_string(e.cause);
    out << j.dump() << '\n';
  }
}

std::vector<HistoryEvent> load_history(std::istream& in) {
  std::vector<HistoryEvent> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      HistoryEvent e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.txn = j.at("txn").get<TxnId>();
      e.kind = kind_from(j.at("kind").get<std::string>());
      if (j.contains("row")) {
        const auto& r = j.at("row");
        e.row = RowId{r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint32_t>(),
                      r.at(2).get<std::uint32_t>()};
      }
      if (j.contains("value")) e.value = value_from(j.at("value"));
      if (j.contains("prior")) e.prior = value_from(j.at("prior"));
      e.observed_writer = j.value("writer", kNoTxn);
      e.hot_order = j.value("hot_order", kNoHotOrder);
      e.commit_seq = j.value("commit_seq", CommitSeq{0});
      if (j.contains("cause")) e.cause = cause_from(j.at("cause").get<std::string>());
      out.push_back(std::move(e));
    } catch (const json::exception& ex) {
      throw HistoryError("line " + std::to_string(lineno) + ": " + ex.what());
    }
  }
  return out;
}

}  // namespace hotlock
