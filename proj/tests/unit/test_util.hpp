#pragma once

#include <chrono>
#include <functional>
#include <memory>
#include <thread>

#include "hotlock/engine.hpp"

namespace hotlock::test {

inline bool eventually(const std::function<bool()>& pred,
                       std::chrono::milliseconds limit = std::chrono::milliseconds(5000)) {
  const auto deadline = std::chrono::steady_clock::now() + limit;
  while (!pred()) {
    if (std::chrono::steady_clock::now() >= deadline) return false;
    std::this_thread::sleep_for(std::chrono::microseconds(200));
  }
  return true;
}

inline EngineConfig group_config() {
  EngineConfig cfg;
  cfg.protocol = Protocol::kGroupLock;
  cfg.lock_wait_timeout = std::chrono::milliseconds(2000);
  return cfg;
}

// Scripted tests drive the sweeper by hand.
inline std::unique_ptr<Engine> quiet_engine(const EngineConfig& cfg) {
  EngineOptions opts;
  opts.start_sweeper = false;
  return std::make_unique<Engine>(cfg, opts);
}

inline RowId hot_key() { return row_at(1, 0); }
inline RowId cold_key(std::uint64_t i) { return row_at(1, 100 + i); }

inline std::int64_t committed_int(Engine& e, const RowId& row) {
  return e.committed_value(row)->as_int();
}

}  // namespace hotlock::test
