#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "hotlock/types.hpp"
#include "hotlock/version_store.hpp"

namespace hotlock {

inline constexpr std::uint64_t kHotHeaderBit = std::uint64_t{1} << 63;

// Undo segment header field. MSB set: low 63 bits are a hot update order;
// MSB clear: the value is the commit sequence number.
struct HeaderField {
  bool hot = false;
  std::uint64_t value = 0;
};

// Throws std::invalid_argument if value needs the top bit.
std::uint64_t encode_hot_order(HotOrder order);
std::uint64_t encode_trx_no(CommitSeq seq);
HeaderField decode_header(std::uint64_t field);

enum class LogType : std::uint8_t {
  kLoad = 1,
  kHeader = 2,
  kUndo = 3,
  kCommit = 4,
  kClr = 5,
  kRollbackDone = 6,
};

struct LogRecord {
  LogType type = LogType::kLoad;
  TxnId txn = kNoTxn;
  std::uint32_t write_seq = 0;
  RowId row{};
  Value before;        // kUndo
  Value after;         // kLoad, kUndo, kClr (restored image)
  std::uint64_t field = 0;  // kHeader (encoded), kCommit (commit seq)
};

struct LogReadResult {
  std::vector<LogRecord> records;
  std::uint64_t valid_bytes = 0;
  std::uint64_t file_bytes = 0;
};

std::string encode_record(const LogRecord& rec);
// Stops at the first record that is short, has a bad magic/version/type or
// fails its checksum.
LogReadResult read_log(const std::string& path);

/// Append-only log file. Records are buffered until flush(); sync() makes
/// them durable. Thread-safe.
class UndoLog {
 public:
  // truncate=false appends to an existing file.
  UndoLog(std::string path, bool truncate, bool fsync_enabled);
  ~UndoLog();
  UndoLog(const UndoLog&) = delete;
  UndoLog& operator=(const UndoLog&) = delete;

  void append(const LogRecord& rec);
  void append_load(const RowId& row, const Value& v);
  void append_header(TxnId txn, std::uint64_t field);
  void append_undo(TxnId txn, const UndoRecord& rec);
  void append_commit(TxnId txn, CommitSeq seq);
  void append_clr(TxnId txn, std::uint32_t write_seq, const RowId& row, const Value& restored);
  void append_rollback_done(TxnId txn);

  // Writes buffered records. Throws LogError on I/O failure.
  void flush();
  void sync();
  // Crash simulation: drop the buffer and ignore every later call.
  void freeze();
  bool frozen() const;

  const std::string& path() const { return path_; }
  std::uint64_t bytes_written() const;
  std::uint64_t syncs() const;

 private:
  std::string path_;
  bool fsync_enabled_;
  int fd_ = -1;
  mutable std::mutex mu_;
  std::string buf_;
  bool frozen_ = false;
  std::uint64_t written_ = 0;
  std::uint64_t syncs_ = 0;
};

}  // namespace hotlock
