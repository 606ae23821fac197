#include "hotlock/undo_log.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

namespace hotlock {

namespace {

constexpr std::uint32_t kMagic = 0x474F4C48;  // "HLOG" little endian
constexpr std::uint8_t kVersion = 1;
// magic + version + type + payload length
constexpr std::size_t kPrefix = 4 + 1 + 1 + 4;
constexpr std::size_t kMaxPayload = 1 << 24;

void put_u8(std::string& s, std::uint8_t v) { s.push_back(static_cast<char>(v)); }
void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& s, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
void put_row(std::string& s, const RowId& r) {
  put_u32(s, r.space_id);
  put_u32(s, r.page_no);
  put_u32(s, r.heap_no);
}
void put_value(std::string& s, const Value& v) {
  if (v.is_int()) {
    put_u8(s, 0);
    put_u64(s, static_cast<std::uint64_t>(v.as_int()));
  } else {
    put_u8(s, 1);
    put_u32(s, static_cast<std::uint32_t>(v.bytes().size()));
    s.append(v.bytes());
  }
}

class Cursor {
 public:
  Cursor(const char* p, std::size_t n) : p_(p), n_(n) {}
  bool ok() const { return ok_; }
  bool done() const { return off_ == n_; }
  std::uint8_t u8() {
    if (!need(1)) return 0;
    return static_cast<std::uint8_t>(p_[off_++]);
  }
  std::uint32_t u32() {
    if (!need(4)) return 0;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(p_[off_++])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    if (!need(8)) return 0;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(p_[off_++])) << (8 * i);
    return v;
  }
  RowId row() {
    RowId r;
    r.space_id = u32();
    r.page_no = u32();
    r.heap_no = u32();
    return r;
  }
  Value value() {
    std::uint8_t tag = u8();
    if (tag == 0) return Value::of_int(static_cast<std::int64_t>(u64()));
    if (tag != 1) {
      ok_ = false;
      return {};
    }
    std::uint32_t len = u32();
    if (!need(len)) return {};
    std::string b(p_ + off_, len);
    off_ += len;
    return Value::of_bytes(std::move(b));
  }

 private:
  bool need(std::size_t k) {
    if (!ok_ || n_ - off_ < k) {
      ok_ = false;
      return false;
    }
    return true;
  }
  const char* p_;
  std::size_t n_;
  std::size_t off_ = 0;
  bool ok_ = true;
};

std::string encode_payload(const LogRecord& rec) {
  std::string p;
  switch (rec.type) {
    case LogType::kLoad:
      put_row(p, rec.row);
      put_value(p, rec.after);
      break;
    case LogType::kHeader:
      put_u64(p, rec.txn);
      put_u64(p, rec.field);
      break;
    case LogType::kUndo:
      put_u64(p, rec.txn);
      put_u32(p, rec.write_seq);
      put_row(p, rec.row);
      put_value(p, rec.before);
      put_value(p, rec.after);
      break;
    case LogType::kCommit:
      put_u64(p, rec.txn);
      put_u64(p, rec.field);
      break;
    case LogType::kClr:
      put_u64(p, rec.txn);
      put_u32(p, rec.write_seq);
      put_row(p, rec.row);
      put_value(p, rec.after);
      break;
    case LogType::kRollbackDone:
      put_u64(p, rec.txn);
      break;
  }
  return p;
}

bool decode_payload(LogType type, const char* data, std::size_t n, LogRecord& rec) {
  Cursor c(data, n);
  rec.type = type;
  switch (type) {
    case LogType::kLoad:
      rec.row = c.row();
      rec.after = c.value();
      break;
    case LogType::kHeader:
    case LogType::kCommit:
      rec.txn = c.u64();
      rec.field = c.u64();
      break;
    case LogType::kUndo:
      rec.txn = c.u64();
      rec.write_seq = c.u32();
      rec.row = c.row();
      rec.before = c.value();
      rec.after = c.value();
      break;
    case LogType::kClr:
      rec.txn = c.u64();
      rec.write_seq = c.u32();
      rec.row = c.row();
      rec.after = c.value();
      break;
    case LogType::kRollbackDone:
      rec.txn = c.u64();
      break;
    default:
      return false;
  }
  return c.ok() && c.done();
}

std::uint32_t checksum(const char* p, std::size_t n) {
  return static_cast<std::uint32_t>(crc32(0L, reinterpret_cast<const Bytef*>(p), static_cast<uInt>(n)));
}

}  // namespace

std::uint64_t encode_hot_order(HotOrder order) {
  if (order & kHotHeaderBit) throw std::invalid_argument("hot order needs more than 63 bits");
  return kHotHeaderBit | order;
}

std::uint64_t encode_trx_no(CommitSeq seq) {
  if (seq & kHotHeaderBit) throw std::invalid_argument("trx_no needs more than 63 bits");
  return seq;
}

HeaderField decode_header(std::uint64_t field) {
  return {(field & kHotHeaderBit) != 0, field & ~kHotHeaderBit};
}

std::string encode_record(const LogRecord& rec) {
  std::string payload = encode_payload(rec);
  std::string out;
  out.reserve(kPrefix + payload.size() + 4);
  put_u32(out, kMagic);
  put_u8(out, kVersion);
  put_u8(out, static_cast<std::uint8_t>(rec.type));
  put_u32(out, static_cast<std::uint32_t>(payload.size()));
  out += payload;
  // crc covers everything after the magic
  put_u32(out, checksum(out.data() + 4, out.size() - 4));
  return out;
}

LogReadResult read_log(const std::string& path) {
  LogReadResult res;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LogError("cannot open log " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  res.file_bytes = data.size();
  std::size_t off = 0;
  while (data.size() - off >= kPrefix + 4) {
    Cursor c(data.data() + off, kPrefix);
    std::uint32_t magic = c.u32();
    std::uint8_t version = c.u8();
    std::uint8_t type = c.u8();
    std::uint32_t len = c.u32();
    if (magic != kMagic || version != kVersion || len > kMaxPayload) break;
    if (data.size() - off < kPrefix + len + 4) break;
    Cursor tail(data.data() + off + kPrefix + len, 4);
    std::uint32_t crc = tail.u32();
    if (crc != checksum(data.data() + off + 4, kPrefix - 4 + len)) break;
    LogRecord rec;
    if (!decode_payload(static_cast<LogType>(type), data.data() + off + kPrefix, len, rec)) break;
    res.records.push_back(std::move(rec));
    off += kPrefix + len + 4;
  }
  res.valid_bytes = off;
  return res;
}

UndoLog::UndoLog(std::string path, bool truncate, bool fsync_enabled)
    : path_(std::move(path)), fsync_enabled_(fsync_enabled) {
  int flags = O_WRONLY | O_CREAT | O_APPEND | (truncate ? O_TRUNC : 0);
  fd_ = ::open(path_.c_str(), flags, 0644);
  if (fd_ < 0) throw LogError("cannot open log " + path_ + ": " + std::strerror(errno));
}

UndoLog::~UndoLog() {
  try {
    flush();
  } catch (...) {
  }
  if (fd_ >= 0) ::close(fd_);
}

void UndoLog::append(const LogRecord& rec) {
  std::string bytes = encode_record(rec);
  std::lock_guard lk(mu_);
  if (frozen_) return;
  buf_ += bytes;
}

void UndoLog::append_load(const RowId& row, const Value& v) {
  LogRecord r;
  r.type = LogType::kLoad;
  r.row = row;
  r.after = v;
  append(r);
}

void UndoLog::append_header(TxnId txn, std::uint64_t field) {
  LogRecord r;
  r.type = LogType::kHeader;
  r.txn = txn;
  r.field = field;
  append(r);
}

void UndoLog::append_undo(TxnId txn, const UndoRecord& u) {
  LogRecord r;
  r.type = LogType::kUndo;
  r.txn = txn;
  r.write_seq = u.write_seq;
  r.row = u.row;
  r.before = u.before;
  r.after = u.after;
  append(r);
}

void UndoLog::append_commit(TxnId txn, CommitSeq seq) {
  LogRecord r;
  r.type = LogType::kCommit;
  r.txn = txn;
  r.field = seq;
  append(r);
}

void UndoLog::append_clr(TxnId txn, std::uint32_t write_seq, const RowId& row,
                         const Value& restored) {
  LogRecord r;
  r.type = LogType::kClr;
  r.txn = txn;
  r.write_seq = write_seq;
  r.row = row;
  r.after = restored;
  append(r);
}

void UndoLog::append_rollback_done(TxnId txn) {
  LogRecord r;
  r.type = LogType::kRollbackDone;
  r.txn = txn;
  append(r);
}

void UndoLog::flush() {
  std::lock_guard lk(mu_);
  if (frozen_ || buf_.empty()) return;
  std::size_t off = 0;
  while (off < buf_.size()) {
    ssize_t n = ::write(fd_, buf_.data() + off, buf_.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw LogError("log write failed: " + std::string(std::strerror(errno)));
    }
    off += static_cast<std::size_t>(n);
  }
  written_ += buf_.size();
  buf_.clear();
}

void UndoLog::sync() {
  std::lock_guard lk(mu_);
  if (frozen_) return;
  ++syncs_;
  if (fsync_enabled_ && ::fdatasync(fd_) != 0)
    throw LogError("log sync failed: " + std::string(std::strerror(errno)));
}

void UndoLog::freeze() {
  std::lock_guard lk(mu_);
  frozen_ = true;
  buf_.clear();
}

bool UndoLog::frozen() const {
  std::lock_guard lk(mu_);
  return frozen_;
}

std::uint64_t UndoLog::bytes_written() const {
  std::lock_guard lk(mu_);
  return written_;
}

std::uint64_t UndoLog::syncs() const {
  std::lock_guard lk(mu_);
  return syncs_;
}

}  // namespace hotlock
