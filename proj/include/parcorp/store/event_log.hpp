#pragma once

// Append-only event log plus snapshot, both under one directory.
//
//   events.log     one event per line: "<crc32 as 8 hex digits> <json>\n"
//   snapshot.json  {"seq": N, "state": {...}}, replaced atomically
//
// Appends are fsync'd before they return. On load, the first line with a
// bad checksum, bad JSON, missing newline or out-of-order seq ends the
// log; the file is truncated there and the recovery point is reported.

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "parcorp/error.hpp"
#include "parcorp/types.hpp"

namespace parcorp::store {

namespace fs = std::filesystem;

struct LoadResult {
  std::optional<json> snapshot;  // the stored state, if any
  std::uint64_t snapshot_seq = 0;
  std::vector<json> events;  // events after the snapshot, in order
  std::uint64_t last_seq = 0;
  bool truncated = false;  // a corrupt tail was cut off
  std::size_t discarded_bytes = 0;
};

inline std::string crc_hex(std::string_view data) {
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(data.data()),
                         static_cast<uInt>(data.size()));
  char buf[9];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return buf;
}

inline std::string encode_event_line(const json& event) {
  const std::string body = event.dump();
  return crc_hex(body) + " " + body + "\n";
}

namespace detail {

[[noreturn]] inline void io_error(const std::string& what, const fs::path& path) {
  throw Error(ErrorKind::Store, "io_error",
              what + " " + path.string() + ": " + std::strerror(errno));
}

inline void write_all(int fd, std::string_view data, const fs::path& path) {
  while (!data.empty()) {
    const ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      io_error("write", path);
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

inline void fsync_dir(const fs::path& dir) {
  const int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

inline std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) io_error("open", path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

class EventLog {
 public:
  explicit EventLog(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) {
      throw Error(ErrorKind::Store, "store_unavailable",
                  "cannot create store directory " + dir_.string());
    }
  }

  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;
  ~EventLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  const fs::path& dir() const { return dir_; }
  fs::path log_path() const { return dir_ / "events.log"; }
  fs::path snapshot_path() const { return dir_ / "snapshot.json"; }

  LoadResult load() {
    LoadResult out;
    if (fs::exists(snapshot_path())) {
      try {
        json snap = json::parse(detail::read_file(snapshot_path()));
        out.snapshot_seq = snap.at("seq").get<std::uint64_t>();
        out.snapshot = std::move(snap.at("state"));
      } catch (const json::exception& e) {
        throw Error(ErrorKind::Store, "corrupt_snapshot", e.what());
      }
    }
    out.last_seq = out.snapshot_seq;

    std::string data;
    if (fs::exists(log_path())) data = detail::read_file(log_path());
    std::size_t pos = 0;
    std::uint64_t expected = 1;
    while (pos < data.size()) {
      const auto nl = data.find('\n', pos);
      if (nl == std::string::npos) break;
      const std::string_view line(data.data() + pos, nl - pos);
      if (line.size() < 10 || line[8] != ' ') break;
      const auto body = line.substr(9);
      if (crc_hex(body) != line.substr(0, 8)) break;
      json event = json::parse(body, nullptr, false);
      if (event.is_discarded() || !event.is_object() || !event.contains("seq")) break;
      const auto seq = event["seq"].get<std::uint64_t>();
      if (seq != expected) break;
      ++expected;
      pos = nl + 1;
      if (seq <= out.snapshot_seq) continue;
      out.last_seq = seq;
      out.events.push_back(std::move(event));
    }
    if (expected - 1 < out.snapshot_seq) {
      // The log lost events the snapshot already covers; the snapshot wins
      // but the log can no longer be appended to consistently.
      throw Error(ErrorKind::Store, "log_behind_snapshot",
                  "event log ends before snapshot seq " + std::to_string(out.snapshot_seq));
    }
    if (pos < data.size()) {
      out.truncated = true;
      out.discarded_bytes = data.size() - pos;
      if (::truncate(log_path().c_str(), static_cast<off_t>(pos)) != 0) {
        detail::io_error("truncate", log_path());
      }
    }
    log_seq_ = expected - 1;
    return out;
  }

  // Durable once this returns.
  void append(const json& event) {
    open_for_append();
    detail::write_all(fd_, encode_event_line(event), log_path());
    if (::fsync(fd_) != 0) detail::io_error("fsync", log_path());
    log_seq_ = event.at("seq").get<std::uint64_t>();
  }

  void write_snapshot(std::uint64_t seq, const json& state) {
    const fs::path tmp = dir_ / "snapshot.json.tmp";
    const int fd = ::open(tmp.c_str(), O_WRONLY | O_CREAT | O_TRUNC | O_CLOEXEC, 0644);
    if (fd < 0) detail::io_error("open", tmp);
    const json snap = {{"seq", seq}, {"state", state}};
    detail::write_all(fd, snap.dump(), tmp);
    if (::fsync(fd) != 0) {
      ::close(fd);
      detail::io_error("fsync", tmp);
    }
    ::close(fd);
    std::error_code ec;
    fs::rename(tmp, snapshot_path(), ec);
    if (ec) {
      throw Error(ErrorKind::Store, "io_error", "rename snapshot: " + ec.message());
    }
    detail::fsync_dir(dir_);
  }

  std::uint64_t log_seq() const { return log_seq_; }

 private:
  void open_for_append() {
    if (fd_ >= 0) return;
    const bool fresh = !fs::exists(log_path());
    fd_ = ::open(log_path().c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) detail::io_error("open", log_path());
    if (fresh) detail::fsync_dir(dir_);
  }

  fs::path dir_;
  int fd_ = -1;
  std::uint64_t log_seq_ = 0;
};

}  // namespace parcorp::store
