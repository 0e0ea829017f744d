#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

namespace tsg {

/// Single-value mailbox joining the ingestion thread to the solver thread.
/// The writer overwrites, the reader takes the newest complete value; the
/// copy happens under the lock so a reader never observes a torn value.
/// Sequence numbers let the reader count how many writes it skipped.
template <typename T>
class LatestSlot {
 public:
  void put(T value) {
    std::lock_guard<std::mutex> lock(mu_);
    value_ = std::move(value);
    ++seq_;
  }

  /// Newest value if anything was written since `last_seq`; advances
  /// last_seq to the current write count.
  std::optional<T> take(std::uint64_t& last_seq) {
    std::lock_guard<std::mutex> lock(mu_);
    if (seq_ == last_seq) return std::nullopt;
    last_seq = seq_;
    return value_;
  }

  std::uint64_t sequence() const {
    std::lock_guard<std::mutex> lock(mu_);
    return seq_;
  }

 private:
  mutable std::mutex mu_;
  std::uint64_t seq_ = 0;
  T value_{};
};

/// Pull-based reader of newline-delimited text from a file, or stdin when
/// the path is "-".
class LineSource {
 public:
  explicit LineSource(const std::string& path);
  ~LineSource();
  LineSource(const LineSource&) = delete;
  LineSource& operator=(const LineSource&) = delete;

  /// Reads the next line (without the newline). Returns false at end of
  /// input. The final line needs no trailing newline.
  bool next(std::string& line);

 private:
  std::istream* in_ = nullptr;
  std::unique_ptr<std::istream> owned_;
};

/// Newline-delimited writer to a file (truncating), or stdout when the
/// path is "-".
class LineSink {
 public:
  explicit LineSink(const std::string& path);
  ~LineSink();
  LineSink(const LineSink&) = delete;
  LineSink& operator=(const LineSink&) = delete;

  void write_line(const std::string& line);

 private:
  std::ostream* out_ = nullptr;
  std::unique_ptr<std::ostream> owned_;
};

/// Single-session TCP ingest. Binds on construction (port 0 picks a free
/// port). serve() waits for one client, feeds every complete line to the
/// callback, and returns on clean disconnect; a partial trailing line at
/// disconnect is discarded. A second connection arriving during the session
/// is refused with a one-line protocol message.
class TcpLineServer {
 public:
  TcpLineServer(const std::string& host, std::uint16_t port);
  ~TcpLineServer();
  TcpLineServer(const TcpLineServer&) = delete;
  TcpLineServer& operator=(const TcpLineServer&) = delete;

  void serve(const std::function<void(const std::string&)>& on_line);
  std::uint16_t port() const { return port_; }

  /// Unblocks a pending or running serve(); it returns promptly.
  void shutdown();

 private:
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> stop_{false};
};

}  // namespace tsg
