#include "doctest.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "stream.hpp"
#include "test_util.hpp"

using namespace tsg;

namespace {

int connect_local(std::uint16_t port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  REQUIRE(fd >= 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  REQUIRE(::inet_pton(AF_INET, "127.0.0.1", &addr.sin_addr) == 1);
  REQUIRE(::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) == 0);
  return fd;
}

void send_all(int fd, const std::string& data) {
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::send(fd, data.data() + off, data.size() - off, 0);
    REQUIRE(n > 0);
    off += static_cast<std::size_t>(n);
  }
}

std::string recv_some(int fd) {
  char buf[256];
  const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
  return n > 0 ? std::string(buf, static_cast<std::size_t>(n)) : std::string();
}

}  // namespace

TEST_SUITE("stream") {

TEST_CASE("latest slot keeps only the newest value and counts skips") {
  LatestSlot<int> slot;
  std::uint64_t seen = 0;
  CHECK(!slot.take(seen).has_value());
  CHECK(slot.sequence() == 0);

  slot.put(10);
  auto got = slot.take(seen);
  REQUIRE(got.has_value());
  CHECK(*got == 10);
  CHECK(seen == 1);
  CHECK(!slot.take(seen).has_value());

  slot.put(20);
  slot.put(30);
  slot.put(40);
  const std::uint64_t before = seen;
  got = slot.take(seen);
  REQUIRE(got.has_value());
  CHECK(*got == 40);
  // Three writes happened; the reader saw one value and skipped two.
  CHECK(seen - before == 3);
  CHECK(slot.sequence() == 4);
}

TEST_CASE("line source and sink round-trip files") {
  const std::string path = tsg_test::temp_path("lines") + ".txt";
  const std::vector<std::string> lines = {"alpha", "", "gamma delta", "last"};
  {
    LineSink sink(path);
    for (const std::string& l : lines) sink.write_line(l);
  }
  std::vector<std::string> back;
  {
    LineSource src(path);
    std::string line;
    while (src.next(line)) back.push_back(line);
  }
  REQUIRE(back.size() == lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) CHECK(back[i] == lines[i]);
  std::remove(path.c_str());
}

TEST_CASE("line source strips carriage returns and accepts a missing final newline") {
  const std::string path = tsg_test::temp_path("crlf") + ".txt";
  {
    std::ofstream out(path, std::ios::binary);
    out << "one\r\ntwo\nthree";
  }
  LineSource src(path);
  std::string line;
  REQUIRE(src.next(line));
  CHECK(line == "one");
  REQUIRE(src.next(line));
  CHECK(line == "two");
  REQUIRE(src.next(line));
  CHECK(line == "three");
  CHECK(!src.next(line));
  std::remove(path.c_str());
}

TEST_CASE("line source rejects a missing file") {
  CHECK_THROWS(LineSource(tsg_test::temp_path("missing") + ".txt"));
}

TEST_CASE("tcp server delivers complete lines from one session") {
  TcpLineServer server("127.0.0.1", 0);
  REQUIRE(server.port() != 0);

  std::vector<std::string> seen;
  std::thread t([&] { server.serve([&](const std::string& l) { seen.push_back(l); }); });

  const int fd = connect_local(server.port());
  send_all(fd, "a 1 2\nb 3 4\n");
  send_all(fd, "partial tail");
  ::close(fd);
  t.join();

  // Two terminated lines arrive; the unterminated tail is dropped.
  REQUIRE(seen.size() == 2);
  CHECK(seen[0] == "a 1 2");
  CHECK(seen[1] == "b 3 4");
}

TEST_CASE("tcp server refuses a second simultaneous client") {
  TcpLineServer server("127.0.0.1", 0);
  std::vector<std::string> seen;
  std::thread t([&] { server.serve([&](const std::string& l) { seen.push_back(l); }); });

  const int first = connect_local(server.port());
  send_all(first, "hello\n");
  // Wait until the session is live so the second connect races nothing.
  for (int spin = 0; spin < 2000 && seen.empty(); ++spin) {
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
  REQUIRE(!seen.empty());

  const int second = connect_local(server.port());
  const std::string refusal = recv_some(second);
  CHECK(refusal.find("busy") != std::string::npos);
  ::close(second);

  send_all(first, "world\n");
  ::close(first);
  t.join();

  REQUIRE(seen.size() == 2);
  CHECK(seen[1] == "world");
}

TEST_CASE("shutdown unblocks a server waiting for a client") {
  TcpLineServer server("127.0.0.1", 0);
  std::thread t([&] { server.serve([](const std::string&) {}); });
  std::this_thread::sleep_for(std::chrono::milliseconds(20));
  server.shutdown();
  t.join();
  CHECK(true);
}

}  // TEST_SUITE
