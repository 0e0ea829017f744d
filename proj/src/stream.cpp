#include "stream.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <iostream>

#include "error.hpp"

namespace tsg {

LineSource::LineSource(const std::string& path) {
  if (path == "-") {
    in_ = &std::cin;
    return;
  }
  auto file = std::make_unique<std::ifstream>(path, std::ios::binary);
  if (!*file) raise(ErrorCode::Io, "cannot open stream for reading: " + path);
  owned_ = std::move(file);
  in_ = owned_.get();
}

LineSource::~LineSource() = default;

bool LineSource::next(std::string& line) {
  if (!std::getline(*in_, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

LineSink::LineSink(const std::string& path) {
  if (path == "-") {
    out_ = &std::cout;
    return;
  }
  auto file = std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc);
  if (!*file) raise(ErrorCode::Io, "cannot open stream for writing: " + path);
  owned_ = std::move(file);
  out_ = owned_.get();
}

LineSink::~LineSink() {
  if (out_) out_->flush();
}

void LineSink::write_line(const std::string& line) {
  *out_ << line << '\n';
  if (!*out_) raise(ErrorCode::Io, "stream write failed");
}

TcpLineServer::TcpLineServer(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  hints.ai_flags = AI_PASSIVE;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(),
                               &hints, &res);
  if (rc != 0) {
    raise(ErrorCode::Io, "cannot resolve " + host + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) {
      last_error = std::strerror(errno);
      continue;
    }
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(fd, ai->ai_addr, ai->ai_addrlen) == 0 && ::listen(fd, 8) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    raise(ErrorCode::Io, "cannot listen on " + host + ":" + service + ": " + last_error);
  }
  listen_fd_ = fd;

  sockaddr_storage addr{};
  socklen_t len = sizeof(addr);
  if (::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len) == 0) {
    if (addr.ss_family == AF_INET) {
      port_ = ntohs(reinterpret_cast<sockaddr_in*>(&addr)->sin_port);
    } else if (addr.ss_family == AF_INET6) {
      port_ = ntohs(reinterpret_cast<sockaddr_in6*>(&addr)->sin6_port);
    }
  }
}

TcpLineServer::~TcpLineServer() { shutdown(); }

void TcpLineServer::shutdown() {
  stop_.store(true);
  if (listen_fd_ >= 0) {
    // Closing the listen socket wakes the poll; the client socket is owned
    // by serve() and closed there.
    ::shutdown(listen_fd_, SHUT_RDWR);
  }
}

void TcpLineServer::serve(const std::function<void(const std::string&)>& on_line) {
  int client = -1;

  // Wait for the session client.
  while (!stop_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int n = ::poll(&pfd, 1, 100);
    if (n < 0 && errno != EINTR) raise(ErrorCode::Io, std::strerror(errno));
    if (n > 0 && (pfd.revents & (POLLIN | POLLERR | POLLHUP))) {
      client = ::accept(listen_fd_, nullptr, nullptr);
      if (client >= 0) break;
      if (stop_.load()) return;
    }
  }
  if (client < 0) return;

  std::string buffer;
  char chunk[4096];
  while (!stop_.load()) {
    pollfd pfds[2] = {{client, POLLIN, 0}, {listen_fd_, POLLIN, 0}};
    const int n = ::poll(pfds, 2, 100);
    if (n < 0) {
      if (errno == EINTR) continue;
      ::close(client);
      raise(ErrorCode::Io, std::strerror(errno));
    }
    if (n == 0) continue;

    if (pfds[1].revents & POLLIN) {
      const int extra = ::accept(listen_fd_, nullptr, nullptr);
      if (extra >= 0) {
        static const char kBusy[] = "busy: an ingest session is already active\n";
        ::send(extra, kBusy, sizeof(kBusy) - 1, MSG_NOSIGNAL);
        ::close(extra);
      }
    }

    if (pfds[0].revents & (POLLIN | POLLERR | POLLHUP)) {
      const ssize_t got = ::recv(client, chunk, sizeof(chunk), 0);
      if (got < 0) {
        if (errno == EINTR) continue;
        ::close(client);
        raise(ErrorCode::Io, std::strerror(errno));
      }
      if (got == 0) break;  // clean disconnect; buffer holds only a partial line
      buffer.append(chunk, static_cast<std::size_t>(got));
      std::size_t start = 0;
      for (;;) {
        const std::size_t nl = buffer.find('\n', start);
        if (nl == std::string::npos) break;
        std::string line = buffer.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        on_line(line);
        start = nl + 1;
      }
      buffer.erase(0, start);
    }
  }
  ::close(client);
}

}  // namespace tsg
