// Copyright 2026 The decode_lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cerrno>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <fcntl.h>
#include <netdb.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "decode_lab/distribution.hpp"
#include "decode_lab/error.hpp"
#include "decode_lab/language_model.hpp"
#include "decode_lab/vocabulary.hpp"

namespace decode_lab {

inline constexpr int kSidecarProtocolVersion = 1;
inline constexpr std::size_t kMaxMessageBytes = 16u << 20;
inline constexpr double kWireTolerance = 1e-6;
inline constexpr std::chrono::milliseconds kDefaultSidecarTimeout{30000};

namespace detail {

class UniqueFd {
 public:
  UniqueFd() = default;
  explicit UniqueFd(int fd) : fd_(fd) {}
  UniqueFd(const UniqueFd&) = delete;
  UniqueFd& operator=(const UniqueFd&) = delete;
  UniqueFd(UniqueFd&& o) noexcept : fd_(std::exchange(o.fd_, -1)) {}
  UniqueFd& operator=(UniqueFd&& o) noexcept {
    if (this != &o) {
      reset();
      fd_ = std::exchange(o.fd_, -1);
    }
    return *this;
  }
  ~UniqueFd() { reset(); }

  int get() const noexcept { return fd_; }
  explicit operator bool() const noexcept { return fd_ >= 0; }
  void reset() noexcept {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
  }

 private:
  int fd_ = -1;
};

/// Thrown by transports when the peer closes or stalls; callers map it to the
/// protocol-level error that fits the phase (handshake vs query).
struct TransportClosed {
  std::string what;
};

}  // namespace detail

/// Byte pipe carrying newline-terminated messages.
class SidecarTransport {
 public:
  virtual ~SidecarTransport() = default;

  void write_line(std::string_view line) {
    std::string buf(line);
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      ssize_t n = write_some(buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw detail::TransportClosed{std::string("write failed: ") + std::strerror(errno)};
      }
      off += static_cast<std::size_t>(n);
    }
  }

  /// Next line without its terminator.
  std::string read_line(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      if (buffer_.size() > kMaxMessageBytes) {
        throw detail::TransportClosed{"message exceeds 16 MiB"};
      }
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
          deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw detail::TransportClosed{"timed out waiting for reply"};
      pollfd pfd{read_fd(), POLLIN, 0};
      int rc = ::poll(&pfd, 1, static_cast<int>(left.count()));
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw detail::TransportClosed{std::string("poll failed: ") + std::strerror(errno)};
      }
      if (rc == 0) continue;
      char chunk[65536];
      ssize_t n = ::read(read_fd(), chunk, sizeof(chunk));
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw detail::TransportClosed{std::string("read failed: ") + std::strerror(errno)};
      }
      if (n == 0) throw detail::TransportClosed{"peer closed the connection"};
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

 protected:
  virtual ssize_t write_some(const char* data, std::size_t size) = 0;
  virtual int read_fd() const = 0;

 private:
  std::string buffer_;
};

/// Spawns `/bin/sh -c command` and talks over its stdin/stdout.
class StdioTransport final : public SidecarTransport {
 public:
  explicit StdioTransport(const std::string& command) {
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2], from_child[2];
    if (::pipe(to_child) != 0) throw Error(Errc::kUnreachable, "pipe() failed");
    if (::pipe(from_child) != 0) {
      ::close(to_child[0]);
      ::close(to_child[1]);
      throw Error(Errc::kUnreachable, "pipe() failed");
    }
    pid_ = ::fork();
    if (pid_ < 0) throw Error(Errc::kUnreachable, "fork() failed");
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    to_child_ = detail::UniqueFd(to_child[1]);
    from_child_ = detail::UniqueFd(from_child[0]);
    ::fcntl(to_child_.get(), F_SETFD, FD_CLOEXEC);
    ::fcntl(from_child_.get(), F_SETFD, FD_CLOEXEC);
  }

  ~StdioTransport() override {
    to_child_.reset();
    from_child_.reset();
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 50; ++i) {
        if (::waitpid(pid_, &status, WNOHANG) != 0) return;
        ::usleep(10000);
      }
      ::kill(pid_, SIGTERM);
      ::waitpid(pid_, &status, 0);
    }
  }

 protected:
  ssize_t write_some(const char* data, std::size_t size) override {
    return ::write(to_child_.get(), data, size);
  }
  int read_fd() const override { return from_child_.get(); }

 private:
  pid_t pid_ = -1;
  detail::UniqueFd to_child_;
  detail::UniqueFd from_child_;
};

class TcpTransport final : public SidecarTransport {
 public:
  TcpTransport(const std::string& host, const std::string& port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
      throw Error(Errc::kUnreachable, "resolve " + host + ":" + port + ": " + ::gai_strerror(rc));
    }
    std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res, ::freeaddrinfo);
    for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
      detail::UniqueFd fd(::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol));
      if (!fd) continue;
      if (::connect(fd.get(), ai->ai_addr, ai->ai_addrlen) == 0) {
        sock_ = std::move(fd);
        return;
      }
    }
    throw Error(Errc::kUnreachable, "connect " + host + ":" + port + ": " + std::strerror(errno));
  }

 protected:
  ssize_t write_some(const char* data, std::size_t size) override {
    return ::send(sock_.get(), data, size, MSG_NOSIGNAL);
  }
  int read_fd() const override { return sock_.get(); }

 private:
  detail::UniqueFd sock_;
};

/// `stdio:CMD` or `tcp:host:port`.
inline std::unique_ptr<SidecarTransport> open_transport(const std::string& endpoint) {
  if (endpoint.rfind("stdio:", 0) == 0) {
    auto cmd = endpoint.substr(6);
    if (cmd.empty()) throw Error(Errc::kInvalidArgument, "empty stdio command");
    return std::make_unique<StdioTransport>(cmd);
  }
  if (endpoint.rfind("tcp:", 0) == 0) {
    auto rest = endpoint.substr(4);
    auto colon = rest.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == rest.size()) {
      throw Error(Errc::kInvalidArgument, "expected tcp:host:port, got '" + endpoint + "'");
    }
    return std::make_unique<TcpTransport>(rest.substr(0, colon), rest.substr(colon + 1));
  }
  throw Error(Errc::kInvalidArgument, "endpoint must start with stdio: or tcp: ('" + endpoint + "')");
}

inline bool is_sidecar_endpoint(std::string_view endpoint) {
  return endpoint.rfind("stdio:", 0) == 0 || endpoint.rfind("tcp:", 0) == 0;
}

/// Model backed by an external process speaking the JSON-lines protocol:
///   -> {"type":"hello","version":1}
///   <- {"type":"vocab","version":1,"tokens":[...],"eos":i,"pad":j,"unk":k,"has_embeddings":b}
///   -> {"type":"next","context":[ids]}
///   <- {"type":"probs","values":[|V| reals]}
///   -> {"type":"embed","ids":[ids]}
///   <- {"type":"embeddings","vectors":[[...], ...]}
/// One request is in flight at a time; concurrent callers are serialized.
class SidecarClient final : public LanguageModel {
 public:
  SidecarClient(std::unique_ptr<SidecarTransport> transport, std::string endpoint,
                std::chrono::milliseconds timeout = kDefaultSidecarTimeout)
      : transport_(std::move(transport)), endpoint_(std::move(endpoint)), timeout_(timeout) {
    handshake();
  }

  static std::unique_ptr<SidecarClient> connect(const std::string& endpoint,
                                                std::chrono::milliseconds timeout = kDefaultSidecarTimeout) {
    return std::make_unique<SidecarClient>(open_transport(endpoint), endpoint, timeout);
  }

  const Vocabulary& vocab() const override { return vocab_; }
  int protocol_version() const noexcept { return version_; }
  bool has_embeddings() const override { return has_embeddings_; }
  std::string descriptor() const override { return "sidecar(" + endpoint_ + ")"; }

  Distribution next_distribution(std::span<const TokenId> context) const override {
    for (TokenId id : context) {
      if (id >= vocab_.size()) throw Error(Errc::kInvalidArgument, "context id out of range");
    }
    nlohmann::json req = {{"type", "next"}, {"context", std::vector<TokenId>(context.begin(), context.end())}};
    nlohmann::json reply = round_trip(req, "probs");
    const auto& values = reply.at("values");
    if (!values.is_array() || values.size() != vocab_.size()) {
      throw Error(Errc::kBadDistribution, "expected " + std::to_string(vocab_.size()) + " values");
    }
    std::vector<double> probs;
    probs.reserve(values.size());
    double total = 0.0;
    for (const auto& v : values) {
      if (!v.is_number()) throw Error(Errc::kBadDistribution, "non-numeric probability");
      double p = v.get<double>();
      if (!(p >= 0.0) || !std::isfinite(p)) throw Error(Errc::kBadDistribution, "negative or non-finite probability");
      probs.push_back(p);
      total += p;
    }
    if (std::abs(total - 1.0) > kWireTolerance) {
      throw Error(Errc::kBadDistribution, "values sum to " + std::to_string(total));
    }
    for (double& p : probs) p /= total;
    return Distribution{std::move(probs)};
  }

  std::optional<std::vector<double>> embedding(TokenId id) const override {
    if (!has_embeddings_ || id >= vocab_.size()) return std::nullopt;
    {
      std::lock_guard lock(cache_mu_);
      auto it = embed_cache_.find(id);
      if (it != embed_cache_.end()) return it->second;
    }
    nlohmann::json reply = round_trip({{"type", "embed"}, {"ids", {id}}}, "embeddings");
    std::optional<std::vector<double>> vec;
    try {
      const auto& vectors = reply.at("vectors");
      if (vectors.size() != 1) throw Error(Errc::kSidecarUnavailable, "expected one embedding");
      auto raw = vectors.at(0).get<std::vector<double>>();
      double norm = 0.0;
      for (double x : raw) norm += x * x;
      norm = std::sqrt(norm);
      if (norm > 0.0) {
        for (double& x : raw) x /= norm;
        vec = std::move(raw);
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kSidecarUnavailable, std::string("bad embeddings reply: ") + e.what());
    }
    std::lock_guard lock(cache_mu_);
    embed_cache_[id] = vec;
    return vec;
  }

 private:
  void handshake() {
    std::string line;
    try {
      transport_->write_line(nlohmann::json{{"type", "hello"}, {"version", kSidecarProtocolVersion}}.dump());
      line = transport_->read_line(timeout_);
    } catch (const detail::TransportClosed& e) {
      throw Error(Errc::kUnreachable, endpoint_ + ": " + e.what);
    }
    nlohmann::json msg;
    try {
      msg = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::kMalformedHandshake,
                  "reply is not JSON (byte offset " + std::to_string(e.byte) + ")");
    }
    try {
      if (msg.value("type", "") == "error") {
        throw Error(Errc::kSidecarUnavailable, "server refused handshake: " + msg.value("message", ""));
      }
      if (!msg.contains("version") || !msg["version"].is_number_integer()) {
        throw Error(Errc::kMalformedHandshake, "missing integer version");
      }
      version_ = msg["version"].get<int>();
      if (version_ != kSidecarProtocolVersion) {
        throw Error(Errc::kVersionMismatch, "server speaks version " + std::to_string(version_));
      }
      if (msg.at("type") != "vocab") throw Error(Errc::kMalformedHandshake, "expected type 'vocab'");
      auto tokens = msg.at("tokens").get<std::vector<std::string>>();
      if (tokens.empty()) throw Error(Errc::kMalformedHandshake, "empty vocabulary");
      vocab_ = Vocabulary(std::move(tokens), msg.at("eos").get<TokenId>(), msg.at("pad").get<TokenId>(),
                          msg.at("unk").get<TokenId>());
      has_embeddings_ = msg.value("has_embeddings", false);
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::kMalformedHandshake, e.what());
    } catch (const Error& e) {
      if (e.code() == Errc::kInvalidArgument) throw Error(Errc::kMalformedHandshake, e.what());
      throw;
    }
  }

  nlohmann::json round_trip(const nlohmann::json& request, std::string_view expected_type) const {
    std::lock_guard lock(io_mu_);
    std::string line;
    try {
      transport_->write_line(request.dump());
      line = transport_->read_line(timeout_);
    } catch (const detail::TransportClosed& e) {
      throw Error(Errc::kSidecarUnavailable, endpoint_ + ": " + e.what);
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(Errc::kSidecarUnavailable, "reply is not JSON (byte offset " + std::to_string(e.byte) + ")");
    }
    const std::string type = reply.is_object() ? reply.value("type", "") : "";
    if (type == "error") throw Error(Errc::kSidecarUnavailable, "server error: " + reply.value("message", ""));
    if (type != expected_type) {
      throw Error(Errc::kSidecarUnavailable, "expected '" + std::string(expected_type) + "' reply, got '" + type + "'");
    }
    return reply;
  }

  std::unique_ptr<SidecarTransport> transport_;
  std::string endpoint_;
  std::chrono::milliseconds timeout_;
  Vocabulary vocab_;
  int version_ = 0;
  bool has_embeddings_ = false;
  mutable std::mutex io_mu_;
  mutable std::mutex cache_mu_;
  mutable std::map<TokenId, std::optional<std::vector<double>>> embed_cache_;
};

}  // namespace decode_lab
