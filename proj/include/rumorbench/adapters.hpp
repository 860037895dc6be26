/*
 * Copyright 2026 The rumorbench Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// External model transports: a child process speaking JSON lines over
// stdin/stdout, and an HTTP endpoint accepting a POSTed JSON array.
// open_model() turns a model specifier ("ref:", "cmd:", "http:") into a
// connected ModelHandle.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "rumorbench/common.hpp"
#include "rumorbench/protocol.hpp"
#include "rumorbench/refmodel.hpp"

namespace rumorbench {

inline constexpr std::chrono::milliseconds kDefaultTimeout{30'000};

// Splits a command line on whitespace, honouring single and double quotes
// and backslash escapes outside single quotes.
inline std::vector<std::string> split_command_line(std::string_view cmd) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (std::size_t i = 0; i < cmd.size(); ++i) {
    const char c = cmd[i];
    if (quote == '\'') {
      if (c == '\'') quote = 0;
      else cur.push_back(c);
    } else if (c == '\\' && i + 1 < cmd.size()) {
      cur.push_back(cmd[++i]);
      have = true;
    } else if (quote == '"') {
      if (c == '"') quote = 0;
      else cur.push_back(c);
    } else if (c == '\'' || c == '"') {
      quote = c;
      have = true;
    } else if (c == ' ' || c == '\t' || c == '\n') {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur.push_back(c);
      have = true;
    }
  }
  if (quote) throw DataError("unterminated quote in command line");
  if (have) out.push_back(std::move(cur));
  return out;
}

// ---------------------------------------------------------------------------
// Subprocess

class SubprocessAdapter : public Adapter {
 public:
  SubprocessAdapter(std::vector<std::string> argv, std::chrono::milliseconds timeout)
      : argv_(std::move(argv)), timeout_(timeout) {
    if (argv_.empty()) throw DataError("empty adapter command");
    spawn();
  }

  ~SubprocessAdapter() override { shutdown(); }

  SubprocessAdapter(const SubprocessAdapter&) = delete;
  SubprocessAdapter& operator=(const SubprocessAdapter&) = delete;

  HelloInfo hello() override {
    std::lock_guard lock(mu_);
    auto lines = exchange(wire::hello_request().dump() + "\n", 1);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines.front());
    } catch (const nlohmann::json::parse_error&) {
      throw ProtocolError("malformed hello response: " + lines.front());
    }
    return wire::parse_hello(j);
  }

  std::vector<PredictOutcome> predict(std::span<const Sample> samples) override {
    std::lock_guard lock(mu_);
    std::string payload;
    for (const auto& s : samples) payload += wire::predict_request(s).dump() + "\n";
    auto lines = exchange(payload, samples.size());
    std::vector<PredictOutcome> out;
    out.reserve(lines.size());
    for (const auto& line : lines) {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error&) {
        throw ProtocolError("malformed response line: " + line);
      }
      out.push_back(wire::parse_predict_response(j));
    }
    return out;
  }

 private:
  void spawn() {
    // A dead child must surface as a protocol error, not kill the harness.
    ::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (::pipe(to_child) != 0 || ::pipe(from_child) != 0) {
      throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    }
    // Exec failure is reported through a close-on-exec pipe.
    int exec_status[2];
    if (::pipe(exec_status) != 0) {
      throw ProtocolError(std::string("pipe: ") + std::strerror(errno));
    }
    ::fcntl(exec_status[1], F_SETFD, FD_CLOEXEC);
    pid_ = ::fork();
    if (pid_ < 0) throw ProtocolError(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(to_child[0], STDIN_FILENO);
      ::dup2(from_child[1], STDOUT_FILENO);
      ::close(to_child[0]);
      ::close(to_child[1]);
      ::close(from_child[0]);
      ::close(from_child[1]);
      ::close(exec_status[0]);
      std::vector<char*> args;
      for (auto& a : argv_) args.push_back(a.data());
      args.push_back(nullptr);
      ::execvp(args[0], args.data());
      const int err = errno;
      [[maybe_unused]] auto n = ::write(exec_status[1], &err, sizeof err);
      ::_exit(127);
    }
    ::close(to_child[0]);
    ::close(from_child[1]);
    ::close(exec_status[1]);
    int child_errno = 0;
    const auto n = ::read(exec_status[0], &child_errno, sizeof child_errno);
    ::close(exec_status[0]);
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
    if (n == sizeof child_errno) {
      shutdown();
      throw ProtocolError("cannot start adapter '" + argv_[0] +
                          "': " + std::strerror(child_errno));
    }
    ::fcntl(in_fd_, F_SETFL, ::fcntl(in_fd_, F_GETFL) | O_NONBLOCK);
    ::fcntl(out_fd_, F_SETFL, ::fcntl(out_fd_, F_GETFL) | O_NONBLOCK);
  }

  // Writes `payload` and collects `expected` non-blank response lines,
  // multiplexing both directions so large batches cannot deadlock.
  std::vector<std::string> exchange(const std::string& payload, std::size_t expected) {
    if (broken_) throw ProtocolError("adapter stream is unusable after an earlier failure");
    using clock = std::chrono::steady_clock;
    const auto deadline = clock::now() + timeout_;
    std::size_t written = 0;
    std::vector<std::string> lines;
    char buf[65536];
    while (lines.size() < expected) {
      const auto now = clock::now();
      if (now >= deadline) {
        broken_ = true;
        throw TimeoutError("adapter '" + argv_[0] + "' did not answer within " +
                           std::to_string(timeout_.count()) + " ms");
      }
      pollfd fds[2];
      nfds_t nfds = 0;
      fds[nfds++] = {out_fd_, POLLIN, 0};
      const bool want_write = written < payload.size();
      if (want_write) fds[nfds++] = {in_fd_, POLLOUT, 0};
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now);
      const int rc = ::poll(fds, nfds, static_cast<int>(std::max<long long>(1, wait.count())));
      if (rc < 0) {
        if (errno == EINTR) continue;
        broken_ = true;
        throw ProtocolError(std::string("poll: ") + std::strerror(errno));
      }
      if (want_write && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const auto n = ::write(in_fd_, payload.data() + written, payload.size() - written);
        if (n < 0 && errno != EAGAIN && errno != EINTR) {
          broken_ = true;
          throw ProtocolError("adapter '" + argv_[0] + "' closed its input");
        }
        if (n > 0) written += static_cast<std::size_t>(n);
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        const auto n = ::read(out_fd_, buf, sizeof buf);
        if (n == 0) {
          broken_ = true;
          throw ProtocolError("adapter '" + argv_[0] + "' exited after " +
                              std::to_string(lines.size()) + " of " +
                              std::to_string(expected) + " responses");
        }
        if (n < 0) {
          if (errno == EAGAIN || errno == EINTR) continue;
          broken_ = true;
          throw ProtocolError(std::string("read: ") + std::strerror(errno));
        }
        pending_.append(buf, static_cast<std::size_t>(n));
        std::size_t nl;
        while ((nl = pending_.find('\n')) != std::string::npos) {
          std::string line = pending_.substr(0, nl);
          pending_.erase(0, nl + 1);
          if (!line.empty() && line.back() == '\r') line.pop_back();
          if (line.find_first_not_of(" \t") == std::string::npos) continue;
          lines.push_back(std::move(line));
        }
      }
    }
    return lines;
  }

  void shutdown() {
    if (in_fd_ >= 0) ::close(in_fd_);
    if (out_fd_ >= 0) ::close(out_fd_);
    in_fd_ = out_fd_ = -1;
    if (pid_ <= 0) return;
    int status = 0;
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }

  std::vector<std::string> argv_;
  std::chrono::milliseconds timeout_;
  std::mutex mu_;
  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  std::string pending_;
  bool broken_ = false;
};

// ---------------------------------------------------------------------------
// HTTP

struct HttpEndpoint {
  std::string scheme_host_port;  // "http://host:port"
  std::string path;              // "/predict"
};

inline HttpEndpoint parse_http_url(std::string_view url) {
  constexpr std::string_view kScheme = "http://";
  if (url.rfind("https://", 0) == 0) {
    throw DataError("https endpoints are not supported: " + std::string(url));
  }
  if (url.rfind(kScheme, 0) != 0) throw DataError("not an http URL: " + std::string(url));
  const auto rest = url.substr(kScheme.size());
  const auto slash = rest.find('/');
  HttpEndpoint ep;
  ep.scheme_host_port = std::string(kScheme) + std::string(rest.substr(0, slash));
  ep.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  if (ep.scheme_host_port.size() == kScheme.size()) {
    throw DataError("http URL lacks a host: " + std::string(url));
  }
  return ep;
}

class HttpAdapter : public Adapter {
 public:
  HttpAdapter(std::string url, std::chrono::milliseconds timeout)
      : endpoint_(parse_http_url(url)), timeout_(timeout) {}

  HelloInfo hello() override {
    auto body = nlohmann::ordered_json::array();
    body.push_back(wire::hello_request());
    auto reply = post(body);
    if (reply.is_array()) {
      if (reply.size() != 1) throw ProtocolError("malformed hello response: expected one object");
      return wire::parse_hello(reply.front());
    }
    return wire::parse_hello(reply);
  }

  std::vector<PredictOutcome> predict(std::span<const Sample> samples) override {
    auto body = nlohmann::ordered_json::array();
    for (const auto& s : samples) body.push_back(wire::predict_request(s));
    auto reply = post(body);
    if (!reply.is_array()) throw ProtocolError("predict response is not a JSON array");
    std::vector<PredictOutcome> out;
    out.reserve(reply.size());
    for (const auto& j : reply) out.push_back(wire::parse_predict_response(j));
    return out;
  }

  bool concurrent() const override { return true; }

 private:
  nlohmann::json post(const nlohmann::ordered_json& body) const {
    httplib::Client client(endpoint_.scheme_host_port);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(endpoint_.path, body.dump(), "application/json");
    const std::string where = endpoint_.scheme_host_port + endpoint_.path;
    if (!res) {
      const auto err = res.error();
      if (err == httplib::Error::Read || err == httplib::Error::ConnectionTimeout ||
          err == httplib::Error::Write) {
        throw TimeoutError("http adapter " + where + ": " + httplib::to_string(err));
      }
      throw ProtocolError("http adapter " + where + " unreachable: " +
                          httplib::to_string(err));
    }
    if (res->status != 200) {
      throw ProtocolError("http adapter " + where + " returned status " +
                          std::to_string(res->status));
    }
    try {
      return nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::parse_error&) {
      throw ProtocolError("http adapter " + where + " returned malformed JSON");
    }
  }

  HttpEndpoint endpoint_;
  std::chrono::milliseconds timeout_;
};

// ---------------------------------------------------------------------------
// Model specifiers

struct ModelSpec {
  ModelKind kind;
  std::string address;
};

// "ref:<model.json>" | "cmd:<argv>" | "http:<url>". A bare http:// URL is
// accepted as well.
inline ModelSpec parse_model_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw DataError("model specifier '" + std::string(spec) +
                    "' must start with ref:, cmd: or http:");
  }
  const auto prefix = spec.substr(0, colon);
  const auto rest = std::string(spec.substr(colon + 1));
  if (rest.empty()) throw DataError("model specifier '" + std::string(spec) + "' is empty");
  if (prefix == "ref") return {ModelKind::Reference, rest};
  if (prefix == "cmd") return {ModelKind::Subprocess, rest};
  if (prefix == "http") {
    if (rest.rfind("//", 0) == 0) return {ModelKind::Http, "http:" + rest};
    if (rest.rfind("http://", 0) == 0 || rest.rfind("https://", 0) == 0) {
      return {ModelKind::Http, rest};
    }
    return {ModelKind::Http, "http://" + rest};
  }
  throw DataError("unknown model kind '" + std::string(prefix) +
                  "' (expected ref, cmd or http)");
}

// Adapter for `spec` without the handshake. The reference model's name is
// its file stem.
inline std::unique_ptr<Adapter> make_adapter(const ModelSpec& ms,
                                             std::chrono::milliseconds timeout = kDefaultTimeout) {
  switch (ms.kind) {
    case ModelKind::Reference: {
      const std::filesystem::path p(ms.address);
      return std::make_unique<ReferenceAdapter>(RefModel::load(p), p.stem().string());
    }
    case ModelKind::Subprocess:
      return std::make_unique<SubprocessAdapter>(split_command_line(ms.address), timeout);
    case ModelKind::Http:
      return std::make_unique<HttpAdapter>(ms.address, timeout);
  }
  throw DataError("unreachable model kind");
}

inline ModelHandle open_model(std::string_view spec,
                              std::chrono::milliseconds timeout = kDefaultTimeout) {
  const auto ms = parse_model_spec(spec);
  return ModelHandle(ms.kind, ms.address, make_adapter(ms, timeout));
}

inline ModelHandle reference_handle(RefModel model, std::string name = "reference") {
  return ModelHandle(ModelKind::Reference, name,
                     std::make_unique<ReferenceAdapter>(std::move(model), name));
}

}  // namespace rumorbench
