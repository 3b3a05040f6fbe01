#include "gridlab/envd.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <csignal>
#include <cstring>
#include <mutex>
#include <thread>
#include <vector>

#include <json.hpp>

#include "gridlab/base64.hpp"

namespace gridlab {
namespace {

using nlohmann::json;

std::string error_reply(const std::string& code, const std::string& msg) {
  json j;
  j["ok"] = false;
  j["code"] = code;
  j["msg"] = msg;
  return j.dump();
}

}  // namespace

EnvSession::EnvSession(const SplitSpec& split, ViewConfig view)
    : split_(split), vocab_(build_vocab(split)), view_(view) {}

std::string EnvSession::observation_reply(double reward, bool done) const {
  const Frame frame = render(*world_, view_);
  json j;
  j["ok"] = true;
  j["obs"] = base64_encode(frame.data.data(), frame.data.size());
  j["width"] = frame.width;
  j["height"] = frame.height;
  j["instruction"] = instruction_;
  j["reward"] = reward;
  j["done"] = done;
  return j.dump();
}

std::string EnvSession::do_reset(std::uint64_t seed, Phase phase) {
  RngStream rng = derive_stream(seed, streams::kEnvService);
  const EpisodeSpec spec = sample_episode(split_, phase, rng);
  world_ = reset(spec);
  instruction_ = spec.instruction;
  return observation_reply(0.0, false);
}

std::string EnvSession::do_step(int action) {
  if (action < 0 || action >= kNumActions)
    return error_reply("E_RANGE", "action must be in [0, 3], got " +
                                      std::to_string(action));
  if (!world_) return error_reply("E_STATE", "no active episode; send reset");
  if (world_->done)
    return error_reply("E_STATE", "episode finished; send reset");
  auto [next, result] = step(*world_, static_cast<Action>(action));
  *world_ = std::move(next);
  return observation_reply(result.reward, result.done);
}

std::string EnvSession::handle_line(const std::string& line) {
  json req;
  try {
    req = json::parse(line);
  } catch (const json::exception& e) {
    return error_reply("E_PARSE", e.what());
  }
  if (!req.is_object() || !req.contains("cmd") || !req["cmd"].is_string())
    return error_reply("E_PARSE", "expected {\"cmd\": ...}");
  const std::string cmd = req["cmd"];
  try {
    if (cmd == "hello") {
      json j;
      j["ok"] = true;
      j["proto"] = 1;
      j["task"] = task_name(split_.task);
      j["actions"] = kNumActions;
      return j.dump();
    }
    if (cmd == "reset") {
      if (!req.contains("seed") || !req["seed"].is_number_integer())
        return error_reply("E_PARSE", "reset needs an integer seed");
      const std::string phase = req.value("phase", "train");
      if (phase != "train" && phase != "test")
        return error_reply("E_PARSE", "phase must be train|test");
      return do_reset(req["seed"].get<std::uint64_t>(),
                      phase == "train" ? Phase::train : Phase::test);
    }
    if (cmd == "step") {
      if (!req.contains("action") || !req["action"].is_number_integer())
        return error_reply("E_PARSE", "step needs an integer action");
      return do_step(req["action"].get<int>());
    }
    if (cmd == "close") {
      close_requested_ = true;
      json j;
      j["ok"] = true;
      j["msg"] = "bye";
      return j.dump();
    }
  } catch (const std::exception& e) {
    return error_reply("E_PARSE", e.what());
  }
  return error_reply("E_PARSE", "unknown cmd: " + cmd);
}

// ---- socket server ----

struct EnvServer::Impl {
  ExperimentConfig cfg;
  SplitSpec split;
  int listen_fd = -1;
  int bound_port = 0;
  std::atomic<bool> stopping{false};
  std::thread accept_thread;
  std::mutex mu;
  std::vector<int> session_fds;
  std::vector<std::thread> session_threads;

  explicit Impl(ExperimentConfig c) : cfg(std::move(c)) {
    RngStream rng = derive_stream(cfg.seed, streams::kSplitBuild);
    split = build_split(cfg.task, cfg.split, rng);
  }

  void session_loop(int fd) {
    EnvSession session(split, cfg.derived.view);
    std::string buf;
    char chunk[4096];
    while (!stopping.load(std::memory_order_relaxed)) {
      const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
      if (n <= 0) break;
      buf.append(chunk, static_cast<size_t>(n));
      size_t nl;
      while ((nl = buf.find('\n')) != std::string::npos) {
        std::string line = buf.substr(0, nl);
        buf.erase(0, nl + 1);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::string reply = session.handle_line(line) + "\n";
        if (::send(fd, reply.data(), reply.size(), MSG_NOSIGNAL) < 0) {
          ::close(fd);
          return;
        }
        if (session.close_requested()) {
          ::close(fd);
          return;
        }
      }
    }
    if (stopping.load(std::memory_order_relaxed)) {
      const std::string bye = "{\"msg\":\"bye\",\"ok\":true}\n";
      ::send(fd, bye.data(), bye.size(), MSG_NOSIGNAL);
    }
    ::close(fd);
  }

  void accept_loop() {
    while (!stopping.load(std::memory_order_relaxed)) {
      sockaddr_in peer{};
      socklen_t len = sizeof(peer);
      const int fd = ::accept(listen_fd, reinterpret_cast<sockaddr*>(&peer), &len);
      if (fd < 0) {
        if (stopping.load(std::memory_order_relaxed)) break;
        continue;
      }
      std::lock_guard lk(mu);
      if (stopping.load(std::memory_order_relaxed)) {
        ::close(fd);
        break;
      }
      session_fds.push_back(fd);
      session_threads.emplace_back([this, fd] { session_loop(fd); });
    }
  }
};

EnvServer::EnvServer(ExperimentConfig cfg)
    : impl_(std::make_unique<Impl>(std::move(cfg))) {}

EnvServer::~EnvServer() {
  if (impl_ && impl_->listen_fd >= 0) stop();
}

void EnvServer::start(const std::string& host, int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("envd: socket() failed");
  const int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw std::runtime_error("envd: bad address: " + host);
  }
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
    ::close(fd);
    throw std::runtime_error("envd: cannot bind " + host + ":" +
                             std::to_string(port));
  }
  if (::listen(fd, 16) < 0) {
    ::close(fd);
    throw std::runtime_error("envd: listen() failed");
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  impl_->bound_port = ntohs(addr.sin_port);
  impl_->listen_fd = fd;
  impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

int EnvServer::port() const { return impl_->bound_port; }

void EnvServer::stop() {
  impl_->stopping.store(true);
  if (impl_->listen_fd >= 0) {
    ::shutdown(impl_->listen_fd, SHUT_RDWR);
    ::close(impl_->listen_fd);
    impl_->listen_fd = -1;
  }
  if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
  {
    std::lock_guard lk(impl_->mu);
    for (int fd : impl_->session_fds) ::shutdown(fd, SHUT_RD);
  }
  for (auto& t : impl_->session_threads)
    if (t.joinable()) t.join();
  impl_->session_threads.clear();
  impl_->session_fds.clear();
}

namespace {
std::atomic<bool> g_interrupted{false};
void on_signal(int) { g_interrupted.store(true); }
}  // namespace

int serve_forever(const ExperimentConfig& cfg, const std::string& host,
                  int port) {
  EnvServer server(cfg);
  server.start(host, port);
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_interrupted.load()) {
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  }
  server.stop();
  return 0;
}

}  // namespace gridlab
