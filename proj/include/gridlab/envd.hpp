#pragma once

#include <memory>
#include <optional>
#include <string>

#include "gridlab/config.hpp"
#include "gridlab/language.hpp"
#include "gridlab/render.hpp"
#include "gridlab/tasks.hpp"
#include "gridlab/world.hpp"

namespace gridlab {

// Newline-delimited JSON protocol, one session per connection.
//
// Requests:  {"cmd":"hello"}
//            {"cmd":"reset","seed":<int>,"phase":"train"|"test"}
//            {"cmd":"step","action":<int>}
//            {"cmd":"close"}
// Replies:   {"ok":true, "obs":<base64 raw RGB row-major>, "width":W,
//             "height":H, "instruction":S, "reward":R, "done":B}
//        or  {"ok":false, "code":"E_PARSE"|"E_STATE"|"E_RANGE", "msg":S}
//
// The protocol state machine is separate from the socket plumbing so the
// direct-vs-service equivalence can be tested without a network.
class EnvSession {
 public:
  EnvSession(const SplitSpec& split, ViewConfig view);

  // One request line in, one reply line out (no trailing newline).
  std::string handle_line(const std::string& line);

  bool close_requested() const { return close_requested_; }

 private:
  std::string do_reset(std::uint64_t seed, Phase phase);
  std::string do_step(int action);
  std::string observation_reply(double reward, bool done) const;

  const SplitSpec& split_;
  Vocab vocab_;
  ViewConfig view_;
  std::optional<WorldState> world_;
  std::string instruction_;
  bool close_requested_ = false;
};

class EnvServer {
 public:
  explicit EnvServer(ExperimentConfig cfg);
  ~EnvServer();

  EnvServer(const EnvServer&) = delete;
  EnvServer& operator=(const EnvServer&) = delete;

  // Binds and starts the accept loop; port 0 picks a free port. Throws on
  // bind failure.
  void start(const std::string& host, int port);
  int port() const;

  // Graceful shutdown: open sessions get a {"ok":true,"msg":"bye"} line,
  // then every thread is joined.
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Blocking wrapper used by the CLI; returns on SIGINT/SIGTERM.
int serve_forever(const ExperimentConfig& cfg, const std::string& host,
                  int port);

}  // namespace gridlab
