// HTTP+JSON front end over proof sessions.
#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <thread>

#include <json.hpp>

#include "ptsc/session.hpp"

namespace httplib {
class Server;
}

namespace ptsc {

// Sessions in memory, optionally mirrored to one file per session under a
// state directory. Requests on one session are serialised by its own lock;
// distinct sessions proceed in parallel.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> state_dir = {});
  ~SessionStore();
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  // Every route answers JSON; errors use the SessionError envelope.
  void install(httplib::Server& server);

  std::size_t size() const;

 private:
  struct Slot {
    std::mutex mu;
    ProofSession session;
  };
  struct Job;

  std::shared_ptr<Slot> find(const std::string& id) const;
  std::string add(ProofSession s);
  void persist(const ProofSession& s) const;
  void load_state_dir();

  std::optional<std::filesystem::path> dir_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::mutex jobs_mu_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
};

nlohmann::json outcome_to_json(const PeOutcome& o);

// Blocks serving on host:port until the process is stopped.
int run_server(const std::string& host, int port, std::optional<std::filesystem::path> state_dir);

}  // namespace ptsc
