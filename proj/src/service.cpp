#include "ptsc/service.hpp"

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>

#include <httplib.h>

namespace ptsc {

using nlohmann::json;

namespace fs = std::filesystem;

struct SessionStore::Job {
  std::string session;
  std::stop_source stop;
  std::atomic<bool> done{false};
  std::mutex mu;
  json result;
  std::jthread thread;
};

namespace {

int http_status(const std::string& code) {
  if (code == "not-found") return 404;
  if (code == "failed-branch" || code == "solved" || code == "empty-history") return 409;
  if (code == "parse" || code == "bad-action" || code == "bad-request" || code == "format") return 400;
  return 422;
}

void send(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const SessionError& e) {
  send(res, json{{"error", e.to_json()}}, http_status(e.code));
}

json body_of(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded()) throw SessionError("bad-request", "request body is not JSON");
  return j;
}

std::string token() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::ostringstream out;
  out << std::hex << rng();
  return out.str();
}

// Runs f, mapping exceptions onto the error envelope.
template <class F>
void guarded(httplib::Response& res, F&& f) {
  try {
    f();
  } catch (const SessionError& e) {
    send_error(res, e);
  } catch (const json::exception& e) {
    send_error(res, SessionError("bad-request", e.what()));
  } catch (const std::invalid_argument& e) {
    send_error(res, SessionError("bad-request", e.what()));
  } catch (const std::exception& e) {
    send(res, json{{"error", {{"code", "internal"}, {"message", e.what()}, {"detail", ""}}}}, 500);
  }
}

}  // namespace

json outcome_to_json(const PeOutcome& o) {
  json j{{"status", std::string(pe_status_name(o.status))},
         {"nodes", o.nodes},
         {"depth", o.depth},
         {"reason", o.reason}};
  if (o.status == PeStatus::Solved) {
    json b = json::object();
    for (const auto& [k, v] : o.sigma) b[k] = print_binding(v);
    j["bindings"] = b;
  }
  j["residual_size"] = o.residual.size();
  return j;
}

SessionStore::SessionStore(std::optional<fs::path> state_dir) : dir_(std::move(state_dir)) {
  if (dir_) {
    fs::create_directories(*dir_);
    load_state_dir();
  }
}

SessionStore::~SessionStore() {
  std::lock_guard lock(jobs_mu_);
  for (auto& [h, job] : jobs_) job->stop.request_stop();
  jobs_.clear();  // joins
}

std::size_t SessionStore::size() const {
  std::shared_lock lock(mu_);
  return sessions_.size();
}

std::shared_ptr<SessionStore::Slot> SessionStore::find(const std::string& id) const {
  std::shared_lock lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) throw SessionError("not-found", "no session " + id);
  return it->second;
}

std::string SessionStore::add(ProofSession s) {
  std::unique_lock lock(mu_);
  while (sessions_.count(s.id())) s.set_id(s.digest().substr(0, 8) + "-" + token().substr(0, 8));
  std::string id = s.id();
  auto slot = std::make_shared<Slot>();
  slot->session = std::move(s);
  persist(slot->session);
  sessions_.emplace(id, std::move(slot));
  return id;
}

void SessionStore::persist(const ProofSession& s) const {
  if (!dir_) return;
  fs::path tmp = *dir_ / (s.id() + ".json.tmp");
  {
    std::ofstream out(tmp);
    out << s.export_document().dump(2) << '\n';
  }
  fs::rename(tmp, *dir_ / (s.id() + ".json"));
}

void SessionStore::load_state_dir() {
  for (const auto& entry : fs::directory_iterator(*dir_)) {
    if (entry.path().extension() != ".json") continue;
    std::ifstream in(entry.path());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) continue;
    try {
      ProofSession s = ProofSession::import_document(doc);
      auto slot = std::make_shared<Slot>();
      slot->session = std::move(s);
      sessions_.emplace(slot->session.id(), std::move(slot));
    } catch (const SessionError&) {
      // Unreadable snapshots are left on disk untouched.
    }
  }
}

void SessionStore::install(httplib::Server& srv) {
  srv.Get("/presets", [](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    for (const std::string& n : preset_names()) out.push_back({{"name", n}, {"spec", spec_to_json(preset(n))}});
    send(res, out);
  });

  srv.Get("/sessions", [this](const httplib::Request&, httplib::Response& res) {
    json ids = json::array();
    std::shared_lock lock(mu_);
    for (const auto& [id, slot] : sessions_) ids.push_back(id);
    send(res, ids);
  });

  srv.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json b = body_of(req);
      PtsSpec spec;
      if (b.contains("spec") && b["spec"].is_object())
        spec = spec_from_json(b["spec"]);
      else
        spec = preset(b.value("preset", b.value("spec", std::string("systemF"))));
      ProofSession s = ProofSession::create(spec, b.value("env", ""), b.at("goal").get<std::string>());
      std::string id = add(std::move(s));
      auto slot = find(id);
      std::lock_guard lock(slot->mu);
      send(res, json{{"id", id}, {"state", slot->session.view()}}, 201);
    });
  });

  srv.Post("/sessions/import", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json doc = json::parse(req.body, nullptr, false);
      if (doc.is_discarded()) throw SessionError("format", "session document is not JSON");
      std::string id = add(ProofSession::import_document(doc));
      send(res, json{{"id", id}}, 201);
    });
  });

  srv.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto slot = find(req.matches[1]);
      std::lock_guard lock(slot->mu);
      send(res, slot->session.view());
    });
  });

  srv.Get(R"(/sessions/([^/]+)/export)", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto slot = find(req.matches[1]);
      std::lock_guard lock(slot->mu);
      send(res, slot->session.export_document());
    });
  });

  auto mutate = [this](const std::string& id, const Action& a, httplib::Response& res) {
    auto slot = find(id);
    std::lock_guard lock(slot->mu);
    ProofSession::Report r = slot->session.apply(a);
    if (r.changed) persist(slot->session);
    json out = slot->session.view();
    if (r.auto_outcome) out["outcome"] = outcome_to_json(*r.auto_outcome);
    send(res, out);
  };

  srv.Post(R"(/sessions/([^/]+)/actions)", [mutate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json b = body_of(req);
      mutate(req.matches[1], action_from_json(b.contains("action") ? b["action"] : b), res);
    });
  });

  srv.Post(R"(/sessions/([^/]+)/undo)", [mutate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { mutate(req.matches[1], Action::undo(), res); });
  });

  srv.Post(R"(/sessions/([^/]+)/auto)", [this, mutate](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      json b = body_of(req);
      json aj = b;
      aj["type"] = "auto";
      aj.erase("async");
      Action a = action_from_json(aj);
      std::string id = req.matches[1];
      if (!b.value("async", false)) return mutate(id, a, res);

      auto slot = find(id);
      auto job = std::make_shared<Job>();
      job->session = id;
      std::string handle = token();
      job->thread = std::jthread([this, slot, job, a] {
        json result;
        try {
          std::lock_guard lock(slot->mu);
          ProofSession::Report r = slot->session.apply(a, job->stop.get_token());
          if (r.changed) persist(slot->session);
          result = {{"state", slot->session.view()}};
          if (r.auto_outcome) result["outcome"] = outcome_to_json(*r.auto_outcome);
        } catch (const SessionError& e) {
          result = {{"error", e.to_json()}};
        } catch (const std::exception& e) {
          result = {{"error", {{"code", "internal"}, {"message", e.what()}, {"detail", ""}}}};
        }
        std::lock_guard lock(job->mu);
        job->result = std::move(result);
        job->done = true;
      });
      {
        std::lock_guard lock(jobs_mu_);
        jobs_.emplace(handle, job);
      }
      send(res, json{{"handle", handle}, {"poll", "/sessions/" + id + "/auto/" + handle}}, 202);
    });
  });

  auto find_job = [this](const httplib::Request& req) {
    std::lock_guard lock(jobs_mu_);
    auto it = jobs_.find(req.matches[2]);
    if (it == jobs_.end() || it->second->session != req.matches[1])
      throw SessionError("not-found", "no auto job " + std::string(req.matches[2]));
    return it->second;
  };

  srv.Get(R"(/sessions/([^/]+)/auto/([^/]+))", [find_job](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto job = find_job(req);
      if (!job->done) return send(res, json{{"status", "running"}});
      std::lock_guard lock(job->mu);
      json out = job->result;
      out["status"] = "done";
      send(res, out);
    });
  });

  srv.Delete(R"(/sessions/([^/]+)/auto/([^/]+))", [find_job](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto job = find_job(req);
      job->stop.request_stop();
      send(res, json{{"cancelled", !job->done.load()}});
    });
  });

  srv.Get("/", [](const httplib::Request&, httplib::Response& res) {
    send(res, json{{"service", "ptsc"}, {"presets", "/presets"}, {"sessions", "/sessions"}});
  });
}

int run_server(const std::string& host, int port, std::optional<fs::path> state_dir) {
  SessionStore store(std::move(state_dir));
  httplib::Server srv;
  store.install(srv);
  if (!srv.listen(host, port)) return 1;
  return 0;
}

}  // namespace ptsc
