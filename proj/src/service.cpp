#include "citygen/service.hpp"

#include <atomic>
#include <chrono>

#include <httplib.h>

#include "citygen/error.hpp"

namespace citygen {

struct Service::Run {
  std::string id;
  std::mutex mu;  // guards session and pending
  std::unique_ptr<Session> session;
  std::optional<Brief> brief;
  std::optional<ParentSelection> pending;
  std::atomic<bool> busy{false};
  std::thread worker;

  std::mutex cacheMu;  // guards the fields below
  std::condition_variable cv;
  Json summary;
  Json current;
  int displayedIndex = -1;
  bool finished = false;

  // Call with mu held.
  void refresh() {
    const RunState& s = session->state();
    const bool awaiting = s.status == RunStatus::AwaitingSelection;
    Json sum;
    sum["runId"] = id;
    sum["status"] = std::string(toString(s.status));
    sum["generationIndex"] = session->generationIndex();
    sum["awaitingSelection"] = awaiting;
    sum["acceptedCandidate"] = s.acceptedCandidate ? Json(*s.acceptedCandidate) : Json(nullptr);
    sum["brief"] = brief ? Json(brief->name) : Json(nullptr);

    Json cur;
    cur["runId"] = id;
    cur["generationIndex"] = session->generationIndex();
    cur["status"] = std::string(toString(s.status));
    cur["awaitingSelection"] = awaiting;
    Json candidates = Json::array();
    const GenerationRecord& record = s.history.back();
    for (std::size_t i = 0; i < record.renderHashes.size(); ++i) {
      candidates.push_back(Json{{"index", i},
                                {"hash", record.renderHashes[i]},
                                {"url", "/images/" + record.renderHashes[i] + ".png"}});
    }
    cur["candidates"] = std::move(candidates);

    {
      std::lock_guard lock(cacheMu);
      summary = std::move(sum);
      current = std::move(cur);
      if (awaiting) displayedIndex = session->generationIndex();
      finished = s.status == RunStatus::Accepted || s.status == RunStatus::Abandoned;
    }
    cv.notify_all();
  }

  Json cachedSummary() {
    std::lock_guard lock(cacheMu);
    return summary;
  }

  Json cachedCurrent() {
    std::lock_guard lock(cacheMu);
    return current;
  }
};

namespace {

constexpr const char* kJson = "application/json";

void sendJson(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void sendError(httplib::Response& res, int status, const std::string& message) {
  sendJson(res, status, Json{{"error", message}});
}

int httpStatus(ErrorCode code) {
  switch (code) {
    case ErrorCode::WrongState:
    case ErrorCode::WrongMode:
      return 409;
    case ErrorCode::InvalidSelection:
    case ErrorCode::IndexOutOfRange:
    case ErrorCode::EqualParents:
      return 422;
    case ErrorCode::NotFound:
      return 404;
    default:
      return 400;
  }
}

// Runs a handler body, translating exceptions to status codes.
template <class F>
void guarded(httplib::Response& res, F&& body) {
  try {
    body();
  } catch (const Error& e) {
    sendError(res, httpStatus(e.code()), e.what());
  } catch (const nlohmann::json::exception& e) {
    sendError(res, 400, e.what());
  }
}

Json parseBody(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  Json j = Json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
  return j;
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {}

Service::~Service() {
  std::lock_guard lock(runsMutex_);
  for (auto& [id, run] : runs_) {
    if (run->worker.joinable()) run->worker.join();
    {
      std::lock_guard cacheLock(run->cacheMu);
      run->finished = true;
    }
    run->cv.notify_all();
  }
}

std::shared_ptr<Service::Run> Service::find(const std::string& runId) const {
  std::lock_guard lock(runsMutex_);
  const auto it = runs_.find(runId);
  if (it == runs_.end()) throw Error(ErrorCode::NotFound, "unknown run '" + runId + "'");
  return it->second;
}

void Service::storeImage(const std::string& hash, std::vector<std::uint8_t> png) {
  std::lock_guard lock(imagesMutex_);
  images_.try_emplace(hash, std::move(png));
}

std::shared_ptr<Service::Run> Service::create(RunConfig config, std::optional<Brief> brief) {
  auto run = std::make_shared<Run>();
  {
    std::lock_guard lock(runsMutex_);
    run->id = "run-" + std::to_string(nextRunNumber_++);
  }
  config.runId = run->id;
  run->brief = std::move(brief);
  {
    std::lock_guard lock(run->mu);
    run->session = std::make_unique<Session>(
        std::move(config), [this](const std::string& hash, std::vector<std::uint8_t> png) {
          storeImage(hash, std::move(png));
        });
    run->refresh();
  }
  std::lock_guard lock(runsMutex_);
  runs_.emplace(run->id, run);
  return run;
}

void Service::executeStep(Run& run) {
  std::lock_guard lock(run.mu);
  if (run.pending) {
    const ParentSelection sel = *run.pending;
    run.pending.reset();
    try {
      run.session->select(sel);
    } catch (const Error&) {
      // Validated before queuing; nothing sensible to report to a detached step.
    }
  }
  run.busy = false;
  run.refresh();
}

void Service::startStep(const std::shared_ptr<Run>& run) {
  if (run->worker.joinable()) run->worker.join();
  run->worker = std::thread([run] { executeStep(*run); });
}

bool Service::runPending(const std::string& runId) {
  const auto run = find(runId);
  {
    std::lock_guard lock(run->mu);
    if (!run->pending) return false;
  }
  executeStep(*run);
  return true;
}

void Service::waitIdle(const std::string& runId) {
  const auto run = find(runId);
  std::unique_lock lock(run->cacheMu);
  run->cv.wait(lock, [&] { return !run->busy; });
}

std::optional<std::string> Service::eventLog(const std::string& runId) const {
  std::shared_ptr<Run> run;
  {
    std::lock_guard lock(runsMutex_);
    const auto it = runs_.find(runId);
    if (it == runs_.end()) return std::nullopt;
    run = it->second;
  }
  if (run->busy) return std::nullopt;
  std::lock_guard lock(run->mu);
  return run->session->eventLog();
}

void Service::mount(httplib::Server& server) {
  server.Post("/runs", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const Json body = parseBody(req);
      Json config = toJson(options_.defaults);
      if (body.contains("config")) config.merge_patch(body.at("config"));
      if (body.contains("mode")) config["mode"] = body.at("mode");
      std::optional<Brief> brief;
      if (body.contains("brief")) brief = briefFromJson(body.at("brief"));
      const auto run = create(runConfigFromJson(config), std::move(brief));
      sendJson(res, 201, Json{{"runId", run->id}});
    });
  });

  server.Get("/runs/:id", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { sendJson(res, 200, find(req.path_params.at("id"))->cachedSummary()); });
  });

  server.Get("/runs/:id/generation/current", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { sendJson(res, 200, find(req.path_params.at("id"))->cachedCurrent()); });
  });

  server.Get("/runs/:id/log", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto run = find(req.path_params.at("id"));
      if (run->busy) throw Error(ErrorCode::WrongState, "a step is in flight");
      std::lock_guard lock(run->mu);
      res.set_content(run->session->eventLog(), "application/x-ndjson");
    });
  });

  server.Post("/runs/:id/select", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto run = find(req.path_params.at("id"));
      const Json body = parseBody(req);
      ParentSelection sel;
      sel.first = body.at("first").get<int>();
      sel.second = body.at("second").get<int>();
      sel.source = SelectionSource::Human;
      const bool sync = req.get_param_value("sync") == "1";
      if (run->busy.exchange(true)) throw Error(ErrorCode::WrongState, "a step is already in flight");
      int next = 0;
      {
        std::lock_guard lock(run->mu);
        try {
          run->session->checkSelection(sel);
        } catch (...) {
          run->busy = false;
          throw;
        }
        next = run->session->nextDisplayIndex();
        run->session->beginComputing();
        run->pending = sel;
        run->refresh();
      }
      if (sync) {
        executeStep(*run);
      } else if (!options_.deferSteps) {
        startStep(run);
      }
      sendJson(res, sync ? 200 : 202, Json{{"runId", run->id}, {"nextGenerationIndex", next}});
    });
  });

  server.Post("/runs/:id/accept", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto run = find(req.path_params.at("id"));
      const Json body = parseBody(req);
      if (run->busy) throw Error(ErrorCode::WrongState, "cannot accept while computing");
      std::lock_guard lock(run->mu);
      run->session->accept(body.at("candidate").get<int>());
      run->refresh();
      sendJson(res, 200, run->cachedSummary());
    });
  });

  server.Post("/runs/:id/abandon", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto run = find(req.path_params.at("id"));
      if (run->busy) throw Error(ErrorCode::WrongState, "cannot abandon while computing");
      std::lock_guard lock(run->mu);
      run->session->abandon();
      run->refresh();
      sendJson(res, 200, run->cachedSummary());
    });
  });

  server.Get("/runs/:id/events", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const auto run = find(req.path_params.at("id"));
      auto lastSent = std::make_shared<int>(-1);
      res.set_header("Cache-Control", "no-cache");
      res.set_chunked_content_provider("text/event-stream", [run, lastSent](std::size_t, httplib::DataSink& sink) {
        std::unique_lock lock(run->cacheMu);
        run->cv.wait_for(lock, std::chrono::milliseconds(500),
                         [&] { return run->displayedIndex != *lastSent || run->finished; });
        if (run->displayedIndex != *lastSent) {
          *lastSent = run->displayedIndex;
          const std::string data =
              Json{{"runId", run->id}, {"generationIndex", run->displayedIndex}}.dump();
          const std::string msg = "event: generation-ready\ndata: " + data + "\n\n";
          if (!sink.write(msg.data(), msg.size())) return false;
        } else if (run->finished) {
          const std::string msg = "event: run-finished\ndata: " + run->summary.dump() + "\n\n";
          sink.write(msg.data(), msg.size());
          sink.done();
          return true;
        }
        return sink.is_writable();
      });
    });
  });

  server.Get(R"(/images/([0-9a-f]{64})\.png)", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(imagesMutex_);
    const auto it = images_.find(req.matches[1].str());
    if (it == images_.end()) {
      sendError(res, 404, "unknown image");
      return;
    }
    res.set_content(reinterpret_cast<const char*>(it->second.data()), it->second.size(), "image/png");
  });
}

}  // namespace citygen
