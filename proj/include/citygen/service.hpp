#pragma once

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "citygen/oracle.hpp"
#include "citygen/session.hpp"

namespace httplib {
class Server;
}

namespace citygen {

struct ServiceOptions {
  // Queue accepted selections until runPending() instead of computing them on
  // a worker thread. Lets tests observe the Computing state deterministically.
  bool deferSteps = false;
  // Defaults for POST /runs bodies that omit parts of the config.
  RunConfig defaults;
};

// HTTP/JSON front end over any number of independent sessions.
//
//   POST /runs                          {config?, mode?, brief?} -> 201 {runId}
//   GET  /runs/{id}                     status summary
//   GET  /runs/{id}/generation/current  image URLs and whether a selection is awaited
//   POST /runs/{id}/select              {first, second} -> 202 {nextGenerationIndex}; ?sync=1 -> 200
//   POST /runs/{id}/accept              {candidate}
//   POST /runs/{id}/abandon
//   GET  /runs/{id}/events              server-sent "generation-ready" events
//   GET  /runs/{id}/log                 JSONL event log
//   GET  /images/{sha256}.png
//
// Responses never reveal the run mode, so IGA and HBGA runs look identical to
// a client. Errors: 404 unknown run or image, 409 wrong state, 422 invalid
// selection, 400 malformed body.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  void mount(httplib::Server& server);

  // Runs a deferred selection; false when none is pending.
  bool runPending(const std::string& runId);

  // Blocks until the run has no step in flight.
  void waitIdle(const std::string& runId);

  // Direct access for tests and the CLI.
  std::optional<std::string> eventLog(const std::string& runId) const;

 private:
  struct Run;

  std::shared_ptr<Run> find(const std::string& runId) const;
  std::shared_ptr<Run> create(RunConfig config, std::optional<Brief> brief);
  void storeImage(const std::string& hash, std::vector<std::uint8_t> png);
  void startStep(const std::shared_ptr<Run>& run);
  static void executeStep(Run& run);

  ServiceOptions options_;
  mutable std::mutex runsMutex_;
  std::map<std::string, std::shared_ptr<Run>> runs_;
  int nextRunNumber_ = 1;
  mutable std::mutex imagesMutex_;
  std::map<std::string, std::vector<std::uint8_t>> images_;
};

}  // namespace citygen
