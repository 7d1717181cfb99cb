#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "check.hpp"

#include <httplib.h>

#include <mutex>
#include <thread>

#include "citygen/hash.hpp"
#include "citygen/service.hpp"
#include "support.hpp"

using namespace citygen;
using namespace citygen::testing;

namespace {

// A service on an ephemeral local port, torn down with the fixture.
struct Server {
  Service service;
  httplib::Server http;
  std::thread thread;
  int port = 0;

  explicit Server(bool deferSteps) : service(options(deferSteps)) {
    service.mount(http);
    port = http.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    thread = std::thread([this] { http.listen_after_bind(); });
    http.wait_until_ready();
  }
  ~Server() {
    http.stop();
    thread.join();
  }

  static ServiceOptions options(bool deferSteps) {
    ServiceOptions o;
    o.deferSteps = deferSteps;
    o.defaults.evolution = smallConfig(24, 1);
    o.defaults.view.imageWidth = 96;
    o.defaults.view.imageHeight = 54;
    return o;
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(10, 0);
    return c;
  }
};

Json post(httplib::Client& c, const std::string& path, const Json& body, int expect) {
  const auto res = c.Post(path, body.dump(), "application/json");
  REQUIRE(res);
  INFO(path << " -> " << res->body);
  CHECK(res->status == expect);
  return Json::parse(res->body, nullptr, false);
}

Json get(httplib::Client& c, const std::string& path, int expect = 200) {
  const auto res = c.Get(path);
  REQUIRE(res);
  CHECK(res->status == expect);
  return Json::parse(res->body, nullptr, false);
}

// Recursive key structure with values erased.
Json shape(const Json& j) {
  if (j.is_object()) {
    Json out = Json::object();
    for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = shape(it.value());
    return out;
  }
  if (j.is_array()) return j.empty() ? Json::array() : Json::array({shape(j.front())});
  return nullptr;
}

}  // namespace

TEST_CASE("create, inspect and drive a run") {
  Server s(false);
  auto c = s.client();
  const Json created = post(c, "/runs", Json{{"mode", "iga"}}, 201);
  const std::string id = created["runId"];
  const std::string base = "/runs/" + id;

  const Json summary = get(c, base);
  CHECK(summary["status"] == "awaitingSelection");
  CHECK(summary["generationIndex"] == 0);
  CHECK(summary["awaitingSelection"] == true);

  const Json current = get(c, base + "/generation/current");
  REQUIRE(current["candidates"].size() == 9);
  for (const Json& cand : current["candidates"]) {
    const auto img = c.Get(cand["url"].get<std::string>());
    REQUIRE(img);
    CHECK(img->status == 200);
    CHECK(img->get_header_value("Content-Type") == "image/png");
    CHECK(sha256Hex(std::vector<std::uint8_t>(img->body.begin(), img->body.end())) == cand["hash"]);
  }

  const Json sel = post(c, base + "/select", Json{{"first", 0}, {"second", 4}}, 202);
  CHECK(sel["nextGenerationIndex"] == 1);
  s.service.waitIdle(id);
  CHECK(get(c, base)["generationIndex"] == 1);

  const Json syncSel = post(c, base + "/select?sync=1", Json{{"first", 1}, {"second", 2}}, 200);
  CHECK(syncSel["nextGenerationIndex"] == 2);
  CHECK(get(c, base)["generationIndex"] == 2);

  const Json accepted = post(c, base + "/accept", Json{{"candidate", 3}}, 200);
  CHECK(accepted["status"] == "accepted");
  CHECK(accepted["acceptedCandidate"] == 3);
  post(c, base + "/select", Json{{"first", 0}, {"second", 1}}, 409);

  const auto log = c.Get(base + "/log");
  REQUIRE(log);
  CHECK(log->status == 200);
  CHECK(replayLog(parseEventLog(log->body)).ok);
}

TEST_CASE("error statuses") {
  Server s(true);
  auto c = s.client();
  get(c, "/runs/run-404", 404);
  get(c, "/images/" + std::string(64, 'a') + ".png", 404);
  post(c, "/runs/run-404/select", Json{{"first", 0}, {"second", 1}}, 404);
  post(c, "/runs", Json{{"mode", "bogus"}}, 400);
  {
    const auto res = c.Post("/runs", "{not json", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
  }

  const std::string id = post(c, "/runs", Json{{"mode", "iga"}}, 201)["runId"];
  const std::string base = "/runs/" + id;
  post(c, base + "/select", Json{{"first", 2}, {"second", 2}}, 422);
  post(c, base + "/select", Json{{"first", 0}, {"second", 9}}, 422);
  post(c, base + "/select", Json{{"first", 0}}, 400);
  post(c, base + "/accept", Json{{"candidate", 12}}, 422);

  // Deferred: the step stays in flight until runPending.
  post(c, base + "/select", Json{{"first", 0}, {"second", 1}}, 202);
  CHECK(get(c, base)["status"] == "computing");
  post(c, base + "/accept", Json{{"candidate", 0}}, 409);
  post(c, base + "/select", Json{{"first", 0}, {"second", 1}}, 409);
  post(c, base + "/abandon", Json::object(), 409);
  CHECK(s.service.runPending(id));
  CHECK_FALSE(s.service.runPending(id));
  CHECK(get(c, base)["status"] == "awaitingSelection");
  CHECK(post(c, base + "/abandon", Json::object(), 200)["status"] == "abandoned");
  post(c, base + "/accept", Json{{"candidate", 0}}, 409);
}

TEST_CASE("runs are isolated") {
  Server s(false);
  auto c = s.client();
  const std::string a = post(c, "/runs", Json{{"mode", "iga"}, {"config", {{"evolution", {{"seed", 5}}}}}}, 201)["runId"];
  const std::string b = post(c, "/runs", Json{{"mode", "iga"}, {"config", {{"evolution", {{"seed", 5}}}}}}, 201)["runId"];
  CHECK(a != b);
  post(c, "/runs/" + a + "/select?sync=1", Json{{"first", 0}, {"second", 1}}, 200);
  CHECK(get(c, "/runs/" + a)["generationIndex"] == 1);
  CHECK(get(c, "/runs/" + b)["generationIndex"] == 0);
  post(c, "/runs/" + b + "/accept", Json{{"candidate", 0}}, 200);
  CHECK(get(c, "/runs/" + a)["status"] == "awaitingSelection");

  // Same seed, same first population.
  const auto logA = parseEventLog(s.service.eventLog(a).value());
  const auto logB = parseEventLog(s.service.eventLog(b).value());
  CHECK(logA[1]["payload"]["populationHash"] == logB[1]["payload"]["populationHash"]);
}

TEST_CASE("IGA and HBGA runs look the same to a client") {
  Server s(false);
  auto c = s.client();
  const std::string iga = post(c, "/runs", Json{{"mode", "iga"}}, 201)["runId"];
  const std::string hbga = post(c, "/runs", Json{{"mode", "hbga"}}, 201)["runId"];
  CHECK(shape(get(c, "/runs/" + iga)) == shape(get(c, "/runs/" + hbga)));
  CHECK(shape(get(c, "/runs/" + iga + "/generation/current")) ==
        shape(get(c, "/runs/" + hbga + "/generation/current")));
  const Json si = post(c, "/runs/" + iga + "/select?sync=1", Json{{"first", 0}, {"second", 1}}, 200);
  const Json sh = post(c, "/runs/" + hbga + "/select?sync=1", Json{{"first", 0}, {"second", 1}}, 200);
  CHECK(shape(si) == shape(sh));
  const std::string body = get(c, "/runs/" + hbga).dump() + get(c, "/runs/" + hbga + "/generation/current").dump();
  CHECK(body.find("hbga") == std::string::npos);
  CHECK(body.find("Agent") == std::string::npos);
}

TEST_CASE("the push channel announces each displayed generation") {
  Server s(false);
  auto c = s.client();
  const std::string id = post(c, "/runs", Json{{"mode", "iga"}}, 201)["runId"];

  std::mutex mu;
  std::vector<int> announced;
  bool finished = false;
  auto lastAnnounced = [&] {
    std::lock_guard lock(mu);
    return announced.empty() ? -1 : announced.back();
  };
  std::thread listener([&] {
    auto sse = s.client();
    std::string buffer;
    sse.Get("/runs/" + id + "/events", [&](const char* data, std::size_t n) {
      buffer.append(data, n);
      std::size_t end;
      while ((end = buffer.find("\n\n")) != std::string::npos) {
        const std::string msg = buffer.substr(0, end);
        buffer.erase(0, end + 2);
        const std::size_t nl = msg.find('\n');
        const std::string event = msg.substr(7, nl - 7);
        const Json data = Json::parse(msg.substr(nl + 7));
        std::lock_guard lock(mu);
        if (event == "generation-ready") announced.push_back(data["generationIndex"]);
        if (event == "run-finished") finished = true;
      }
      std::lock_guard lock(mu);
      return !finished;
    });
  });

  for (int g = 0; g < 3; ++g) {
    // Wait for the announcement of the population we are about to act on.
    for (int spin = 0; spin < 400 && lastAnnounced() != g; ++spin) {
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    post(c, "/runs/" + id + "/select", Json{{"first", 0}, {"second", 1}}, 202);
    s.service.waitIdle(id);
  }
  for (int spin = 0; spin < 400 && lastAnnounced() != 3; ++spin) {
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
  }
  post(c, "/runs/" + id + "/accept", Json{{"candidate", 0}}, 200);
  listener.join();
  CHECK(announced == std::vector<int>{0, 1, 2, 3});
  CHECK(finished);
}
