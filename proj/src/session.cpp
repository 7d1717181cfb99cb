#include "citygen/session.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <sstream>

#include "citygen/error.hpp"
#include "citygen/hash.hpp"

namespace citygen {

namespace {

template <class Enum, std::size_t N>
Enum parseEnum(std::string_view name, const Enum (&values)[N], std::string_view what) {
  for (const Enum v : values) {
    if (toString(v) == name) return v;
  }
  throw Error(ErrorCode::ParseError, "unknown " + std::string(what) + " '" + std::string(name) + "'");
}

std::int64_t nowMs() {
  using namespace std::chrono;
  return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

Json evolutionToJson(const EvolutionConfig& c) {
  Json j;
  j["width"] = c.dim.width;
  j["height"] = c.dim.height;
  j["populationSize"] = c.populationSize;
  j["mutationRate"] = c.mutationRate;
  j["maxHeight"] = c.maxHeight;
  j["centreVariance"] = c.centreVariance;
  j["crossoverBlockSize"] = c.crossoverBlockSize;
  j["seed"] = c.seed;
  j["waterFraction"] = c.waterFraction;
  j["elitism"] = c.elitism;
  return j;
}

EvolutionConfig evolutionFromJson(const Json& j) {
  EvolutionConfig c;
  c.dim.width = j.value("width", c.dim.width);
  c.dim.height = j.value("height", c.dim.height);
  c.populationSize = j.value("populationSize", c.populationSize);
  c.mutationRate = j.value("mutationRate", c.mutationRate);
  c.maxHeight = j.value("maxHeight", c.maxHeight);
  c.centreVariance = j.value("centreVariance", c.centreVariance);
  c.crossoverBlockSize = j.value("crossoverBlockSize", c.crossoverBlockSize);
  c.seed = j.value("seed", c.seed);
  c.waterFraction = j.value("waterFraction", c.waterFraction);
  c.elitism = j.value("elitism", c.elitism);
  return c;
}

Json agentToJson(const AgentConfig& c) {
  Json j;
  j["classifier"] = std::string(toString(c.classifierKind));
  j["minLeaf"] = c.minLeaf;
  j["confidenceThreshold"] = c.confidenceThreshold;
  j["mutationBoost"] = c.mutationBoost;
  j["maxBoostedRate"] = c.maxBoostedRate;
  return j;
}

AgentConfig agentFromJson(const Json& j) {
  AgentConfig c;
  if (j.contains("classifier")) c.classifierKind = parseClassifierKind(j.at("classifier").get<std::string>());
  c.minLeaf = j.value("minLeaf", c.minLeaf);
  c.confidenceThreshold = j.value("confidenceThreshold", c.confidenceThreshold);
  c.mutationBoost = j.value("mutationBoost", c.mutationBoost);
  c.maxBoostedRate = j.value("maxBoostedRate", c.maxBoostedRate);
  return c;
}

Json selectionToJson(const ParentSelection& s) {
  Json j;
  j["first"] = s.first;
  j["second"] = s.second;
  j["source"] = std::string(toString(s.source));
  return j;
}

ParentSelection selectionFromJson(const Json& j) {
  ParentSelection s;
  s.first = j.at("first").get<int>();
  s.second = j.at("second").get<int>();
  s.source = parseSelectionSource(j.value("source", "human"));
  return s;
}

std::string populationHash(const Population& pop) {
  std::string joined;
  for (const CityGenome& g : pop.candidates) joined += genomeHash(g);
  return sha256Hex(std::string_view(joined));
}

Json withoutTimestamp(Json j) {
  if (j.is_object()) j.erase("timestamp");
  return j;
}

}  // namespace

std::string_view toString(RunMode mode) {
  switch (mode) {
    case RunMode::Random: return "random";
    case RunMode::IGA: return "iga";
    case RunMode::HBGA: return "hbga";
  }
  return "hbga";
}

RunMode parseRunMode(std::string_view name) {
  static constexpr RunMode kAll[] = {RunMode::Random, RunMode::IGA, RunMode::HBGA};
  // Accept upper-case mode names as typed on the command line.
  std::string lower(name);
  for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return parseEnum(lower, kAll, "run mode");
}

std::string_view toString(GenerationMode mode) {
  switch (mode) {
    case GenerationMode::Interactive: return "Interactive";
    case GenerationMode::Agent: return "Agent";
    case GenerationMode::Random: return "Random";
  }
  return "Random";
}

GenerationMode parseGenerationMode(std::string_view name) {
  static constexpr GenerationMode kAll[] = {GenerationMode::Interactive, GenerationMode::Agent,
                                            GenerationMode::Random};
  return parseEnum(name, kAll, "generation mode");
}

std::string_view toString(RunStatus status) {
  switch (status) {
    case RunStatus::AwaitingSelection: return "awaitingSelection";
    case RunStatus::Computing: return "computing";
    case RunStatus::Accepted: return "accepted";
    case RunStatus::Abandoned: return "abandoned";
  }
  return "computing";
}

void Schedule::validate() const {
  if (interactivePrefix < 0 || alternatingWindow < 0 || agentBlock < 0) {
    throw Error(ErrorCode::InvalidConfig, "schedule lengths must be non-negative");
  }
  if (alternatingWindow % 2 != 0) {
    throw Error(ErrorCode::InvalidConfig, "alternatingWindow must be even");
  }
}

GenerationMode scheduleMode(int generationIndex, const Schedule& s) {
  if (generationIndex < 1) {
    throw Error(ErrorCode::IndexOutOfRange, "schedule indices start at 1");
  }
  const int k = generationIndex;
  if (k <= s.interactivePrefix) return GenerationMode::Interactive;
  if (k <= s.interactivePrefix + s.alternatingWindow) {
    const int offset = k - s.interactivePrefix;
    return offset % 2 == 1 ? GenerationMode::Agent : GenerationMode::Interactive;
  }
  const int r = (k - s.interactivePrefix - s.alternatingWindow - 1) % (s.agentBlock + 1);
  return r < s.agentBlock ? GenerationMode::Agent : GenerationMode::Interactive;
}

void RunConfig::validate() const {
  if (runId.empty()) throw Error(ErrorCode::InvalidConfig, "runId must not be empty");
  evolution.validate();
  agent.validate();
  schedule.validate();
  view.validate();
}

Json toJson(const RunConfig& config) {
  Json j;
  j["runId"] = config.runId;
  j["mode"] = std::string(toString(config.mode));
  j["evolution"] = evolutionToJson(config.evolution);
  j["agent"] = agentToJson(config.agent);
  j["schedule"] = Json{{"interactivePrefix", config.schedule.interactivePrefix},
                       {"alternatingWindow", config.schedule.alternatingWindow},
                       {"agentBlock", config.schedule.agentBlock}};
  Json view;
  view["imageWidth"] = config.view.imageWidth;
  view["imageHeight"] = config.view.imageHeight;
  view["projection"] = std::string(toString(config.view.projection));
  view["maxHeight"] = config.view.maxHeight;
  view["palette"] = toJson(config.view.palette);
  j["view"] = std::move(view);
  j["render"] = config.render;
  return j;
}

RunConfig runConfigFromJson(const Json& j) {
  try {
    if (!j.is_object()) throw Error(ErrorCode::ParseError, "run config must be a JSON object");
    RunConfig c;
    c.runId = j.value("runId", c.runId);
    if (j.contains("mode")) c.mode = parseRunMode(j.at("mode").get<std::string>());
    if (j.contains("evolution")) c.evolution = evolutionFromJson(j.at("evolution"));
    if (j.contains("agent")) c.agent = agentFromJson(j.at("agent"));
    if (j.contains("schedule")) {
      const Json& s = j.at("schedule");
      c.schedule.interactivePrefix = s.value("interactivePrefix", c.schedule.interactivePrefix);
      c.schedule.alternatingWindow = s.value("alternatingWindow", c.schedule.alternatingWindow);
      c.schedule.agentBlock = s.value("agentBlock", c.schedule.agentBlock);
    }
    c.view.maxHeight = c.evolution.maxHeight;
    if (j.contains("view")) {
      const Json& v = j.at("view");
      c.view.imageWidth = v.value("imageWidth", c.view.imageWidth);
      c.view.imageHeight = v.value("imageHeight", c.view.imageHeight);
      if (v.contains("projection")) c.view.projection = parseProjection(v.at("projection").get<std::string>());
      c.view.maxHeight = v.value("maxHeight", c.view.maxHeight);
      if (v.contains("palette")) c.view.palette = paletteFromJson(v.at("palette"));
    }
    c.render = j.value("render", c.render);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("run config: ") + e.what());
  }
}

Json toJson(const GenerationRecord& r) {
  Json j;
  j["generationIndex"] = r.generationIndex;
  j["mode"] = std::string(toString(r.mode));
  j["selection"] = r.selection ? selectionToJson(*r.selection) : Json(nullptr);
  Json attrs = Json::array();
  for (const CandidateAttributes& a : r.attrs) attrs.push_back(toJson(a));
  j["attrs"] = std::move(attrs);
  j["meanConfidence"] = r.meanConfidence ? Json(*r.meanConfidence) : Json(nullptr);
  j["effectiveMutationRate"] = r.effectiveMutationRate;
  j["populationHash"] = r.populationHash;
  j["displayed"] = r.displayed;
  j["renderHashes"] = r.renderHashes;
  j["model"] = r.model ? *r.model : Json(nullptr);
  j["timestamp"] = r.timestampMs;
  return j;
}

GenerationRecord generationRecordFromJson(const Json& j) {
  try {
    GenerationRecord r;
    r.generationIndex = j.at("generationIndex").get<int>();
    r.mode = parseGenerationMode(j.at("mode").get<std::string>());
    if (!j.at("selection").is_null()) r.selection = selectionFromJson(j.at("selection"));
    for (const Json& a : j.at("attrs")) r.attrs.push_back(attributesFromJson(a));
    if (!j.at("meanConfidence").is_null()) r.meanConfidence = j.at("meanConfidence").get<double>();
    r.effectiveMutationRate = j.at("effectiveMutationRate").get<double>();
    r.populationHash = j.at("populationHash").get<std::string>();
    r.displayed = j.at("displayed").get<bool>();
    r.renderHashes = j.at("renderHashes").get<std::vector<std::string>>();
    if (!j.at("model").is_null()) r.model = j.at("model");
    r.timestampMs = j.value("timestamp", std::int64_t{0});
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("generation record: ") + e.what());
  }
}

bool GenerationRecord::sameContent(const GenerationRecord& other) const {
  return withoutTimestamp(toJson(*this)) == withoutTimestamp(toJson(other));
}

Session::Session(RunConfig config, ImageSink sink) : sink_(std::move(sink)) {
  config.validate();
  state_.config = std::move(config);
  emit("run_started", 0, Json{{"config", toJson(state_.config)}});
  appendRecord(seedPopulation(state_.config.evolution), GenerationMode::Random, std::nullopt, 0.0);
  runAgentBlocks();
  display();
  flushGenerations();
}

GenerationMode Session::nextMode() const {
  switch (state_.config.mode) {
    case RunMode::Random: return GenerationMode::Random;
    case RunMode::IGA: return GenerationMode::Interactive;
    case RunMode::HBGA: return scheduleMode(generationIndex() + 1, state_.config.schedule);
  }
  return GenerationMode::Interactive;
}

int Session::nextDisplayIndex() const {
  int k = generationIndex() + 1;
  if (state_.config.mode != RunMode::HBGA) return k;
  while (scheduleMode(k + 1, state_.config.schedule) == GenerationMode::Agent) ++k;
  return k;
}

void Session::requireAwaiting(std::string_view action) const {
  if (state_.status != RunStatus::AwaitingSelection) {
    throw Error(ErrorCode::WrongState, std::string(action) + " requires a run awaiting selection, status is " +
                                           std::string(toString(state_.status)));
  }
}

void Session::checkSelection(const ParentSelection& sel) const {
  const bool inFlight = selectionInFlight_ && state_.status == RunStatus::Computing;
  if (!inFlight) requireAwaiting("select");
  if (nextMode() != GenerationMode::Interactive) {
    throw Error(ErrorCode::WrongMode, "the next generation is not interactive");
  }
  sel.validate(static_cast<int>(state_.population.candidates.size()));
}

void Session::beginComputing() {
  requireAwaiting("select");
  state_.status = RunStatus::Computing;
  selectionInFlight_ = true;
}

void Session::select(const ParentSelection& sel) {
  stepInteractive(sel);
  if (nextMode() == GenerationMode::Agent) stepAgentBlock();
}

void Session::stepInteractive(const ParentSelection& sel) {
  checkSelection(sel);
  selectionInFlight_ = false;
  state_.status = RunStatus::Computing;
  const int next = generationIndex() + 1;
  emit("selection", next, selectionToJson(sel));

  recordSelection(state_.trainingSet, state_.population, sel, state_.attrs, state_.config.runId);
  const double rate = state_.config.evolution.mutationRate;
  appendRecord(breed(sel, state_.population, state_.config.evolution, rate), GenerationMode::Interactive, sel,
               rate);
  if (nextMode() != GenerationMode::Agent) display();
  flushGenerations();
}

void Session::stepAgentBlock() {
  if (state_.status != RunStatus::Computing && state_.status != RunStatus::AwaitingSelection) {
    throw Error(ErrorCode::WrongState, "run is finished");
  }
  if (nextMode() != GenerationMode::Agent) {
    throw Error(ErrorCode::WrongMode, "the next generation is not an agent generation");
  }
  runAgentBlocks();
  display();
  flushGenerations();
}

void Session::runAgentBlocks() {
  if (state_.config.mode != RunMode::HBGA || nextMode() != GenerationMode::Agent) return;
  state_.status = RunStatus::Computing;
  const RunConfig& cfg = state_.config;
  const std::optional<Classifier> model = fitClassifier(state_.trainingSet, cfg.agent);
  std::optional<Json> modelJson;
  if (model) modelJson = toJson(*model);

  while (nextMode() == GenerationMode::Agent) {
    const int next = generationIndex() + 1;
    Rng fallback(deriveSeed(cfg.evolution.seed, {stream::kAgentFallback, static_cast<std::uint64_t>(next)}));
    AgentChoice choice = selectAsAgent(model ? &*model : nullptr, state_.attrs, fallback);
    choice.selection.source = SelectionSource::Agent;
    const double rate = effectiveMutationRate(cfg.evolution.mutationRate, choice.meanConfidence, cfg.agent);
    appendRecord(breed(choice.selection, state_.population, cfg.evolution, rate), GenerationMode::Agent,
                 choice.selection, rate);
    state_.history.back().meanConfidence = choice.meanConfidence;
    state_.history.back().model = modelJson;
  }
}

void Session::stepRandom() {
  if (state_.config.mode != RunMode::Random) {
    throw Error(ErrorCode::WrongMode, "random steps belong to random-mode runs");
  }
  requireAwaiting("random step");
  state_.status = RunStatus::Computing;
  const EvolutionConfig& evo = state_.config.evolution;
  Population next;
  next.generationIndex = generationIndex() + 1;
  next.candidates.reserve(static_cast<std::size_t>(evo.populationSize));
  for (int i = 0; i < evo.populationSize; ++i) {
    Rng rng(deriveSeed(evo.seed, {stream::kRandomStep, static_cast<std::uint64_t>(next.generationIndex),
                                  static_cast<std::uint64_t>(i)}));
    next.candidates.push_back(randomGenome(evo, rng));
  }
  emit("random_step", next.generationIndex, Json::object());
  appendRecord(std::move(next), GenerationMode::Random, std::nullopt, 0.0);
  display();
  flushGenerations();
}

void Session::accept(int candidate) {
  requireAwaiting("accept");
  if (candidate < 0 || candidate >= static_cast<int>(state_.population.candidates.size())) {
    throw Error(ErrorCode::InvalidSelection, "candidate " + std::to_string(candidate) + " out of range");
  }
  state_.status = RunStatus::Accepted;
  state_.acceptedCandidate = candidate;
  emit("accepted", generationIndex(), Json{{"candidate", candidate}});
}

void Session::abandon() {
  requireAwaiting("abandon");
  state_.status = RunStatus::Abandoned;
  emit("abandoned", generationIndex(), Json::object());
}

void Session::appendRecord(Population next, GenerationMode mode, std::optional<ParentSelection> sel,
                           double rate) {
  GenerationRecord r;
  r.generationIndex = next.generationIndex;
  r.mode = mode;
  r.selection = sel;
  r.effectiveMutationRate = rate;
  r.attrs = extractAttributes(next.candidates);
  r.populationHash = populationHash(next);
  r.timestampMs = nowMs();
  state_.attrs = r.attrs;
  state_.population = std::move(next);
  state_.history.push_back(std::move(r));
}

void Session::display() {
  GenerationRecord& r = state_.history.back();
  r.displayed = true;
  if (state_.config.render) {
    r.renderHashes.clear();
    for (const CityGenome& g : state_.population.candidates) {
      std::vector<std::uint8_t> png = encodePng(renderGenome(g, state_.config.view));
      std::string hash = sha256Hex(png);
      ++state_.renderCount;
      if (sink_) sink_(hash, std::move(png));
      r.renderHashes.push_back(std::move(hash));
    }
  }
  state_.status = RunStatus::AwaitingSelection;
}

void Session::emit(std::string_view event, int generationIndex, Json payload) {
  Json e;
  e["event"] = std::string(event);
  e["generationIndex"] = generationIndex;
  e["payload"] = std::move(payload);
  events_.push_back(std::move(e));
}

void Session::flushGenerations() {
  for (; emittedRecords_ < state_.history.size(); ++emittedRecords_) {
    const GenerationRecord& r = state_.history[emittedRecords_];
    emit("generation", r.generationIndex, toJson(r));
  }
}

std::string Session::eventLog() const {
  std::string out;
  for (const Json& e : events_) {
    out += e.dump();
    out += '\n';
  }
  return out;
}

std::vector<Json> parseEventLog(std::string_view text) {
  std::vector<Json> events;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json e = Json::parse(line, nullptr, false);
    if (e.is_discarded() || !e.is_object() || !e.contains("event") || !e.at("event").is_string() ||
        !e.contains("generationIndex") || !e.at("generationIndex").is_number_integer() || !e.contains("payload")) {
      throw Error(ErrorCode::ParseError, "malformed event on line " + std::to_string(lineNo));
    }
    events.push_back(std::move(e));
  }
  if (events.empty() || events.front().at("event") != "run_started") {
    throw Error(ErrorCode::ParseError, "log does not start with run_started");
  }
  return events;
}

ReplayVerdict replayLog(const std::vector<Json>& events) {
  if (events.empty() || events.front().at("event") != "run_started") {
    throw Error(ErrorCode::ParseError, "log does not start with run_started");
  }
  RunConfig config = runConfigFromJson(events.front().at("payload").at("config"));
  Session session(std::move(config));

  ReplayVerdict verdict;
  auto diverge = [&](int generation, std::string detail) {
    verdict.ok = false;
    verdict.firstDivergentGeneration = generation;
    verdict.detail = std::move(detail);
    return verdict;
  };

  std::size_t logged = 0;
  for (std::size_t i = 1; i < events.size(); ++i) {
    const Json& e = events[i];
    const std::string event = e.at("event").get<std::string>();
    const int k = e.at("generationIndex").get<int>();
    try {
      if (event == "generation") {
        const auto& history = session.state().history;
        if (k < 0 || static_cast<std::size_t>(k) >= history.size()) {
          return diverge(k, "generation " + std::to_string(k) + " was not reproduced");
        }
        const Json expected = withoutTimestamp(e.at("payload"));
        const Json actual = withoutTimestamp(toJson(history[static_cast<std::size_t>(k)]));
        if (expected != actual) {
          std::string field = "record";
          for (const auto& [key, value] : expected.items()) {
            if (!actual.contains(key) || actual.at(key) != value) {
              field = key;
              break;
            }
          }
          return diverge(k, "generation " + std::to_string(k) + " differs in " + field);
        }
        ++verdict.generationsChecked;
        logged = std::max(logged, static_cast<std::size_t>(k) + 1);
      } else if (event == "selection") {
        session.select(selectionFromJson(e.at("payload")));
      } else if (event == "random_step") {
        session.stepRandom();
      } else if (event == "accepted") {
        session.accept(e.at("payload").at("candidate").get<int>());
      } else if (event == "abandoned") {
        session.abandon();
      } else {
        throw Error(ErrorCode::ParseError, "unknown event '" + event + "'");
      }
    } catch (const nlohmann::json::exception& ex) {
      throw Error(ErrorCode::ParseError, std::string("event ") + std::to_string(i) + ": " + ex.what());
    } catch (const Error& ex) {
      if (ex.code() == ErrorCode::ParseError) throw;
      return diverge(k, std::string(event) + " rejected on replay: " + ex.what());
    }
  }
  if (session.state().history.size() != logged) {
    return diverge(static_cast<int>(logged), "replay produced generations missing from the log");
  }
  return verdict;
}

}  // namespace citygen
