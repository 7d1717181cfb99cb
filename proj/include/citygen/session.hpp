#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "citygen/agent.hpp"
#include "citygen/evolution.hpp"
#include "citygen/features.hpp"
#include "citygen/render.hpp"

namespace citygen {

enum class RunMode { Random, IGA, HBGA };
enum class GenerationMode { Interactive, Agent, Random };
enum class RunStatus { AwaitingSelection, Computing, Accepted, Abandoned };

std::string_view toString(RunMode mode);
RunMode parseRunMode(std::string_view name);
std::string_view toString(GenerationMode mode);
GenerationMode parseGenerationMode(std::string_view name);
std::string_view toString(RunStatus status);

// Hand-over plan between the human and the agent: an interactive prefix, an
// alternating window that opens with the agent, then blocks of agentBlock
// agent generations each followed by one interactive generation.
struct Schedule {
  int interactivePrefix = 10;
  int alternatingWindow = 10;
  int agentBlock = 9;

  void validate() const;
};

// Mode of the selection that produces generation `generationIndex` (>= 1).
GenerationMode scheduleMode(int generationIndex, const Schedule& s);

struct RunConfig {
  std::string runId = "run-0";
  RunMode mode = RunMode::HBGA;
  EvolutionConfig evolution;
  AgentConfig agent;
  Schedule schedule;
  ViewConfig view;
  // Render displayed populations to PNG; headless experiments switch it off.
  bool render = true;

  void validate() const;
};

Json toJson(const RunConfig& config);
RunConfig runConfigFromJson(const Json& j);

// One entry per population. Record k describes population k: the selection
// made on population k - 1 that bred it (absent for randomly generated
// populations), its attributes, and its content hashes.
struct GenerationRecord {
  int generationIndex = 0;
  GenerationMode mode = GenerationMode::Random;
  std::optional<ParentSelection> selection;
  std::vector<CandidateAttributes> attrs;
  std::optional<double> meanConfidence;
  double effectiveMutationRate = 0.0;
  std::string populationHash;
  // True when the population was shown to the user for a decision.
  bool displayed = false;
  std::vector<std::string> renderHashes;
  std::optional<Json> model;
  std::int64_t timestampMs = 0;

  // Everything except the wall-clock timestamp.
  bool sameContent(const GenerationRecord& other) const;
};

Json toJson(const GenerationRecord& r);
GenerationRecord generationRecordFromJson(const Json& j);

struct RunState {
  RunConfig config;
  Population population;
  std::vector<CandidateAttributes> attrs;  // of the current population
  TrainingSet trainingSet;
  std::vector<GenerationRecord> history;
  RunStatus status = RunStatus::Computing;
  std::optional<int> acceptedCandidate;
  int renderCount = 0;
};

// Receives every rendered PNG keyed by its content hash.
using ImageSink = std::function<void(const std::string& hash, std::vector<std::uint8_t> png)>;

// One run's state machine. Every mutation is appended to an event log that
// replays to the same state.
class Session {
 public:
  explicit Session(RunConfig config, ImageSink sink = {});

  const RunState& state() const noexcept { return state_; }
  const RunConfig& config() const noexcept { return state_.config; }
  int generationIndex() const noexcept { return state_.population.generationIndex; }

  // Mode of the next generation to be produced.
  GenerationMode nextMode() const;
  // Index of the population that will be displayed after the next human
  // selection, running through any agent block in between.
  int nextDisplayIndex() const;

  // Human (or oracle) selection on the displayed population: records the
  // training instances, breeds at the base rate and, when the schedule hands
  // over to the agent, runs the agent block before displaying again.
  void select(const ParentSelection& sel);

  void stepInteractive(const ParentSelection& sel);
  void stepAgentBlock();
  void stepRandom();

  void accept(int candidate);
  void abandon();

  // Throws WrongState, WrongMode or InvalidSelection if select(sel) would.
  void checkSelection(const ParentSelection& sel) const;
  // Marks the run Computing ahead of an asynchronous select().
  void beginComputing();

  const std::vector<Json>& events() const noexcept { return events_; }
  std::string eventLog() const;

 private:
  void requireAwaiting(std::string_view action) const;
  void appendRecord(Population next, GenerationMode mode, std::optional<ParentSelection> sel,
                    double rate);
  void runAgentBlocks();
  void display();
  void emit(std::string_view event, int generationIndex, Json payload);
  void flushGenerations();

  RunState state_;
  ImageSink sink_;
  std::vector<Json> events_;
  bool selectionInFlight_ = false;
  std::size_t emittedRecords_ = 0;
};

struct ReplayVerdict {
  bool ok = true;
  std::optional<int> firstDivergentGeneration;
  std::string detail;
  int generationsChecked = 0;
};

// Parses a JSONL event log. Throws ParseError for a malformed log.
std::vector<Json> parseEventLog(std::string_view text);

// Rebuilds the run from its config and recorded inputs, comparing every
// generation against the log.
ReplayVerdict replayLog(const std::vector<Json>& events);

}  // namespace citygen
