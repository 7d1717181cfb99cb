#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "citygen/oracle.hpp"
#include "citygen/session.hpp"

namespace citygen {

struct RunStats {
  RunMode mode = RunMode::HBGA;
  int runIndex = 0;
  std::uint64_t seed = 0;
  int interactiveGenerations = 0;  // populations displayed to the oracle
  int totalGenerations = 0;        // populations produced, the seed population included
  double wallClockSeconds = 0.0;
  bool accepted = false;
  std::optional<int> acceptedCandidate;
  double finalScore = 0.0;
  // Mean over agent generations, or over all bred generations when the run has none.
  double meanEffectiveMutationRate = 0.0;
};

Json toJson(const RunStats& s);
RunStats runStatsFromJson(const Json& j);

struct OracleRun {
  RunStats stats;
  std::string eventLog;
};

// Drives one session with the simulated user until the displayed population
// holds a candidate meeting the brief or the run reaches `cap` generations.
OracleRun runOracleSession(const RunConfig& config, const Brief& brief, const OracleConfig& oracle,
                           std::uint64_t oracleSeed, int cap = 150, bool measureWallTime = true);

// Number of agent generations among schedule indices 1..lastIndex. For a run
// with T populations (seed included) and I displayed ones, T - I equals
// agentGenerationCount(T - 1).
int agentGenerationCount(int lastIndex, const Schedule& schedule);

struct ExperimentConfig {
  Brief brief;
  std::vector<RunMode> modes = {RunMode::IGA, RunMode::HBGA};
  int runsPerMode = 30;
  std::uint64_t seed = 1;
  int cap = 150;
  double inconsistencyRate = 0.1;
  // Template for every run; runId, mode and evolution.seed are overwritten.
  RunConfig run;
  int jobs = 1;
  bool measureWallTime = true;
  bool keepLogs = false;

  void validate() const;
};

struct ModeSummary {
  RunMode mode = RunMode::HBGA;
  int runs = 0;
  int accepted = 0;
  double interactiveMean = 0.0, interactiveSd = 0.0, interactiveMedian = 0.0;
  double totalMean = 0.0, totalSd = 0.0, totalMedian = 0.0;
  double wallMean = 0.0, wallSd = 0.0;
  double mutationRateMean = 0.0;
};

struct ExperimentResult {
  std::vector<RunStats> runs;  // grouped by mode in configured order, then by run index
  std::vector<ModeSummary> summaries;
  std::vector<std::pair<std::string, std::string>> logs;  // runId, event log; when keepLogs
};

// Run r of every mode shares the evolution seed and the oracle seed, so modes
// are compared on paired starting populations.
ExperimentResult runExperiment(const ExperimentConfig& config);

// Sample standard deviation (n - 1); 0 for fewer than two values.
ModeSummary summarize(RunMode mode, const std::vector<RunStats>& runs);

double median(std::vector<double> values);

enum class ReportFormat { Table, Json, Csv };

ReportFormat parseReportFormat(std::string_view name);

std::string formatReport(const ExperimentConfig& config, const ExperimentResult& result, ReportFormat format);

// Writes runs.jsonl, report.{txt,json,csv} and, when logs were kept, logs/<runId>.jsonl.
void writeExperiment(const std::filesystem::path& out, const ExperimentConfig& config,
                     const ExperimentResult& result, ReportFormat format);

}  // namespace citygen
