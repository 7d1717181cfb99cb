#include "citygen/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <thread>

#include "citygen/error.hpp"

namespace citygen {

namespace {

std::string fmt(const char* pattern, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

std::string padRight(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

std::string padLeft(std::string s, std::size_t width) {
  if (s.size() < width) s.insert(0, width - s.size(), ' ');
  return s;
}

std::string modeLabel(RunMode mode) {
  switch (mode) {
    case RunMode::Random: return "Random";
    case RunMode::IGA: return "IGA";
    case RunMode::HBGA: return "HBGA";
  }
  return "HBGA";
}

void meanSd(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  sd = 0.0;
  if (v.empty()) return;
  mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (const double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

Json summaryToJson(const ModeSummary& s) {
  Json j;
  j["mode"] = std::string(toString(s.mode));
  j["runs"] = s.runs;
  j["accepted"] = s.accepted;
  j["interactive"] = Json{{"mean", s.interactiveMean}, {"sd", s.interactiveSd}, {"median", s.interactiveMedian}};
  j["total"] = Json{{"mean", s.totalMean}, {"sd", s.totalSd}, {"median", s.totalMedian}};
  j["wallClockSeconds"] = Json{{"mean", s.wallMean}, {"sd", s.wallSd}};
  j["meanEffectiveMutationRate"] = s.mutationRateMean;
  return j;
}

}  // namespace

Json toJson(const RunStats& s) {
  Json j;
  j["mode"] = std::string(toString(s.mode));
  j["runIndex"] = s.runIndex;
  j["seed"] = s.seed;
  j["interactiveGenerations"] = s.interactiveGenerations;
  j["totalGenerations"] = s.totalGenerations;
  j["wallClockSeconds"] = s.wallClockSeconds;
  j["accepted"] = s.accepted;
  j["acceptedCandidate"] = s.acceptedCandidate ? Json(*s.acceptedCandidate) : Json(nullptr);
  j["finalScore"] = s.finalScore;
  j["meanEffectiveMutationRate"] = s.meanEffectiveMutationRate;
  return j;
}

RunStats runStatsFromJson(const Json& j) {
  try {
    RunStats s;
    s.mode = parseRunMode(j.at("mode").get<std::string>());
    s.runIndex = j.at("runIndex").get<int>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.interactiveGenerations = j.at("interactiveGenerations").get<int>();
    s.totalGenerations = j.at("totalGenerations").get<int>();
    s.wallClockSeconds = j.at("wallClockSeconds").get<double>();
    s.accepted = j.at("accepted").get<bool>();
    if (!j.at("acceptedCandidate").is_null()) s.acceptedCandidate = j.at("acceptedCandidate").get<int>();
    s.finalScore = j.at("finalScore").get<double>();
    s.meanEffectiveMutationRate = j.at("meanEffectiveMutationRate").get<double>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("run stats: ") + e.what());
  }
}

OracleRun runOracleSession(const RunConfig& config, const Brief& brief, const OracleConfig& oracle,
                           std::uint64_t oracleSeed, int cap, bool measureWallTime) {
  if (cap < 1) throw Error(ErrorCode::InvalidConfig, "generation cap must be at least 1");
  const auto start = std::chrono::steady_clock::now();
  Session session(config);
  Rng rng(oracleSeed);
  const ScoreScale scale = oracle.scale;

  OracleRun run;
  RunStats& stats = run.stats;
  stats.mode = config.mode;
  stats.seed = config.evolution.seed;
  while (true) {
    const auto& attrs = session.state().attrs;
    const AcceptanceResult check = acceptanceCheck(brief, attrs, scale);
    stats.finalScore = check.bestScore;
    if (check.accepted) {
      session.accept(check.bestIndex);
      stats.accepted = true;
      stats.acceptedCandidate = check.bestIndex;
      break;
    }
    if (session.generationIndex() + 1 >= cap) break;
    if (config.mode == RunMode::Random) {
      session.stepRandom();
    } else {
      session.select(oracleSelect(brief, attrs, oracle, rng));
    }
  }

  const auto& history = session.state().history;
  stats.totalGenerations = static_cast<int>(history.size());
  double agentSum = 0.0, bredSum = 0.0;
  int agentCount = 0, bredCount = 0;
  for (const GenerationRecord& r : history) {
    if (r.displayed) ++stats.interactiveGenerations;
    if (!r.selection) continue;
    bredSum += r.effectiveMutationRate;
    ++bredCount;
    if (r.mode == GenerationMode::Agent) {
      agentSum += r.effectiveMutationRate;
      ++agentCount;
    }
  }
  if (agentCount > 0) {
    stats.meanEffectiveMutationRate = agentSum / agentCount;
  } else if (bredCount > 0) {
    stats.meanEffectiveMutationRate = bredSum / bredCount;
  }
  if (measureWallTime) {
    stats.wallClockSeconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
  run.eventLog = session.eventLog();
  return run;
}

int agentGenerationCount(int lastIndex, const Schedule& schedule) {
  int count = 0;
  for (int k = 1; k <= lastIndex; ++k) {
    if (scheduleMode(k, schedule) == GenerationMode::Agent) ++count;
  }
  return count;
}

void ExperimentConfig::validate() const {
  if (runsPerMode < 1) throw Error(ErrorCode::InvalidConfig, "runs per mode must be at least 1");
  if (cap < 1) throw Error(ErrorCode::InvalidConfig, "generation cap must be at least 1");
  if (modes.empty()) throw Error(ErrorCode::InvalidConfig, "no modes given");
  if (!(inconsistencyRate >= 0.0 && inconsistencyRate <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "inconsistency rate must lie in [0, 1]");
  }
  if (jobs < 1) throw Error(ErrorCode::InvalidConfig, "jobs must be at least 1");
  run.validate();
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

ModeSummary summarize(RunMode mode, const std::vector<RunStats>& runs) {
  ModeSummary s;
  s.mode = mode;
  std::vector<double> interactive, total, wall, rate;
  for (const RunStats& r : runs) {
    if (r.mode != mode) continue;
    ++s.runs;
    if (r.accepted) ++s.accepted;
    interactive.push_back(r.interactiveGenerations);
    total.push_back(r.totalGenerations);
    wall.push_back(r.wallClockSeconds);
    rate.push_back(r.meanEffectiveMutationRate);
  }
  meanSd(interactive, s.interactiveMean, s.interactiveSd);
  meanSd(total, s.totalMean, s.totalSd);
  meanSd(wall, s.wallMean, s.wallSd);
  double unused = 0.0;
  meanSd(rate, s.mutationRateMean, unused);
  s.interactiveMedian = median(interactive);
  s.totalMedian = median(total);
  return s;
}

ExperimentResult runExperiment(const ExperimentConfig& config) {
  config.validate();
  struct Job {
    RunMode mode;
    int runIndex;
  };
  std::vector<Job> jobs;
  for (const RunMode mode : config.modes) {
    for (int r = 0; r < config.runsPerMode; ++r) jobs.push_back({mode, r});
  }

  OracleConfig oracle;
  oracle.inconsistencyRate = config.inconsistencyRate;
  oracle.scale = ScoreScale::from(config.run.evolution);

  std::vector<OracleRun> results(jobs.size());
  std::atomic<std::size_t> nextJob{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  auto worker = [&] {
    for (std::size_t i = nextJob++; i < jobs.size() && !failed; i = nextJob++) {
      try {
        const Job& job = jobs[i];
        RunConfig rc = config.run;
        rc.mode = job.mode;
        rc.runId = std::string(toString(job.mode)) + "-" + std::to_string(job.runIndex);
        rc.evolution.seed = deriveSeed(config.seed, {static_cast<std::uint64_t>(job.runIndex)});
        const std::uint64_t oracleSeed =
            deriveSeed(config.seed, {stream::kOracle, static_cast<std::uint64_t>(job.runIndex)});
        results[i] = runOracleSession(rc, config.brief, oracle, oracleSeed, config.cap, config.measureWallTime);
        results[i].stats.runIndex = job.runIndex;
        if (!config.keepLogs) results[i].eventLog.clear();
      } catch (...) {
        if (!failed.exchange(true)) failure = std::current_exception();
      }
    }
  };
  const int threads = std::min<int>(config.jobs, static_cast<int>(jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  ExperimentResult result;
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    result.runs.push_back(results[i].stats);
    if (config.keepLogs) {
      result.logs.emplace_back(std::string(toString(jobs[i].mode)) + "-" + std::to_string(jobs[i].runIndex),
                               std::move(results[i].eventLog));
    }
  }
  for (const RunMode mode : config.modes) result.summaries.push_back(summarize(mode, result.runs));
  return result;
}

ReportFormat parseReportFormat(std::string_view name) {
  if (name == "table") return ReportFormat::Table;
  if (name == "json") return ReportFormat::Json;
  if (name == "csv") return ReportFormat::Csv;
  throw Error(ErrorCode::InvalidConfig, "unknown report format '" + std::string(name) + "'");
}

std::string formatReport(const ExperimentConfig& config, const ExperimentResult& result, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: {
      Json j;
      j["brief"] = config.brief.name;
      j["seed"] = config.seed;
      j["runsPerMode"] = config.runsPerMode;
      j["cap"] = config.cap;
      j["inconsistencyRate"] = config.inconsistencyRate;
      j["classifier"] = std::string(toString(config.run.agent.classifierKind));
      j["wallTimeMeasured"] = config.measureWallTime;
      Json modes = Json::array();
      for (const ModeSummary& s : result.summaries) modes.push_back(summaryToJson(s));
      j["modes"] = std::move(modes);
      return j.dump(2) + "\n";
    }
    case ReportFormat::Csv: {
      std::string out =
          "mode,runs,accepted,interactive_mean,interactive_sd,interactive_median,total_mean,total_sd,"
          "total_median,wall_seconds_mean,wall_seconds_sd,mutation_rate_mean\n";
      for (const ModeSummary& s : result.summaries) {
        out += modeLabel(s.mode) + "," + std::to_string(s.runs) + "," + std::to_string(s.accepted);
        for (const double v : {s.interactiveMean, s.interactiveSd, s.interactiveMedian, s.totalMean, s.totalSd,
                               s.totalMedian, s.wallMean, s.wallSd, s.mutationRateMean}) {
          out += "," + fmt("%.6g", v);
        }
        out += "\n";
      }
      return out;
    }
    case ReportFormat::Table: {
      const std::vector<std::pair<std::string, std::size_t>> columns = {
          {"Mode", 6},
          {"# runs", 8},
          {"# accepted", 11},
          {"# generations interactive", 27},
          {"median", 8},
          {"# generations total", 21},
          {"median", 8},
          {"mean wall time [s, measured]", 30}};
      std::string out = "Brief: " + config.brief.name + "  (cap " + std::to_string(config.cap) +
                        ", inconsistency " + fmt("%.2f", config.inconsistencyRate) + ", seed " +
                        std::to_string(config.seed) + ")\n";
      std::string header, rule;
      for (std::size_t c = 0; c < columns.size(); ++c) {
        header += c == 0 ? padRight(columns[c].first, columns[c].second) : padLeft(columns[c].first, columns[c].second);
        rule += std::string(columns[c].second, '-');
      }
      out += header + "\n" + rule + "\n";
      for (const ModeSummary& s : result.summaries) {
        const std::string wall =
            config.measureWallTime ? fmt("%.3f", s.wallMean) + " (SD " + fmt("%.3f", s.wallSd) + ")" : "n/a";
        out += padRight(modeLabel(s.mode), columns[0].second);
        out += padLeft(std::to_string(s.runs), columns[1].second);
        out += padLeft(std::to_string(s.accepted), columns[2].second);
        out += padLeft(fmt("%.2f", s.interactiveMean) + " (SD " + fmt("%.2f", s.interactiveSd) + ")",
                       columns[3].second);
        out += padLeft(fmt("%.1f", s.interactiveMedian), columns[4].second);
        out += padLeft(fmt("%.2f", s.totalMean) + " (SD " + fmt("%.2f", s.totalSd) + ")", columns[5].second);
        out += padLeft(fmt("%.1f", s.totalMedian), columns[6].second);
        out += padLeft(wall, columns[7].second);
        out += "\n";
      }
      return out;
    }
  }
  return {};
}

void writeExperiment(const std::filesystem::path& out, const ExperimentConfig& config,
                     const ExperimentResult& result, ReportFormat format) {
  std::filesystem::create_directories(out);
  {
    std::ofstream runs(out / "runs.jsonl");
    for (const RunStats& s : result.runs) runs << toJson(s).dump() << '\n';
    if (!runs) throw Error(ErrorCode::NotFound, "cannot write " + (out / "runs.jsonl").string());
  }
  const char* ext = format == ReportFormat::Json ? "report.json" : format == ReportFormat::Csv ? "report.csv" : "report.txt";
  {
    std::ofstream report(out / ext);
    report << formatReport(config, result, format);
    if (!report) throw Error(ErrorCode::NotFound, "cannot write " + (out / ext).string());
  }
  if (!result.logs.empty()) {
    std::filesystem::create_directories(out / "logs");
    for (const auto& [runId, log] : result.logs) {
      std::ofstream f(out / "logs" / (runId + ".jsonl"));
      f << log;
    }
  }
}

}  // namespace citygen
