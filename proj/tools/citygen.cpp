// Command-line front end: oracle experiments, log replay, tree inspection,
// single renders and the HTTP service.

#include <CLI11.hpp>
#include <httplib.h>

#include <fstream>
#include <iostream>
#include <sstream>

#include "citygen/error.hpp"
#include "citygen/experiment.hpp"
#include "citygen/hash.hpp"
#include "citygen/service.hpp"
#include "citygen/tree.hpp"

using namespace citygen;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitMismatch = 3;

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::NotFound, "cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

RunConfig loadRunConfig(const std::string& path) {
  if (path.empty()) return {};
  const Json j = Json::parse(readFile(path), nullptr, false);
  if (j.is_discarded()) throw Error(ErrorCode::ParseError, path + " is not valid JSON");
  return runConfigFromJson(j);
}

std::vector<RunMode> parseModes(const std::string& list) {
  std::vector<RunMode> modes;
  std::stringstream in(list);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) modes.push_back(parseRunMode(item));
  }
  return modes;
}

struct ExperimentArgs {
  std::string brief, modes = "IGA,HBGA", out, format = "table", config, classifier;
  int runs = 30, cap = 150, jobs = 1;
  std::uint64_t seed = 1;
  double inconsistency = 0.1;
  bool noWallTime = false, logs = false;
};

int cmdExperiment(const ExperimentArgs& a) {
  ExperimentConfig cfg;
  cfg.brief = loadBrief(a.brief);
  cfg.modes = parseModes(a.modes);
  cfg.runsPerMode = a.runs;
  cfg.seed = a.seed;
  cfg.cap = a.cap;
  cfg.inconsistencyRate = a.inconsistency;
  cfg.jobs = a.jobs;
  cfg.measureWallTime = !a.noWallTime;
  cfg.keepLogs = a.logs;
  cfg.run = loadRunConfig(a.config);
  cfg.run.render = false;
  if (!a.classifier.empty()) cfg.run.agent.classifierKind = parseClassifierKind(a.classifier);
  const ReportFormat format = parseReportFormat(a.format);
  cfg.validate();
  if (cfg.keepLogs && a.out.empty()) throw Error(ErrorCode::InvalidConfig, "--logs needs --out");

  const ExperimentResult result = runExperiment(cfg);
  std::cout << formatReport(cfg, result, format);
  if (!a.out.empty()) writeExperiment(a.out, cfg, result, format);
  return 0;
}

int cmdReplay(const std::string& path) {
  const std::vector<Json> events = parseEventLog(readFile(path));
  const ReplayVerdict verdict = replayLog(events);
  if (verdict.ok) {
    std::cout << "ok: " << verdict.generationsChecked << " generations reproduced\n";
    return 0;
  }
  std::cout << "mismatch at generation " << verdict.firstDivergentGeneration.value_or(-1) << ": " << verdict.detail
            << "\n";
  return kExitMismatch;
}

int cmdInspectTree(const std::string& path, int generation, const std::string& format) {
  const std::vector<Json> events = parseEventLog(readFile(path));
  for (const Json& e : events) {
    if (e.at("event") != "generation" || e.at("generationIndex") != generation) continue;
    const Json& model = e.at("payload").at("model");
    if (model.is_null()) break;
    if (format == "json") {
      std::cout << model.dump(2) << "\n";
    } else if (model.value("kind", "") == "tree") {
      std::cout << formatTree(treeFromJson(model));
    } else {
      std::cout << model.dump(2) << "\n";
    }
    return 0;
  }
  std::cerr << "no model at generation " << generation
            << " (models exist only for agent generations with a two-class training set)\n";
  return kExitConfig;
}

int cmdRender(const std::string& configPath, const std::string& genomePath, std::uint64_t seed,
              const std::string& projection, const std::string& out) {
  RunConfig cfg = loadRunConfig(configPath);
  if (!projection.empty()) cfg.view.projection = parseProjection(projection);
  CityGenome genome;
  if (!genomePath.empty()) {
    genome = genomeFromJson(Json::parse(readFile(genomePath)));
  } else {
    cfg.evolution.seed = seed;
    Rng rng(deriveSeed(seed, {stream::kSeedPopulation, 0}));
    genome = randomGenome(cfg.evolution, rng);
  }
  const std::vector<std::uint8_t> png = encodePng(renderGenome(genome, cfg.view));
  std::ofstream f(out, std::ios::binary);
  f.write(reinterpret_cast<const char*>(png.data()), static_cast<std::streamsize>(png.size()));
  if (!f) throw Error(ErrorCode::NotFound, "cannot write " + out);
  std::cout << out << " " << sha256Hex(png) << "\n";
  return 0;
}

int cmdServe(const std::string& host, int port, const std::string& configPath) {
  ServiceOptions options;
  options.defaults = loadRunConfig(configPath);
  Service service(options);
  httplib::Server server;
  service.mount(server);
  std::cout << "listening on http://" << host << ":" << port << "\n" << std::flush;
  if (!server.listen(host, port)) {
    std::cerr << "cannot listen on " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"citygen: evolutionary city generation with a learning selection agent"};
  app.require_subcommand(1);

  ExperimentArgs ex;
  auto* experiment = app.add_subcommand("experiment", "run seeded oracle batches and report statistics");
  experiment->add_option("--brief", ex.brief, "brief JSON file")->required();
  experiment->add_option("--modes", ex.modes, "comma-separated modes: Random, IGA, HBGA");
  experiment->add_option("--runs", ex.runs, "runs per mode");
  experiment->add_option("--seed", ex.seed, "root seed");
  experiment->add_option("--cap", ex.cap, "generation cap per run");
  experiment->add_option("--out", ex.out, "output directory");
  experiment->add_option("--format", ex.format, "table, json or csv");
  experiment->add_option("--config", ex.config, "run config JSON used as the template for every run");
  experiment->add_option("--inconsistency", ex.inconsistency, "oracle inconsistency rate");
  experiment->add_option("--classifier", ex.classifier, "tree or bayes");
  experiment->add_option("--jobs", ex.jobs, "worker threads");
  experiment->add_flag("--no-wall-time", ex.noWallTime, "record zero wall time so reports are byte-identical");
  experiment->add_flag("--logs", ex.logs, "write per-run event logs under OUT/logs");

  std::string replayLogPath;
  auto* replay = app.add_subcommand("replay", "replay a run log and verify every generation");
  replay->add_option("log", replayLogPath, "run log (JSONL)")->required();

  std::string treeLog, treeFormat = "text";
  int treeGeneration = 0;
  auto* inspect = app.add_subcommand("inspect-tree", "print the agent model stored at a generation");
  inspect->add_option("log", treeLog, "run log (JSONL)")->required();
  inspect->add_option("--generation", treeGeneration, "generation index")->required();
  inspect->add_option("--format", treeFormat, "text or json");

  std::string renderConfig, renderGenome, renderProjection, renderOut = "city.png";
  std::uint64_t renderSeed = 1;
  auto* render = app.add_subcommand("render", "render one genome to PNG");
  render->add_option("--config", renderConfig, "run config JSON");
  render->add_option("--genome", renderGenome, "genome JSON; a random genome when omitted");
  render->add_option("--seed", renderSeed, "seed for the random genome");
  render->add_option("--projection", renderProjection, "isometric or topdown");
  render->add_option("--out", renderOut, "output PNG");

  std::string host = "127.0.0.1", serveConfig;
  int port = 8080;
  auto* serve = app.add_subcommand("serve", "serve the HTTP API");
  serve->add_option("--host", host, "bind address")->capture_default_str();
  serve->add_option("--port", port, "TCP port")->capture_default_str();
  serve->add_option("--config", serveConfig, "default run config JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*experiment) return cmdExperiment(ex);
    if (*replay) return cmdReplay(replayLogPath);
    if (*inspect) return cmdInspectTree(treeLog, treeGeneration, treeFormat);
    if (*render) return cmdRender(renderConfig, renderGenome, renderSeed, renderProjection, renderOut);
    if (*serve) return cmdServe(host, port, serveConfig);
  } catch (const Error& e) {
    std::cerr << "error (" << errorCodeName(e.code()) << "): " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return 0;
}
