#pragma once

// Command-line front end. Subcommands:
//
//   run           run a benchmark, write <out>/results.csv and <out>/summary.json
//   sweep         repeat `run` over values of L, ns or ne
//   oracle-check  compare a selector against exhaustive search
//   dump-matrix   write a generated candidate matrix as CSV
//
// Exit codes: 0 success, 1 runtime failure, 2 validation failure.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "groupsel/experiment.hpp"
#include "groupsel/io.hpp"
#include "groupsel/oracle.hpp"
#include "groupsel/selection.hpp"

namespace groupsel::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitValidation = 2;

inline constexpr const char* kOutDirEnv = "GROUPSEL_OUT_DIR";

struct CliConfig {
  std::vector<std::string> methods{"greedy", "gg", "rgg", "ergg"};
  std::string objective = "e";
  std::size_t n = 1000;
  std::size_t r = 10;
  std::size_t pMax = 30;
  std::size_t trials = 50;
  std::uint64_t seed = 0;
  std::size_t groupSize = 10;
  std::size_t sketchSize = 100;
  std::size_t eliteCount = 10;
  bool sharedSketch = false;
  std::size_t threads = 1;
  double noiseVariance = 1.0;
  std::string inputPath;
  std::string outDir;
  bool noTiming = false;
  bool quiet = false;

  std::string sweepAxis;
  std::vector<std::size_t> sweepValues;

  std::size_t p = 3;  // oracle-check
  std::size_t trial = 0;  // dump-matrix
  std::string matrixOut;
};

class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::string defaultOutDir() {
  if (const char* env = std::getenv(kOutDirEnv); env && *env) return env;
  return "groupsel-out";
}

inline void addExperimentOptions(CLI::App* cmd, CliConfig& c) {
  cmd->add_option("--method", c.methods, "Selectors to run (greedy, gg, rgg, ergg)")
      ->delimiter(',')
      ->check(CLI::IsMember({"greedy", "gg", "rgg", "ergg"}))
      ->capture_default_str();
  cmd->add_option("--objective", c.objective, "Objective: d or e")
      ->check(CLI::IsMember({"d", "e", "D", "E"}))
      ->capture_default_str();
  cmd->add_option("--n", c.n, "Number of candidate sensors")->capture_default_str();
  cmd->add_option("--r", c.r, "Number of latent variables")->capture_default_str();
  cmd->add_option("--p-max", c.pMax, "Largest number of sensors")->capture_default_str();
  cmd->add_option("--trials", c.trials, "Number of random matrices")->capture_default_str();
  cmd->add_option("--seed", c.seed, "Master seed")->capture_default_str();
  cmd->add_option("--L", c.groupSize, "Group size")->capture_default_str();
  cmd->add_option("--ns", c.sketchSize, "Sketch size")->capture_default_str();
  cmd->add_option("--ne", c.eliteCount, "Elite candidates (ergg)")->capture_default_str();
  cmd->add_flag("--shared-sketch", c.sharedSketch,
                "One sketch per step shared by all group members");
  cmd->add_option("--threads", c.threads, "Worker threads for trials")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--noise-variance", c.noiseVariance,
                  "Noise variance (recorded in the summary only)")
      ->capture_default_str();
  cmd->add_option("--input", c.inputPath, "Read the candidate matrix from a CSV file");
  cmd->add_option("--out", c.outDir, "Output directory (default $GROUPSEL_OUT_DIR or groupsel-out)");
  cmd->add_flag("--no-timing", c.noTiming, "Write wallTime as 0 for reproducible output");
  cmd->add_flag("--quiet", c.quiet, "No per-trial log lines");
}

inline ExperimentConfig toExperimentConfig(const CliConfig& c) {
  ExperimentConfig cfg;
  cfg.n = c.n;
  cfg.r = c.r;
  cfg.pMax = c.pMax;
  cfg.trials = c.trials;
  cfg.masterSeed = c.seed;
  cfg.objective = parseObjectiveKind(c.objective);
  cfg.noiseVariance = c.noiseVariance;
  cfg.threads = c.threads;
  for (const auto& name : c.methods) {
    MethodSpec m;
    m.method = parseMethod(name);
    m.groupSize = c.groupSize;
    m.sketchSize = c.sketchSize;
    m.eliteCount = c.eliteCount;
    m.sharedSketch = c.sharedSketch;
    cfg.methods.push_back(m);
  }
  if (!c.inputPath.empty()) cfg.input = readMatrixFile(c.inputPath);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

inline std::filesystem::path prepareOutDir(const CliConfig& c) {
  const std::filesystem::path dir = c.outDir.empty() ? defaultOutDir() : c.outDir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir.string() +
                             "': " + ec.message());
  }
  return dir;
}

inline std::ofstream openOutput(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

inline TrialCallback progressLogger(const CliConfig& c, std::ostream& err,
                                    const std::string& tag) {
  if (c.quiet) return {};
  return [&err, tag](std::size_t done, std::size_t total) {
    err << "[" << tag << "] trial " << done << "/" << total << " done\n";
  };
}

inline void printFinalMeans(std::ostream& out, const std::vector<TrialRecord>& records) {
  bool anyOk = false;
  for (const auto& rec : records) anyOk = anyOk || rec.ok();
  if (!anyOk) return;
  const auto rows = aggregate(records);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i + 1 < rows.size() && rows[i + 1].method == rows[i].method) continue;
    out << "  " << std::left << std::setw(8) << rows[i].method
        << " k=" << rows[i].k << " mean=" << formatDouble(rows[i].mean)
        << " evals=" << rows[i].meanEvalCount
        << " time=" << rows[i].meanWallTime << "s\n";
  }
}

inline int reportFailures(const std::vector<TrialRecord>& records, std::ostream& err) {
  int failures = 0;
  for (const auto& rec : records) {
    if (!rec.ok()) {
      err << "error: " << *rec.error << '\n';
      ++failures;
    }
  }
  return failures;
}

inline int runCommand(const CliConfig& c, std::ostream& out, std::ostream& err) {
  const ExperimentConfig cfg = toExperimentConfig(c);
  const auto dir = prepareOutDir(c);
  const auto records = runExperiment(cfg, progressLogger(c, err, "run"));
  {
    auto csv = openOutput(dir / "results.csv");
    writeResultsCsv(csv, records, !c.noTiming);
  }
  {
    auto json = openOutput(dir / "summary.json");
    json << experimentJson(cfg, records, !c.noTiming).dump(2) << '\n';
  }
  out << "wrote " << (dir / "results.csv").string() << " and "
      << (dir / "summary.json").string() << '\n';
  printFinalMeans(out, records);
  return reportFailures(records, err) ? kExitRuntime : kExitOk;
}

inline int sweepCommand(const CliConfig& c, std::ostream& out, std::ostream& err) {
  if (c.sweepValues.empty()) throw ValidationError("sweep needs at least one value");
  std::vector<ExperimentConfig> configs;
  for (std::size_t value : c.sweepValues) {
    CliConfig variant = c;
    if (c.sweepAxis == "L") variant.groupSize = value;
    else if (c.sweepAxis == "ns") variant.sketchSize = value;
    else variant.eliteCount = value;
    try {
      configs.push_back(toExperimentConfig(variant));
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(e.what()) + " (sweep " + c.sweepAxis +
                            " = " + std::to_string(value) + ")");
    }
  }
  const auto dir = prepareOutDir(c);
  auto csv = openOutput(dir / "sweep.csv");
  csv << "axis,value," << kResultsHeader << '\n';
  nlohmann::json blocks = nlohmann::json::array();
  int failures = 0;
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const std::string tag = c.sweepAxis + "=" + std::to_string(c.sweepValues[i]);
    out << "== " << c.sweepAxis << " = " << c.sweepValues[i] << " ==\n";
    const auto records = runExperiment(configs[i], progressLogger(c, err, tag));
    writeResultRows(csv, records, !c.noTiming,
                    c.sweepAxis + "," + std::to_string(c.sweepValues[i]) + ",");
    nlohmann::json block = experimentJson(configs[i], records, !c.noTiming);
    block["axis"] = c.sweepAxis;
    block["value"] = c.sweepValues[i];
    blocks.push_back(std::move(block));
    printFinalMeans(out, records);
    failures += reportFailures(records, err);
  }
  auto json = openOutput(dir / "summary.json");
  json << nlohmann::json{{"axis", c.sweepAxis}, {"blocks", blocks}}.dump(2) << '\n';
  out << "wrote " << (dir / "sweep.csv").string() << '\n';
  return failures ? kExitRuntime : kExitOk;
}

inline int oracleCheckCommand(const CliConfig& c, std::ostream& out) {
  if (c.methods.size() != 1) {
    throw ValidationError("oracle-check takes exactly one --method");
  }
  CliConfig single = c;
  single.pMax = c.p;
  const ExperimentConfig cfg = toExperimentConfig(single);
  const double combinations = oracle::binomial(cfg.rows(), c.p);
  if (combinations > oracle::kMaxCombinations) {
    throw oracle::GuardExceededError(
        "refusing exhaustive search: C(" + std::to_string(cfg.rows()) + ", " +
        std::to_string(c.p) + ") = " + formatDouble(combinations) +
        " subsets exceeds the limit of 1e7");
  }
  const MethodSpec& method = cfg.methods.front();
  const bool mustBeExact =
      method.method == Method::GroupGreedy &&
      static_cast<double>(method.groupSize) >= combinations;

  bool allOk = true;
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    const CandidateMatrix u =
        cfg.input ? *cfg.input : generateCandidates(cfg.n, cfg.r, trialMatrixKey(cfg.masterSeed, t));
    const auto report = method.run(u, c.p, cfg.objective, trialSelectorSeed(cfg.masterSeed, t));
    const double value = report.objectiveCurve.back();
    const auto best = oracle::exhaustiveBest(u, c.p, cfg.objective);
    const double tol = 1e-8 * std::max(1.0, std::abs(best.value));
    const double ratio = best.value > 0.0 ? value / best.value : (value == 0.0 ? 1.0 : INFINITY);
    bool ok = value <= best.value + tol;
    if (mustBeExact) ok = ok && std::abs(value - best.value) <= tol;
    allOk = allOk && ok;
    out << "instance " << t << ": " << method.label() << "=" << formatDouble(value)
        << " optimum=" << formatDouble(best.value)
        << " ratio=" << std::setprecision(12) << ratio << std::setprecision(6)
        << (ok ? " ok" : " FAIL") << '\n';
  }
  return allOk ? kExitOk : kExitRuntime;
}

inline int dumpMatrixCommand(const CliConfig& c, std::ostream& out) {
  if (c.n < 1 || c.r < 1) throw ValidationError("n and r must be >= 1");
  const CandidateMatrix u = generateCandidates(c.n, c.r, trialMatrixKey(c.seed, c.trial));
  if (c.matrixOut.empty() || c.matrixOut == "-") {
    writeMatrixCsv(out, u);
  } else {
    writeMatrixFile(c.matrixOut, u);
  }
  return kExitOk;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  CLI::App app{"Greedy, group-greedy and randomized group-greedy sensor selection"};
  app.name("groupsel");
  app.require_subcommand(1);

  CliConfig runCfg;
  auto* runCmd = app.add_subcommand("run", "Run a benchmark experiment");
  addExperimentOptions(runCmd, runCfg);

  CliConfig sweepCfg;
  auto* sweepCmd = app.add_subcommand("sweep", "Repeat a benchmark over parameter values");
  addExperimentOptions(sweepCmd, sweepCfg);
  sweepCmd->add_option("--axis", sweepCfg.sweepAxis, "Parameter to sweep: L, ns or ne")
      ->required()
      ->check(CLI::IsMember({"L", "ns", "ne"}));
  sweepCmd->add_option("--values", sweepCfg.sweepValues, "Comma-separated values")
      ->required()
      ->delimiter(',');

  CliConfig oracleCfg;
  oracleCfg.methods = {"gg"};
  oracleCfg.n = 10;
  oracleCfg.r = 3;
  oracleCfg.trials = 1;
  auto* oracleCmd = app.add_subcommand("oracle-check", "Compare a selector with exhaustive search");
  addExperimentOptions(oracleCmd, oracleCfg);
  oracleCmd->add_option("--p", oracleCfg.p, "Number of sensors")->capture_default_str();

  CliConfig dumpCfg;
  auto* dumpCmd = app.add_subcommand("dump-matrix", "Write a generated candidate matrix as CSV");
  dumpCmd->add_option("--n", dumpCfg.n, "Number of candidate sensors")->capture_default_str();
  dumpCmd->add_option("--r", dumpCfg.r, "Number of latent variables")->capture_default_str();
  dumpCmd->add_option("--seed", dumpCfg.seed, "Master seed")->capture_default_str();
  dumpCmd->add_option("--trial", dumpCfg.trial, "Trial index whose matrix is written")
      ->capture_default_str();
  dumpCmd->add_option("--out", dumpCfg.matrixOut, "Output CSV path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  try {
    if (runCmd->parsed()) return runCommand(runCfg, out, err);
    if (sweepCmd->parsed()) return sweepCommand(sweepCfg, out, err);
    if (oracleCmd->parsed()) return oracleCheckCommand(oracleCfg, out);
    if (dumpCmd->parsed()) return dumpMatrixCommand(dumpCfg, out);
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const oracle::GuardExceededError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitRuntime;
}

}  // namespace groupsel::cli
