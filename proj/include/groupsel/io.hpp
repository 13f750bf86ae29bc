#pragma once

// File formats.
//
// Matrix CSV: one candidate row per line, r comma-separated values printed
// with 17 significant digits so that a write/read cycle is bit-exact.
// Results CSV: header `method,trial,k,objective,evalCount,wallTime`, one
// row per (trial, method, k); evalCount and wallTime are cumulative through
// step k. Summary JSON: config echo, seed and the aggregate table.

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "groupsel/experiment.hpp"
#include "groupsel/objective.hpp"

namespace groupsel {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string formatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void writeMatrixCsv(std::ostream& out, const CandidateMatrix& u) {
  for (Index i = 0; i < u.rows(); ++i) {
    for (Index j = 0; j < u.cols(); ++j) {
      if (j) out << ',';
      out << formatDouble(u(i, j));
    }
    out << '\n';
  }
}

inline CandidateMatrix readMatrixCsv(std::istream& in) {
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::size_t fields = 0;
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      std::string_view field = rest.substr(0, comma);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) field.remove_suffix(1);
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc{} || ptr != field.data() + field.size() || field.empty()) {
        throw InputError("matrix CSV line " + std::to_string(lineNo) +
                         ": cannot parse '" + std::string(field) + "'");
      }
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      throw InputError("matrix CSV line " + std::to_string(lineNo) + " has " +
                       std::to_string(fields) + " columns, expected " +
                       std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw InputError("matrix CSV is empty");
  RowMatrix data(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), data.data());
  try {
    return CandidateMatrix(std::move(data));
  } catch (const std::domain_error& e) {
    throw InputError(std::string("matrix CSV: ") + e.what());
  }
}

inline CandidateMatrix readMatrixFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read input matrix file '" + path + "'");
  return readMatrixCsv(in);
}

inline void writeMatrixFile(const std::string& path, const CandidateMatrix& u) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write matrix file '" + path + "'");
  writeMatrixCsv(out, u);
}

inline constexpr std::string_view kResultsHeader =
    "method,trial,k,objective,evalCount,wallTime";

// With includeTiming == false the wallTime column is written as 0, which
// makes the file a pure function of (config, seed).
inline void writeResultRows(std::ostream& out, const std::vector<TrialRecord>& records,
                            bool includeTiming, std::string_view prefix = {}) {
  for (const auto& rec : records) {
    if (!rec.ok()) continue;
    for (std::size_t k = 0; k < rec.objectiveCurve.size(); ++k) {
      out << prefix << rec.method << ',' << rec.trialIndex << ',' << (k + 1)
          << ',' << formatDouble(rec.objectiveCurve[k]) << ','
          << rec.evalsThroughStep[k] << ','
          << (includeTiming ? formatDouble(rec.secondsThroughStep[k]) : "0")
          << '\n';
    }
  }
}

inline void writeResultsCsv(std::ostream& out, const std::vector<TrialRecord>& records,
                            bool includeTiming = true) {
  out << kResultsHeader << '\n';
  writeResultRows(out, records, includeTiming);
}

inline nlohmann::json methodJson(const MethodSpec& m) {
  nlohmann::json j{{"method", methodName(m.method)}, {"label", m.label()}};
  if (m.method != Method::Greedy) j["L"] = m.groupSize;
  if (m.method == Method::Randomized || m.method == Method::EliteRandomized) {
    j["ns"] = m.sketchSize;
    j["sharedSketch"] = m.sharedSketch;
  }
  if (m.method == Method::EliteRandomized) {
    j["ne"] = m.eliteCount;
    j["nr"] = m.sketchSize - m.eliteCount;
  }
  return j;
}

inline nlohmann::json configJson(const ExperimentConfig& cfg) {
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : cfg.methods) methods.push_back(methodJson(m));
  return {{"n", cfg.rows()},
          {"r", cfg.cols()},
          {"pMax", cfg.pMax},
          {"trials", cfg.trials},
          {"masterSeed", cfg.masterSeed},
          {"objective", std::string(toString(cfg.objective))},
          {"noiseVariance", cfg.noiseVariance},
          {"threads", cfg.threads},
          {"inputMatrix", cfg.input.has_value()},
          {"methods", methods}};
}

inline nlohmann::json summaryJson(const std::vector<SummaryRow>& rows,
                                  bool includeTiming = true) {
  nlohmann::json table = nlohmann::json::array();
  for (const auto& row : rows) {
    table.push_back({{"method", row.method},
                     {"k", row.k},
                     {"samples", row.samples},
                     {"mean", row.mean},
                     {"geometricMean", row.geometricMean},
                     {"std", row.stddev},
                     {"min", row.min},
                     {"max", row.max},
                     {"meanWallTime", includeTiming ? row.meanWallTime : 0.0},
                     {"meanEvalCount", row.meanEvalCount}});
  }
  return table;
}

inline nlohmann::json experimentJson(const ExperimentConfig& cfg,
                                     const std::vector<TrialRecord>& records,
                                     bool includeTiming = true) {
  nlohmann::json failures = nlohmann::json::array();
  for (const auto& rec : records) {
    if (!rec.ok()) failures.push_back(*rec.error);
  }
  nlohmann::json j{{"config", configJson(cfg)},
                   {"seed", cfg.masterSeed},
                   {"failures", failures}};
  bool anyOk = false;
  for (const auto& rec : records) anyOk = anyOk || rec.ok();
  j["summary"] = anyOk ? summaryJson(aggregate(records), includeTiming)
                       : nlohmann::json::array();
  return j;
}

}  // namespace groupsel
