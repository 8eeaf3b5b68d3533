#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "medpoc/estimator.hpp"
#include "medpoc/ordered_data.hpp"

namespace medpoc::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsageOrData = 2 };

using Bound = std::optional<double>;  // absent: unbounded

struct IntervalSpec {
  Bound lower;
  Bound upper;
  bool upper_closed = false;

  Interval to_interval() const;
};

struct EvidenceSpec {
  double x = 0.0;
  std::optional<double> m;
  IntervalSpec y;  // defaults to the full range
  std::optional<IntervalSpec> m_interval;

  Evidence to_evidence() const;
};

struct QuerySpec {
  double x_base = 0.0;
  double x_alt = 1.0;
  double y = 1.0;
  std::optional<double> m;
  std::vector<double> stratum;
  Family family = Family::pns;
  std::optional<EvidenceSpec> evidence;

  Target to_target() const;
};

struct RunConfig {
  std::string command;
  std::optional<std::string> input;
  std::optional<std::string> out;
  std::string format;  // empty: command default
  std::uint64_t seed = 0;
  Schema schema;
  std::vector<QuerySpec> queries;
  std::size_t replicates = 1000;  // 0 disables the bootstrap
  double level = 0.95;
  std::string preset = "paper-bernoulli";
  std::optional<nlohmann::json> scm;  // inline model document
  std::size_t n = 1000;
  bool quick = false;
  std::string param;
  std::vector<double> values;
  std::optional<std::string> svg;
};

/// Reads a JSON config document into cfg (fields present in the document
/// replace the defaults).  Throws UsageError on malformed documents.
void apply_config_document(const nlohmann::json& doc, RunConfig& cfg);

/// Parses "L,U"; an empty side or +-inf means unbounded.
IntervalSpec parse_interval(const std::string& text, bool upper_closed);
std::vector<double> parse_list(const std::string& text);

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_simulate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Full command-line entry point.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace medpoc::cli
