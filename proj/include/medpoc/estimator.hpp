#pragma once

#include <optional>
#include <string>
#include <vector>

#include "medpoc/ecdf.hpp"
#include "medpoc/identify.hpp"
#include "medpoc/ordered_data.hpp"

namespace medpoc {

enum class Family { pns, pn, ps };

const char* family_name(Family f) noexcept;
Family parse_family(const std::string& s);

/// Which identification operation to run, with its query (and evidence).
struct Target {
  Family family = Family::pns;
  Query query;
};

struct NamedValue {
  std::string name;
  std::optional<double> value;  // absent: undefined (e.g. proportion at t = 0)
};

struct Estimate {
  std::vector<NamedValue> values;
  CaseFlag case_flag = CaseFlag::unconditional;
  std::optional<EvidenceTerms> terms;
  std::vector<std::string> warnings;

  std::optional<double> get(const std::string& name) const;
};

/// Runs the target's identification operation on a distribution model.
Estimate evaluate(const CdfProvider& model, const Target& target);

/// Stratifies d by the query's stratum and evaluates on the empirical CDFs.
Estimate estimate(const Dataset& d, const Target& target);

}  // namespace medpoc
