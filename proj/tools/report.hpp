#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "medpoc/estimator.hpp"
#include "medpoc/uncertainty.hpp"

namespace medpoc::cli {

using ojson = nlohmann::ordered_json;

/// Number or null for absent / non-finite values.
ojson number_or_null(std::optional<double> v);

/// "23.840%" style, or "undefined".
std::string percent(std::optional<double> v);

ojson query_json(const Target& t);
ojson terms_json(const EvidenceTerms& e);

/// Per-query block: values with optional intervals, case flag, terms,
/// warnings.
ojson estimate_block(const Target& t, const Estimate& point,
                     const BootstrapResult* boot);

ojson error_block(const std::string& kind, const std::string& message);

/// Aligned text rendering of an estimate report.
std::string render_estimate_table(const ojson& report);

/// Aligned text rendering of a verify report.
std::string render_verify_table(const ojson& report);

/// Aligned text rendering of sweep rows.
std::string render_sweep_table(const ojson& report);
std::string render_sweep_csv(const ojson& report);

/// Three-line chart over the grid: first quantity solid, second dashed,
/// third dotted.
std::string render_sweep_svg(const ojson& report);

}  // namespace medpoc::cli
