#include "medpoc/ordered_data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

namespace medpoc {

const char* error_kind_name(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::parse: return "parse";
    case ErrorKind::schema: return "schema";
    case ErrorKind::empty_data: return "empty-data";
    case ErrorKind::positivity: return "positivity";
    case ErrorKind::invalid_evidence: return "invalid-evidence";
    case ErrorKind::unsupported_spec: return "unsupported-spec";
    case ErrorKind::conditioning: return "conditioning";
    case ErrorKind::bootstrap_failure: return "bootstrap-failure";
    case ErrorKind::usage: return "usage";
  }
  return "unknown";
}

OrderedValue::OrderedValue(double v) : v_(normalize_level(v)) {
  if (std::isnan(v)) throw InvalidEvidenceError("NaN is not an ordered value");
}

// ---------------------------------------------------------------------------
// Interval / Evidence

Interval::Interval(std::optional<OrderedValue> lower,
                   std::optional<OrderedValue> upper, bool upper_closed)
    : lower_(lower), upper_(upper), upper_closed_(upper_closed) {
  if (lower_ && upper_) {
    if (*upper_ < *lower_) {
      throw InvalidEvidenceError("interval lower bound " +
                                 format_number(lower_->value()) +
                                 " exceeds upper bound " +
                                 format_number(upper_->value()));
    }
    if (*upper_ == *lower_ && !upper_closed_) {
      throw InvalidEvidenceError("empty interval [" +
                                 format_number(lower_->value()) + ", " +
                                 format_number(upper_->value()) + ")");
    }
  }
  if (!upper_) upper_closed_ = false;
}

double Interval::lower_threshold() const noexcept {
  return lower_ ? lower_->value() : -std::numeric_limits<double>::infinity();
}

double Interval::upper_threshold() const noexcept {
  return upper_ ? upper_->value() : std::numeric_limits<double>::infinity();
}

bool Interval::contains(double v) const noexcept {
  if (lower_ && v < lower_->value()) return false;
  if (!upper_) return true;
  return upper_closed_ ? v <= upper_->value() : v < upper_->value();
}

const char* evidence_kind_name(EvidenceKind kind) noexcept {
  switch (kind) {
    case EvidenceKind::mediator_value: return "E";
    case EvidenceKind::outcome_only: return "E'";
    case EvidenceKind::mediator_interval: return "E''";
  }
  return "?";
}

Evidence::Evidence(EvidenceKind kind, OrderedValue x_star,
                   std::optional<OrderedValue> m_star, Interval y_interval,
                   std::optional<Interval> m_interval)
    : kind_(kind),
      x_star_(x_star),
      m_star_(m_star),
      y_interval_(std::move(y_interval)),
      m_interval_(std::move(m_interval)) {}

Evidence Evidence::with_mediator_value(OrderedValue x_star, OrderedValue m_star,
                                       Interval y_interval) {
  return Evidence(EvidenceKind::mediator_value, x_star, m_star,
                  std::move(y_interval), std::nullopt);
}

Evidence Evidence::with_outcome(OrderedValue x_star, Interval y_interval) {
  return Evidence(EvidenceKind::outcome_only, x_star, std::nullopt,
                  std::move(y_interval), std::nullopt);
}

Evidence Evidence::with_mediator_interval(OrderedValue x_star,
                                          Interval m_interval,
                                          Interval y_interval) {
  return Evidence(EvidenceKind::mediator_interval, x_star, std::nullopt,
                  std::move(y_interval), std::move(m_interval));
}

Evidence Evidence::without_mediator() const {
  return with_outcome(x_star_, y_interval_);
}

// ---------------------------------------------------------------------------
// Dataset

namespace {

std::vector<double> distinct_sorted(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> normalized(std::vector<double> v) {
  for (double& e : v) e = normalize_level(e);
  return v;
}

}  // namespace

Dataset::Dataset(Schema schema, std::vector<double> x, std::vector<double> m,
                 std::vector<double> y,
                 std::vector<std::vector<double>> covariates)
    : schema_(std::move(schema)),
      x_(normalized(std::move(x))),
      m_(normalized(std::move(m))),
      y_(std::move(y)),
      covariates_(std::move(covariates)) {
  if (x_.size() != m_.size() || x_.size() != y_.size()) {
    throw SchemaError("role columns have different lengths");
  }
  if (covariates_.size() != schema_.covariates.size()) {
    throw SchemaError("covariate column count does not match the schema");
  }
  for (auto& c : covariates_) {
    if (c.size() != x_.size()) {
      throw SchemaError("covariate column length differs from role columns");
    }
    for (double& e : c) e = normalize_level(e);
  }
  if (x_.empty()) throw EmptyDataError("dataset has no rows");
  auto finite = [](double v) { return !std::isnan(v); };
  if (!std::all_of(x_.begin(), x_.end(), finite) ||
      !std::all_of(m_.begin(), m_.end(), finite) ||
      !std::all_of(y_.begin(), y_.end(), finite)) {
    throw SchemaError("role columns must not contain NaN");
  }
}

std::vector<double> Dataset::treatment_support() const {
  return distinct_sorted(x_);
}

std::vector<double> Dataset::mediator_support() const {
  return distinct_sorted(m_);
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  std::vector<double> x, m, y;
  x.reserve(rows.size());
  m.reserve(rows.size());
  y.reserve(rows.size());
  std::vector<std::vector<double>> cov(covariates_.size());
  for (auto& c : cov) c.reserve(rows.size());
  for (std::size_t r : rows) {
    x.push_back(x_.at(r));
    m.push_back(m_[r]);
    y.push_back(y_[r]);
    for (std::size_t j = 0; j < cov.size(); ++j) {
      cov[j].push_back(covariates_[j][r]);
    }
  }
  return Dataset(schema_, std::move(x), std::move(m), std::move(y),
                 std::move(cov));
}

Dataset stratify(const Dataset& d, std::span<const double> stratum) {
  if (stratum.empty()) return d;
  if (stratum.size() != d.covariate_count()) {
    throw SchemaError("stratum has " + std::to_string(stratum.size()) +
                      " values but the dataset declares " +
                      std::to_string(d.covariate_count()) + " covariates");
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < d.size(); ++i) {
    bool match = true;
    for (std::size_t j = 0; j < stratum.size() && match; ++j) {
      match = d.covariate(j)[i] == normalize_level(stratum[j]);
    }
    if (match) rows.push_back(i);
  }
  if (rows.empty()) {
    std::string desc;
    for (double v : stratum) {
      if (!desc.empty()) desc += ",";
      desc += format_number(v);
    }
    throw PositivityError("stratum C=(" + desc + ") has no rows");
  }
  return d.select(rows);
}

// ---------------------------------------------------------------------------
// CSV

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_number(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) {
    text.remove_prefix(1);
  }
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) {
    text.remove_suffix(1);
  }
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  if (std::isnan(v)) return std::nullopt;
  return v;
}

namespace {

// Splits one CSV record.  Double-quoted fields may contain commas; a doubled
// quote inside quotes is a literal quote.
std::vector<std::string> split_record(std::string_view line, std::size_t lineno) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  if (quoted) throw ParseError(lineno, "unterminated quoted field");
  fields.push_back(std::move(cur));
  return fields;
}

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

Dataset load_dataset(std::istream& in, const Schema& schema) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (lineno == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (trim(line).empty()) continue;
    header = split_record(line, lineno);
    break;
  }
  if (header.empty()) throw EmptyDataError("input has no header line");
  for (auto& h : header) h = trim(h);

  auto column_of = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw SchemaError("column '" + name + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t cx = column_of(schema.x);
  const std::size_t cm = column_of(schema.m);
  const std::size_t cy = column_of(schema.y);
  std::vector<std::size_t> cc;
  for (const auto& name : schema.covariates) cc.push_back(column_of(name));

  std::vector<double> x, m, y;
  std::vector<std::vector<double>> cov(cc.size());
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split_record(line, lineno);
    if (fields.size() != header.size()) {
      throw ParseError(lineno, "expected " + std::to_string(header.size()) +
                                   " fields, found " +
                                   std::to_string(fields.size()));
    }
    auto number = [&](std::size_t col) {
      auto v = parse_number(fields[col]);
      if (!v) {
        throw ParseError(lineno, "column '" + header[col] +
                                     "' is not numeric: '" + fields[col] + "'");
      }
      return *v;
    };
    x.push_back(number(cx));
    m.push_back(number(cm));
    y.push_back(number(cy));
    for (std::size_t j = 0; j < cc.size(); ++j) cov[j].push_back(number(cc[j]));
  }
  if (x.empty()) throw EmptyDataError("input has a header but no rows");
  return Dataset(schema, std::move(x), std::move(m), std::move(y),
                 std::move(cov));
}

Dataset load_dataset_file(const std::string& path, const Schema& schema) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file '" + path + "'");
  return load_dataset(in, schema);
}

void write_csv(std::ostream& out, const Dataset& d) {
  const Schema& s = d.schema();
  out << s.x << ',' << s.m << ',' << s.y;
  for (const auto& c : s.covariates) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << format_number(d.x()[i]) << ',' << format_number(d.m()[i]) << ','
        << format_number(d.y()[i]);
    for (std::size_t j = 0; j < d.covariate_count(); ++j) {
      out << ',' << format_number(d.covariate(j)[i]);
    }
    out << '\n';
  }
}

}  // namespace medpoc
