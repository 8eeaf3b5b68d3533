#pragma once

#include <compare>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "medpoc/errors.hpp"

namespace medpoc {

/// A scalar drawn from a totally ordered numeric domain.
///
/// NaN is rejected at construction and -0.0 is folded into +0.0, so the
/// numeric order on the stored value is a total order and equality is exact.
class OrderedValue {
 public:
  constexpr OrderedValue() = default;
  explicit OrderedValue(double v);

  double value() const noexcept { return v_; }

  friend bool operator==(OrderedValue a, OrderedValue b) noexcept {
    return a.v_ == b.v_;
  }
  friend std::strong_ordering operator<=>(OrderedValue a,
                                          OrderedValue b) noexcept {
    if (a.v_ < b.v_) return std::strong_ordering::less;
    if (b.v_ < a.v_) return std::strong_ordering::greater;
    return std::strong_ordering::equal;
  }

 private:
  double v_ = 0.0;
};

/// Folds -0.0 into +0.0; the form every treatment/mediator lookup uses.
inline double normalize_level(double v) noexcept { return v == 0.0 ? 0.0 : v; }

/// Interval over an ordered domain: lower bound is always inclusive and may be
/// -inf (absent); upper bound may be +inf (absent) and is open unless
/// `upper_closed`.  A point [v, v] must be closed; [v, v) is empty and
/// rejected.
class Interval {
 public:
  Interval(std::optional<OrderedValue> lower, std::optional<OrderedValue> upper,
           bool upper_closed);

  static Interval full() { return Interval(std::nullopt, std::nullopt, false); }
  static Interval point(double v) {
    return Interval(OrderedValue(v), OrderedValue(v), true);
  }

  const std::optional<OrderedValue>& lower() const noexcept { return lower_; }
  const std::optional<OrderedValue>& upper() const noexcept { return upper_; }
  bool upper_closed() const noexcept { return upper_closed_; }
  bool is_full() const noexcept { return !lower_ && !upper_; }

  /// Lower bound as a threshold; -inf when unbounded.
  double lower_threshold() const noexcept;
  /// Upper bound as a threshold; +inf when unbounded.
  double upper_threshold() const noexcept;

  bool contains(double v) const noexcept;

 private:
  std::optional<OrderedValue> lower_;
  std::optional<OrderedValue> upper_;
  bool upper_closed_;
};

enum class EvidenceKind {
  mediator_value,     // (x*, m*, I_Y)
  outcome_only,       // (x*, I_Y)
  mediator_interval,  // (x*, I_M, I_Y)
};

const char* evidence_kind_name(EvidenceKind kind) noexcept;

class Evidence {
 public:
  static Evidence with_mediator_value(OrderedValue x_star, OrderedValue m_star,
                                      Interval y_interval);
  static Evidence with_outcome(OrderedValue x_star, Interval y_interval);
  static Evidence with_mediator_interval(OrderedValue x_star,
                                         Interval m_interval,
                                         Interval y_interval);

  EvidenceKind kind() const noexcept { return kind_; }
  OrderedValue x_star() const noexcept { return x_star_; }
  const std::optional<OrderedValue>& m_star() const noexcept { return m_star_; }
  const Interval& y_interval() const noexcept { return y_interval_; }
  const std::optional<Interval>& m_interval() const noexcept {
    return m_interval_;
  }

  /// The same evidence with the mediator information dropped (kind E -> E').
  Evidence without_mediator() const;

 private:
  Evidence(EvidenceKind kind, OrderedValue x_star,
           std::optional<OrderedValue> m_star, Interval y_interval,
           std::optional<Interval> m_interval);

  EvidenceKind kind_;
  OrderedValue x_star_;
  std::optional<OrderedValue> m_star_;
  Interval y_interval_;
  std::optional<Interval> m_interval_;
};

struct Query {
  OrderedValue x_base;       // x'
  OrderedValue x_alt;        // x
  OrderedValue y_threshold;  // y
  std::optional<OrderedValue> m_fixed;
  std::vector<double> stratum;  // empty: C = {} (no conditioning)
  std::optional<Evidence> evidence;
};

/// Column names for each role.  Covariates are optional and discrete.
struct Schema {
  std::string x = "x";
  std::string m = "m";
  std::string y = "y";
  std::vector<std::string> covariates;

  friend bool operator==(const Schema&, const Schema&) = default;
};

/// Immutable columnar table of (treatment, mediator, outcome, covariates).
class Dataset {
 public:
  Dataset(Schema schema, std::vector<double> x, std::vector<double> m,
          std::vector<double> y,
          std::vector<std::vector<double>> covariates = {});

  std::size_t size() const noexcept { return x_.size(); }
  const Schema& schema() const noexcept { return schema_; }

  std::span<const double> x() const noexcept { return x_; }
  std::span<const double> m() const noexcept { return m_; }
  std::span<const double> y() const noexcept { return y_; }
  std::size_t covariate_count() const noexcept { return covariates_.size(); }
  std::span<const double> covariate(std::size_t i) const {
    return covariates_.at(i);
  }

  /// Sorted distinct treatment values.
  std::vector<double> treatment_support() const;
  /// Sorted distinct mediator values.
  std::vector<double> mediator_support() const;

  /// Rows at the given indices, in the given order (indices may repeat).
  Dataset select(std::span<const std::size_t> rows) const;

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  Schema schema_;
  std::vector<double> x_;
  std::vector<double> m_;
  std::vector<double> y_;
  std::vector<std::vector<double>> covariates_;
};

/// Parses comma-separated text with a header line.  Only role columns are
/// parsed as numbers; other columns are ignored.
Dataset load_dataset(std::istream& in, const Schema& schema);
Dataset load_dataset_file(const std::string& path, const Schema& schema);

/// Writes the role columns (header from the schema) with round-trip precision.
void write_csv(std::ostream& out, const Dataset& d);

/// Rows whose covariates equal `stratum` exactly.  An empty stratum returns
/// the dataset unchanged.
Dataset stratify(const Dataset& d, std::span<const double> stratum);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Locale-independent number parse; accepts "inf"/"-inf".
std::optional<double> parse_number(std::string_view text);

}  // namespace medpoc
