#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace medpoc {

/// How a structural node maps (parents, u) to a value, u ~ Uniform(0, 1).
///
/// Discrete forms are piecewise constant in u.  Threshold forms (logistic,
/// linear, table) put the highest level at small u:
/// level = #{j >= 1 : u < S_j(parents)} with S_j = P(node >= levels[j]).
enum class NodeForm {
  logistic,         // binary, S_1 = sigmoid(intercept + coef . parents)
  linear,           // binary, S_1 = clamp(intercept + coef . parents, 0, 1)
  table,            // survival table per parent configuration
  atoms,            // u split into atoms; a level per (configuration, atom)
  linear_gaussian,  // continuous: intercept + coef . parents + sd * z(1 - u)
};

const char* node_form_name(NodeForm f) noexcept;

struct NodeSpec {
  NodeForm form = NodeForm::logistic;
  std::vector<double> levels{0.0, 1.0};
  double intercept = 0.0;
  std::vector<double> coef;                      // one per parent
  std::vector<std::vector<double>> survival;     // [config][j - 1]
  std::vector<double> atom_mass;                 // sums to 1
  std::vector<std::vector<std::size_t>> atom_level;  // [config][atom]
  double sd = 1.0;

  bool discrete() const noexcept { return form != NodeForm::linear_gaussian; }
};

struct CovariateSpec {
  std::string name;
  std::vector<double> levels;
  std::vector<double> probs;
};

/// Piece of a discrete node's response: u in [lo, hi) gives levels[level].
struct Segment {
  double lo;
  double hi;
  std::size_t level;
};

/// Structural causal model C -> X -> M -> Y with C -> M, C -> Y, X -> Y.
///
/// Parent order: treatment (c...), mediator (x, c...), outcome (x, m, c...).
/// Table and atom configurations are mixed-radix indices over parent level
/// indices in that order, the first parent most significant.
class Scm {
 public:
  Scm(std::vector<CovariateSpec> covariates, NodeSpec treatment,
      NodeSpec mediator, NodeSpec outcome);

  static Scm paper_bernoulli();
  static nlohmann::json paper_bernoulli_json();
  static Scm from_json(const nlohmann::json& j);
  static Scm preset(const std::string& name);

  const std::vector<CovariateSpec>& covariates() const noexcept {
    return covariates_;
  }
  const NodeSpec& treatment() const noexcept { return treatment_; }
  const NodeSpec& mediator() const noexcept { return mediator_; }
  const NodeSpec& outcome() const noexcept { return outcome_; }

  /// True when every node is piecewise constant (exact methods available).
  bool discrete() const noexcept { return outcome_.discrete(); }

  std::size_t covariate_configs() const noexcept;
  /// Mixed-radix configuration of a full covariate tuple.
  std::size_t covariate_config(std::span<const double> values) const;
  std::vector<double> covariate_values(std::size_t config) const;
  double covariate_prob(std::size_t config) const;

  std::size_t treatment_level_index(double x) const;
  std::size_t mediator_level_index(double m) const;

  std::vector<Segment> treatment_segments(std::size_t cconf) const;
  std::vector<Segment> mediator_segments(std::size_t xi, std::size_t cconf) const;
  std::vector<Segment> outcome_segments(std::size_t xi, std::size_t mi,
                                        std::size_t cconf) const;

  /// Outcome value for any form (continuous included).
  double outcome_value(std::size_t xi, std::size_t mi, std::size_t cconf,
                       double u) const;
  std::size_t treatment_level(std::size_t cconf, double u) const;
  std::size_t mediator_level(std::size_t xi, std::size_t cconf, double u) const;

 private:
  std::vector<Segment> segments(const NodeSpec& node,
                                std::span<const double> parents,
                                std::size_t config) const;
  std::vector<double> parent_values(std::size_t xi, std::size_t mi,
                                    std::size_t cconf, int depth) const;

  std::vector<CovariateSpec> covariates_;
  NodeSpec treatment_;
  NodeSpec mediator_;
  NodeSpec outcome_;
};

/// Level index of u within a segment list.
std::size_t level_at(const std::vector<Segment>& segs, double u);

}  // namespace medpoc
