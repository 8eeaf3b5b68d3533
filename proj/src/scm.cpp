#include "medpoc/scm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "medpoc/errors.hpp"
#include "medpoc/ordered_data.hpp"

namespace medpoc {

const char* node_form_name(NodeForm f) noexcept {
  switch (f) {
    case NodeForm::logistic: return "logistic";
    case NodeForm::linear: return "linear";
    case NodeForm::table: return "table";
    case NodeForm::atoms: return "atoms";
    case NodeForm::linear_gaussian: return "linear-gaussian";
  }
  return "?";
}

namespace {

constexpr double kProbTol = 1e-9;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

void check_levels(const std::vector<double>& levels, const std::string& who) {
  if (levels.empty()) throw SchemaError(who + ": no levels");
  for (double v : levels) {
    if (!std::isfinite(v)) throw SchemaError(who + ": levels must be finite");
  }
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (!(levels[i - 1] < levels[i])) {
      throw SchemaError(who + ": levels must be strictly ascending");
    }
  }
}

void check_node(const NodeSpec& n, std::size_t parents, std::size_t configs,
                const std::string& who) {
  if (n.form == NodeForm::linear_gaussian) {
    if (who != "outcome") {
      throw SchemaError(who + ": linear-gaussian form is only allowed for the outcome");
    }
    if (!(n.sd > 0.0)) throw SchemaError(who + ": sd must be positive");
    if (n.coef.size() != parents) {
      throw SchemaError(who + ": expected " + std::to_string(parents) + " coefficients");
    }
    return;
  }
  check_levels(n.levels, who);
  switch (n.form) {
    case NodeForm::logistic:
    case NodeForm::linear:
      if (n.levels.size() != 2) {
        throw SchemaError(who + ": " + node_form_name(n.form) + " form is binary");
      }
      if (n.coef.size() != parents) {
        throw SchemaError(who + ": expected " + std::to_string(parents) + " coefficients");
      }
      break;
    case NodeForm::table:
      if (n.survival.size() != configs) {
        throw SchemaError(who + ": survival table needs " + std::to_string(configs) +
                          " rows");
      }
      for (const auto& row : n.survival) {
        if (row.size() + 1 != n.levels.size()) {
          throw SchemaError(who + ": survival rows need one entry per level above the lowest");
        }
        double prev = 1.0;
        for (double s : row) {
          if (!(s >= 0.0 && s <= prev)) {
            throw SchemaError(who + ": survival values must lie in [0,1] and be nonincreasing");
          }
          prev = s;
        }
      }
      break;
    case NodeForm::atoms: {
      if (n.atom_mass.empty()) throw SchemaError(who + ": no atoms");
      double total = 0.0;
      for (double w : n.atom_mass) {
        if (!(w > 0.0)) throw SchemaError(who + ": atom masses must be positive");
        total += w;
      }
      if (std::abs(total - 1.0) > kProbTol) {
        throw SchemaError(who + ": atom masses must sum to 1");
      }
      if (n.atom_level.size() != configs) {
        throw SchemaError(who + ": atom levels need " + std::to_string(configs) + " rows");
      }
      for (const auto& row : n.atom_level) {
        if (row.size() != n.atom_mass.size()) {
          throw SchemaError(who + ": atom level rows need one entry per atom");
        }
        for (std::size_t l : row) {
          if (l >= n.levels.size()) throw SchemaError(who + ": atom level out of range");
        }
      }
      break;
    }
    case NodeForm::linear_gaussian: break;
  }
}

NodeForm parse_form(const std::string& s) {
  if (s == "logistic") return NodeForm::logistic;
  if (s == "linear") return NodeForm::linear;
  if (s == "table") return NodeForm::table;
  if (s == "atoms") return NodeForm::atoms;
  if (s == "linear-gaussian") return NodeForm::linear_gaussian;
  throw SchemaError("unknown node form '" + s + "'");
}

NodeSpec parse_node(const nlohmann::json& j) {
  NodeSpec n;
  n.form = parse_form(j.value("form", std::string("logistic")));
  if (j.contains("levels")) n.levels = j.at("levels").get<std::vector<double>>();
  n.intercept = j.value("intercept", 0.0);
  if (j.contains("coef")) n.coef = j.at("coef").get<std::vector<double>>();
  if (j.contains("survival")) {
    n.survival = j.at("survival").get<std::vector<std::vector<double>>>();
  }
  if (j.contains("atom_mass")) n.atom_mass = j.at("atom_mass").get<std::vector<double>>();
  if (j.contains("atom_level")) {
    n.atom_level = j.at("atom_level").get<std::vector<std::vector<std::size_t>>>();
  }
  n.sd = j.value("sd", 1.0);
  return n;
}

}  // namespace

Scm::Scm(std::vector<CovariateSpec> covariates, NodeSpec treatment,
         NodeSpec mediator, NodeSpec outcome)
    : covariates_(std::move(covariates)),
      treatment_(std::move(treatment)),
      mediator_(std::move(mediator)),
      outcome_(std::move(outcome)) {
  for (const auto& c : covariates_) {
    check_levels(c.levels, "covariate '" + c.name + "'");
    if (c.probs.size() != c.levels.size()) {
      throw SchemaError("covariate '" + c.name + "': one probability per level");
    }
    double total = 0.0;
    for (double p : c.probs) {
      if (!(p >= 0.0)) throw SchemaError("covariate '" + c.name + "': negative probability");
      total += p;
    }
    if (std::abs(total - 1.0) > kProbTol) {
      throw SchemaError("covariate '" + c.name + "': probabilities must sum to 1");
    }
  }
  const std::size_t k = covariates_.size();
  const std::size_t nc = covariate_configs();
  if (!treatment_.discrete() || !mediator_.discrete()) {
    throw SchemaError("treatment and mediator must be discrete");
  }
  check_node(treatment_, k, nc, "treatment");
  check_node(mediator_, k + 1, treatment_.levels.size() * nc, "mediator");
  check_node(outcome_, k + 2,
             treatment_.levels.size() * mediator_.levels.size() * nc, "outcome");
}

nlohmann::json Scm::paper_bernoulli_json() {
  return nlohmann::json{
      {"treatment", {{"form", "logistic"}, {"intercept", 0.0}, {"coef", nlohmann::json::array()}}},
      {"mediator", {{"form", "logistic"}, {"intercept", 1.0}, {"coef", {0.5}}}},
      {"outcome", {{"form", "logistic"}, {"intercept", 1.0}, {"coef", {0.5, 0.5}}}},
  };
}

Scm Scm::paper_bernoulli() { return from_json(paper_bernoulli_json()); }

Scm Scm::preset(const std::string& name) {
  if (name == "paper-bernoulli") return paper_bernoulli();
  throw UsageError("unknown preset '" + name + "' (available: paper-bernoulli)");
}

Scm Scm::from_json(const nlohmann::json& j) {
  try {
    std::vector<CovariateSpec> covs;
    if (j.contains("covariates")) {
      for (const auto& c : j.at("covariates")) {
        covs.push_back(CovariateSpec{c.value("name", std::string("c")),
                                     c.at("levels").get<std::vector<double>>(),
                                     c.at("probs").get<std::vector<double>>()});
      }
    }
    return Scm(std::move(covs), parse_node(j.at("treatment")),
               parse_node(j.at("mediator")), parse_node(j.at("outcome")));
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid SCM document: ") + e.what());
  }
}

std::size_t Scm::covariate_configs() const noexcept {
  std::size_t n = 1;
  for (const auto& c : covariates_) n *= c.levels.size();
  return n;
}

std::size_t Scm::covariate_config(std::span<const double> values) const {
  if (values.size() != covariates_.size()) {
    throw SchemaError("stratum has " + std::to_string(values.size()) +
                      " values but the model declares " +
                      std::to_string(covariates_.size()) + " covariates");
  }
  std::size_t conf = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto& lv = covariates_[i].levels;
    auto it = std::find(lv.begin(), lv.end(), normalize_level(values[i]));
    if (it == lv.end()) {
      throw PositivityError("covariate '" + covariates_[i].name +
                            "' has no level " + format_number(values[i]));
    }
    conf = conf * lv.size() + static_cast<std::size_t>(it - lv.begin());
  }
  return conf;
}

std::vector<double> Scm::covariate_values(std::size_t config) const {
  std::vector<double> out(covariates_.size());
  for (std::size_t i = covariates_.size(); i-- > 0;) {
    const auto& lv = covariates_[i].levels;
    out[i] = lv[config % lv.size()];
    config /= lv.size();
  }
  return out;
}

double Scm::covariate_prob(std::size_t config) const {
  double p = 1.0;
  for (std::size_t i = covariates_.size(); i-- > 0;) {
    const auto& c = covariates_[i];
    p *= c.probs[config % c.levels.size()];
    config /= c.levels.size();
  }
  return p;
}

std::size_t Scm::treatment_level_index(double x) const {
  const auto& lv = treatment_.levels;
  auto it = std::find(lv.begin(), lv.end(), normalize_level(x));
  if (it == lv.end()) {
    throw PositivityError("treatment level " + format_number(x) +
                          " is outside the model's support");
  }
  return static_cast<std::size_t>(it - lv.begin());
}

std::size_t Scm::mediator_level_index(double m) const {
  const auto& lv = mediator_.levels;
  auto it = std::find(lv.begin(), lv.end(), normalize_level(m));
  if (it == lv.end()) {
    throw PositivityError("mediator level " + format_number(m) +
                          " is outside the model's support");
  }
  return static_cast<std::size_t>(it - lv.begin());
}

std::vector<double> Scm::parent_values(std::size_t xi, std::size_t mi,
                                       std::size_t cconf, int depth) const {
  std::vector<double> p;
  if (depth >= 1) p.push_back(treatment_.levels[xi]);
  if (depth >= 2) p.push_back(mediator_.levels[mi]);
  auto cv = covariate_values(cconf);
  p.insert(p.end(), cv.begin(), cv.end());
  return p;
}

std::vector<Segment> Scm::segments(const NodeSpec& node,
                                   std::span<const double> parents,
                                   std::size_t config) const {
  std::vector<double> surv;
  switch (node.form) {
    case NodeForm::logistic:
    case NodeForm::linear: {
      double eta = node.intercept;
      for (std::size_t i = 0; i < parents.size(); ++i) eta += node.coef[i] * parents[i];
      surv.push_back(node.form == NodeForm::logistic ? sigmoid(eta)
                                                      : std::clamp(eta, 0.0, 1.0));
      break;
    }
    case NodeForm::table:
      surv = node.survival.at(config);
      break;
    case NodeForm::atoms: {
      std::vector<Segment> out;
      double lo = 0.0;
      const auto& row = node.atom_level.at(config);
      for (std::size_t a = 0; a < node.atom_mass.size(); ++a) {
        const double hi = a + 1 == node.atom_mass.size() ? 1.0 : lo + node.atom_mass[a];
        out.push_back(Segment{lo, hi, row[a]});
        lo = hi;
      }
      return out;
    }
    case NodeForm::linear_gaussian:
      throw UnsupportedSpecError("continuous outcome has no finite partition");
  }
  // Highest level at small u: [0, S_K) -> K, [S_{j+1}, S_j) -> j, [S_1, 1) -> 0.
  std::vector<Segment> out;
  double lo = 0.0;
  for (std::size_t j = surv.size(); j >= 1; --j) {
    const double hi = surv[j - 1];
    if (hi > lo) out.push_back(Segment{lo, hi, j});
    lo = std::max(lo, hi);
  }
  if (lo < 1.0) out.push_back(Segment{lo, 1.0, 0});
  return out;
}

std::vector<Segment> Scm::treatment_segments(std::size_t cconf) const {
  auto p = parent_values(0, 0, cconf, 0);
  return segments(treatment_, p, cconf);
}

std::vector<Segment> Scm::mediator_segments(std::size_t xi,
                                            std::size_t cconf) const {
  auto p = parent_values(xi, 0, cconf, 1);
  return segments(mediator_, p, xi * covariate_configs() + cconf);
}

std::vector<Segment> Scm::outcome_segments(std::size_t xi, std::size_t mi,
                                           std::size_t cconf) const {
  auto p = parent_values(xi, mi, cconf, 2);
  const std::size_t conf =
      (xi * mediator_.levels.size() + mi) * covariate_configs() + cconf;
  return segments(outcome_, p, conf);
}

std::size_t level_at(const std::vector<Segment>& segs, double u) {
  for (const auto& s : segs) {
    if (u < s.hi) return s.level;
  }
  return segs.back().level;
}

double Scm::outcome_value(std::size_t xi, std::size_t mi, std::size_t cconf,
                          double u) const {
  if (outcome_.form == NodeForm::linear_gaussian) {
    auto p = parent_values(xi, mi, cconf, 2);
    double mu = outcome_.intercept;
    for (std::size_t i = 0; i < p.size(); ++i) mu += outcome_.coef[i] * p[i];
    static const boost::math::normal_distribution<double> z;
    return mu + outcome_.sd * boost::math::quantile(z, 1.0 - u);
  }
  return outcome_.levels[level_at(outcome_segments(xi, mi, cconf), u)];
}

std::size_t Scm::treatment_level(std::size_t cconf, double u) const {
  return level_at(treatment_segments(cconf), u);
}

std::size_t Scm::mediator_level(std::size_t xi, std::size_t cconf,
                                double u) const {
  return level_at(mediator_segments(xi, cconf), u);
}

}  // namespace medpoc
