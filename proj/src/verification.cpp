#include "medpoc/verification.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "medpoc/ecdf.hpp"
#include "medpoc/estimator.hpp"
#include "medpoc/identify.hpp"
#include "medpoc/oracle.hpp"
#include "medpoc/uncertainty.hpp"

namespace medpoc {

namespace {

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

std::string fmt(double v, int digits = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(digits);
  os << v;
  return os.str();
}

std::string sci(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::scientific << v;
  return os.str();
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

Query preset_query() {
  Query q;
  q.x_base = OrderedValue(0.0);
  q.x_alt = OrderedValue(1.0);
  q.y_threshold = OrderedValue(1.0);
  return q;
}

VerifyRow row(std::string name, std::optional<double> truth,
              std::optional<double> est, double tol) {
  VerifyRow r;
  r.quantity = std::move(name);
  r.truth = truth;
  r.estimate = est;
  r.tolerance = tol;
  r.passed = truth && est && std::abs(*truth - *est) <= tol;
  return r;
}

bool all_rows_pass(const std::vector<VerifyRow>& rows) {
  return std::all_of(rows.begin(), rows.end(),
                     [](const VerifyRow& r) { return r.passed; });
}

std::vector<double> desc_uniforms(Rng& rng, std::size_t k, double lo, double hi) {
  std::vector<double> v(k);
  for (auto& e : v) e = lo + (hi - lo) * rng.uniform();
  std::sort(v.begin(), v.end(), std::greater<>());
  return v;
}

std::vector<double> level_values(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  if (rng.uniform() < 0.5) {
    for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  } else {
    double acc = std::floor(rng.uniform() * 5.0) - 2.0;
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = acc;
      acc += 0.5 + std::floor(rng.uniform() * 4.0) * 0.5;
    }
  }
  return v;
}

std::vector<CovariateSpec> maybe_covariate(Rng& rng) {
  if (rng.uniform() >= 0.3) return {};
  const double p = 0.2 + 0.6 * rng.uniform();
  return {CovariateSpec{"c", {0.0, 1.0}, {p, 1.0 - p}}};
}

NodeSpec table_node(std::vector<double> levels,
                    std::vector<std::vector<double>> survival) {
  NodeSpec n;
  n.form = NodeForm::table;
  n.levels = std::move(levels);
  n.survival = std::move(survival);
  return n;
}

NodeSpec random_treatment(Rng& rng, std::size_t nx, std::size_t nc,
                          std::vector<double> levels) {
  std::vector<std::vector<double>> surv;
  for (std::size_t c = 0; c < nc; ++c) surv.push_back(desc_uniforms(rng, nx - 1, 0.1, 0.9));
  return table_node(std::move(levels), std::move(surv));
}

}  // namespace

PresetClosedForm preset_closed_form() {
  const double s1 = sigmoid(1.0);
  const double s15 = sigmoid(1.5);
  const double s2 = sigmoid(2.0);
  PresetClosedForm f{};
  // P(Y = 1 | x, m) = sigmoid(1 + (x + m) / 2); P(M = 1 | x) = sigmoid(1 + x / 2).
  f.a = 1.0 - (s1 * s15 + (1.0 - s1) * s1);
  f.b = 1.0 - (s15 * s2 + (1.0 - s15) * s15);
  f.rho = s15 * (1.0 - s15) + (1.0 - s15) * (1.0 - s1);
  f.t = f.a - f.b;
  f.nd = std::min(f.a, f.rho) - f.b;
  f.ni = f.a - std::max(f.b, f.rho);
  const double not_b = 1.0 - f.b;
  f.pn = f.t / not_b;
  f.nd_pn = f.nd / not_b;
  f.ni_pn = f.ni / not_b;
  f.ps = f.t / f.a;
  f.nd_ps = f.nd / f.a;
  f.ni_ps = f.ni / f.a;
  f.cd = s2 - s15;
  f.cd_evidence = f.cd / s2;
  return f;
}

// ---------------------------------------------------------------------------
// Generators

Scm random_threshold_scm(Rng& rng) {
  const std::size_t nx = 2 + rng.below(2);
  const std::size_t nm = 2 + rng.below(2);
  const std::size_t ny = 2 + rng.below(3);
  auto covs = maybe_covariate(rng);
  const std::size_t nc = covs.empty() ? 1 : 2;
  std::vector<double> xl(nx), ml(nm);
  for (std::size_t i = 0; i < nx; ++i) xl[i] = static_cast<double>(i);
  for (std::size_t i = 0; i < nm; ++i) ml[i] = static_cast<double>(i);

  NodeSpec t = random_treatment(rng, nx, nc, xl);
  std::vector<std::vector<double>> ms, ys;
  for (std::size_t i = 0; i < nx * nc; ++i) ms.push_back(desc_uniforms(rng, nm - 1, 0.05, 0.95));
  for (std::size_t i = 0; i < nx * nm * nc; ++i) ys.push_back(desc_uniforms(rng, ny - 1, 0.02, 0.98));
  return Scm(std::move(covs), std::move(t), table_node(ml, std::move(ms)),
             table_node(level_values(rng, ny), std::move(ys)));
}

Scm random_monotone_scm(Rng& rng) {
  const std::size_t nx = 2 + rng.below(2);
  const std::size_t nm = 2 + rng.below(2);
  const std::size_t ny = 2 + rng.below(3);
  auto covs = maybe_covariate(rng);
  const std::size_t nc = covs.empty() ? 1 : 2;
  std::vector<double> xl = level_values(rng, nx);
  std::vector<double> ml = level_values(rng, nm);
  NodeSpec t = random_treatment(rng, nx, nc, xl);

  // Mediator survival nondecreasing in the treatment index for every level.
  std::vector<std::vector<double>> ms(nx * nc);
  for (std::size_t c = 0; c < nc; ++c) {
    std::vector<std::vector<double>> rows;
    for (std::size_t x = 0; x < nx; ++x) rows.push_back(desc_uniforms(rng, nm - 1, 0.05, 0.95));
    for (std::size_t j = 0; j + 1 < nm; ++j) {
      std::vector<double> col;
      for (const auto& r : rows) col.push_back(r[j]);
      std::sort(col.begin(), col.end());
      for (std::size_t x = 0; x < nx; ++x) rows[x][j] = col[x];
    }
    for (std::size_t x = 0; x < nx; ++x) ms[x * nc + c] = rows[x];
  }

  // Outcome survival S_t(a, m) inside a band per level t (bands decreasing in
  // t), increasing in the lexicographic parent index a * nm + m.
  const std::size_t bands = ny - 1;
  const bool flip = rng.uniform() < 0.3;
  std::vector<std::vector<double>> ys(nx * nm * nc, std::vector<double>(bands));
  for (std::size_t c = 0; c < nc; ++c) {
    for (std::size_t tl = 0; tl < bands; ++tl) {
      const double hi = 0.98 - 0.96 * static_cast<double>(tl) / static_cast<double>(bands);
      const double lo = 0.98 - 0.96 * static_cast<double>(tl + 1) / static_cast<double>(bands);
      auto r = desc_uniforms(rng, nx * nm, 0.02, 0.98);
      std::reverse(r.begin(), r.end());  // ascending
      if (flip) std::reverse(r.begin(), r.end());
      for (std::size_t a = 0; a < nx; ++a) {
        for (std::size_t m = 0; m < nm; ++m) {
          ys[(a * nm + m) * nc + c][tl] = lo + (hi - lo) * r[a * nm + m];
        }
      }
    }
  }
  if (ny >= 3 && rng.uniform() < 0.5) {
    const std::size_t tl = rng.below(ny - 2);  // level tl + 1 gets zero mass
    for (auto& row : ys) row[tl] = row[tl + 1];
  }
  return Scm(std::move(covs), std::move(t), table_node(ml, std::move(ms)),
             table_node(level_values(rng, ny), std::move(ys)));
}

Scm random_lexicographic_scm(Rng& rng) {
  const std::size_t nx = 2 + rng.below(2);
  const std::size_t nm = 2 + rng.below(2);
  const std::size_t ny = 2 + rng.below(2);
  std::vector<double> xl(nx), ml(nm);
  for (std::size_t i = 0; i < nx; ++i) xl[i] = static_cast<double>(i);
  for (std::size_t i = 0; i < nm; ++i) ml[i] = static_cast<double>(i);
  NodeSpec t = random_treatment(rng, nx, 1, xl);

  // One mediator level stays free of outcome randomness so that treatments
  // can move atoms across it.
  const std::size_t free_level = rng.below(nm);
  std::vector<std::size_t> candidates;
  for (std::size_t m = 0; m < nm; ++m) {
    if (m != free_level) candidates.push_back(m);
  }
  // Outcome: S_t(a, m) = 1 above a pivot level, p at it, 0 below; pivots
  // nondecreasing in t.
  std::vector<std::vector<double>> ys(nx * nm, std::vector<double>(ny - 1));
  std::vector<bool> pivot(nm, false);
  for (std::size_t a = 0; a < nx; ++a) {
    std::vector<std::size_t> piv(ny - 1);
    for (auto& p : piv) p = candidates[rng.below(candidates.size())];
    std::sort(piv.begin(), piv.end());
    auto probs = desc_uniforms(rng, ny - 1, 0.1, 0.9);
    for (std::size_t tl = 0; tl + 1 < ny; ++tl) {
      pivot[piv[tl]] = true;
      for (std::size_t m = 0; m < nm; ++m) {
        ys[a * nm + m][tl] = m > piv[tl] ? 1.0 : (m == piv[tl] ? probs[tl] : 0.0);
      }
    }
  }
  // Atoms: pivot levels get exactly one atom under every treatment, other
  // levels at least one; mediator nonincreasing in the atom index.
  std::size_t free_count = 0;
  for (std::size_t m = 0; m < nm; ++m) free_count += pivot[m] ? 0 : 1;
  const std::size_t extra = 1 + rng.below(2);
  const std::size_t atoms = nm + extra;
  std::vector<double> mass(atoms);
  double total = 0.0;
  for (auto& w : mass) {
    w = 0.2 + rng.uniform();
    total += w;
  }
  for (auto& w : mass) w /= total;

  std::vector<std::vector<std::size_t>> atom_level(nx);
  for (std::size_t x = 0; x < nx; ++x) {
    std::vector<std::size_t> count(nm, 1);
    for (std::size_t e = 0; e < extra; ++e) {
      std::vector<std::size_t> frees;
      for (std::size_t m = 0; m < nm; ++m) {
        if (!pivot[m]) frees.push_back(m);
      }
      count[frees[rng.below(frees.size())]] += 1;
    }
    for (std::size_t m = nm; m-- > 0;) {
      for (std::size_t k = 0; k < count[m]; ++k) atom_level[x].push_back(m);
    }
  }
  (void)free_count;
  NodeSpec med;
  med.form = NodeForm::atoms;
  med.levels = ml;
  med.atom_mass = std::move(mass);
  med.atom_level = std::move(atom_level);
  return Scm({}, std::move(t), std::move(med),
             table_node(level_values(rng, ny), std::move(ys)));
}

Query random_query(const Scm& scm, Rng& rng, bool with_m) {
  const auto& xl = scm.treatment().levels;
  const auto& yl = scm.outcome().levels;
  Query q;
  q.x_base = OrderedValue(xl[rng.below(xl.size())]);
  q.x_alt = OrderedValue(xl[rng.below(xl.size())]);
  const double pick = rng.uniform();
  double y;
  if (pick < 0.7) {
    y = yl[1 + rng.below(yl.size() - 1)];
  } else if (pick < 0.9) {
    const std::size_t i = rng.below(yl.size() - 1);
    y = 0.5 * (yl[i] + yl[i + 1]);
  } else {
    y = rng.uniform() < 0.5 ? yl.front() - 1.0 : yl.back() + 1.0;
  }
  q.y_threshold = OrderedValue(y);
  if (with_m) {
    const auto& ml = scm.mediator().levels;
    q.m_fixed = OrderedValue(ml[rng.below(ml.size())]);
  }
  for (const auto& c : scm.covariates()) q.stratum.push_back(c.levels[rng.below(c.levels.size())]);
  return q;
}

namespace {

Interval random_interval(const std::vector<double>& lv, Rng& rng) {
  const double pick = rng.uniform();
  if (pick < 0.25) {
    const double v = lv[rng.below(lv.size())];
    return Interval::point(v);
  }
  if (pick < 0.45) {
    const std::size_t i = rng.below(lv.size() - 1);
    return Interval(OrderedValue(lv[i]), OrderedValue(lv[i + 1]), false);
  }
  std::optional<OrderedValue> lo, hi;
  std::size_t li = 0;
  if (rng.uniform() < 0.7) {
    li = rng.below(lv.size());
    lo = OrderedValue(lv[li]);
  }
  if (rng.uniform() < 0.7) {
    const std::size_t hj = li + rng.below(lv.size() - li);
    hi = OrderedValue(lv[hj]);
  }
  bool closed = rng.uniform() < 0.5;
  if (lo && hi && *lo == *hi) closed = true;
  return Interval(lo, hi, closed);
}

}  // namespace

Interval random_outcome_interval(const Scm& scm, Rng& rng) {
  return random_interval(scm.outcome().levels, rng);
}

Interval random_mediator_interval(const Scm& scm, Rng& rng) {
  return random_interval(scm.mediator().levels, rng);
}

// ---------------------------------------------------------------------------
// Criteria

CriterionResult criterion_exact_truths(const VerifyOptions&) {
  Stopwatch sw;
  CriterionResult r;
  r.id = 1;
  r.title = "exact oracle truths of the preset model";
  const auto cf = preset_closed_form();
  const auto truth = truth_pns(Scm::paper_bernoulli(), preset_query());
  constexpr double kTol = 1e-6;
  constexpr double kRounded = 0.002;
  r.rows.push_back(row("T-PNS", cf.t, truth.at("T-PNS"), kTol));
  r.rows.push_back(row("ND-PNS", cf.nd, truth.at("ND-PNS"), kTol));
  r.rows.push_back(row("NI-PNS", cf.ni, truth.at("NI-PNS"), kTol));
  r.rows.push_back(row("T-PNS vs reported 0.074", 0.074, truth.at("T-PNS"), kRounded));
  r.rows.push_back(row("ND-PNS vs reported 0.066", 0.066, truth.at("ND-PNS"), kRounded));
  r.rows.push_back(row("NI-PNS vs reported 0.008", 0.008, truth.at("NI-PNS"), kRounded));
  r.seconds = sw.seconds();
  r.passed = all_rows_pass(r.rows) && r.seconds < 1.0;
  r.detail = "T/ND/NI = " + fmt(truth.at("T-PNS")) + "/" + fmt(truth.at("ND-PNS")) + "/" +
             fmt(truth.at("NI-PNS")) + " (closed form " + fmt(cf.t, 7) + "/" + fmt(cf.nd, 7) +
             "/" + fmt(cf.ni, 7) + ", tol 1e-6; printed six-digit targets 0.074963/0.067476/"
             "0.007487 carry arithmetic slips of up to 6e-6)";
  return r;
}

namespace {

struct ProtocolRun {
  double t_point;
  double width;
};

}  // namespace

CriterionResult criterion_estimation_protocol(const VerifyOptions& o) {
  Stopwatch sw;
  CriterionResult r;
  r.id = 2;
  r.title = "estimation protocol, N=10000, B=1000, 20 runs";
  const std::size_t runs = o.quick ? 4 : 20;
  BootstrapConfig cfg;
  cfg.replicates = o.quick ? 200 : 1000;
  const Scm scm = Scm::paper_bernoulli();
  Target target{Family::pns, preset_query()};
  double sum_t = 0.0, sum_w = 0.0, min_w = 1.0, max_w = 0.0;
  for (std::size_t i = 0; i < runs; ++i) {
    Dataset d = sample_observational(scm, 10000, substream_seed(o.seed + 2, i));
    cfg.seed = substream_seed(o.seed + 20, i);
    auto res = bootstrap_ci(d, target, cfg);
    const auto& ci = res.intervals.front();  // T-PNS
    const double w = *ci.upper - *ci.lower;
    sum_t += *ci.point;
    sum_w += w;
    min_w = std::min(min_w, w);
    max_w = std::max(max_w, w);
  }
  const double mean_t = sum_t / static_cast<double>(runs);
  const double mean_w = sum_w / static_cast<double>(runs);
  const double truth = preset_closed_form().t;
  r.rows.push_back(row("mean T-PNS estimate", truth, mean_t, 0.005));
  VerifyRow wrow;
  wrow.quantity = "mean 95% CI width in [0.02, 0.04]";
  wrow.estimate = mean_w;
  wrow.lower = min_w;
  wrow.upper = max_w;
  wrow.passed = mean_w >= 0.02 && mean_w <= 0.04;
  r.rows.push_back(wrow);
  r.seconds = sw.seconds();
  r.passed = all_rows_pass(r.rows) && r.seconds < 120.0;
  r.detail = "mean T-PNS " + fmt(mean_t) + " vs exact " + fmt(truth) + " (tol 0.005), mean CI width " +
             fmt(mean_w, 4) + " [min " + fmt(min_w, 4) + ", max " + fmt(max_w, 4) + "] over " +
             std::to_string(runs) + " runs, B=" + std::to_string(cfg.replicates);
  return r;
}

CriterionResult criterion_pn_family(const VerifyOptions& o) {
  Stopwatch sw;
  CriterionResult r;
  r.id = 3;
  r.title = "PN family truths and N=10000 estimates";
  const auto cf = preset_closed_form();
  const Scm scm = Scm::paper_bernoulli();
  const Query q = preset_query();
  const auto truth = truth_with_evidence(scm, q, pn_evidence(q));
  constexpr double kTol = 1e-6;
  r.rows.push_back(row("PN truth", cf.pn, truth.at("T-PNS"), kTol));
  r.rows.push_back(row("ND-PN truth", cf.nd_pn, truth.at("ND-PNS"), kTol));
  r.rows.push_back(row("NI-PN truth", cf.ni_pn, truth.at("NI-PNS"), kTol));

  const std::size_t runs = o.quick ? 5 : 20;
  Target target{Family::pn, q};
  double s[3] = {0, 0, 0};
  Estimate first;
  for (std::size_t i = 0; i < runs; ++i) {
    Dataset d = sample_observational(scm, 10000, substream_seed(o.seed + 3, i));
    Estimate e = estimate(d, target);
    if (i == 0) first = e;
    s[0] += *e.get("PN");
    s[1] += *e.get("ND-PN");
    s[2] += *e.get("NI-PN");
  }
  const double n = static_cast<double>(runs);
  constexpr double kEst = 0.01;
  r.rows.push_back(row("PN estimate (mean of runs)", cf.pn, s[0] / n, kEst));
  r.rows.push_back(row("ND-PN estimate (mean of runs)", cf.nd_pn, s[1] / n, kEst));
  r.rows.push_back(row("NI-PN estimate (mean of runs)", cf.ni_pn, s[2] / n, kEst));
  r.seconds = sw.seconds();
  r.passed = all_rows_pass(r.rows);
  r.detail = "exact " + fmt(truth.at("T-PNS")) + "/" + fmt(truth.at("ND-PNS")) + "/" +
             fmt(truth.at("NI-PNS")) + "; mean estimates " + fmt(s[0] / n) + "/" +
             fmt(s[1] / n) + "/" + fmt(s[2] / n) + " over " + std::to_string(runs) +
             " datasets (first dataset " + fmt(*first.get("PN")) + "/" +
             fmt(*first.get("ND-PN")) + "/" + fmt(*first.get("NI-PN")) + ")";
  return r;
}

namespace {

struct Tally {
  std::size_t checks = 0;
  std::size_t failures = 0;
  double worst = 0.0;
  std::string first_failure;

  void check(double err, double tol, const std::string& what) {
    ++checks;
    worst = std::max(worst, err);
    if (!(err <= tol)) {
      if (failures == 0) first_failure = what + " (error " + sci(err) + ")";
      ++failures;
    }
  }
};

void check_triple(Tally& t, const PnsTriple& p, const std::string& what) {
  t.check(std::abs(p.t - (p.nd + p.ni)), 1e-12, what + ": t = nd + ni");
  if (p.t > 0.0) {
    t.check(std::abs(*p.prop_nd + *p.prop_ni - 1.0), 1e-12, what + ": proportions sum to 1");
  } else {
    t.check(p.prop_nd || p.prop_ni ? 1.0 : 0.0, 0.0, what + ": proportions undefined at t = 0");
  }
  for (double v : {p.t, p.nd, p.ni}) {
    t.check(v >= 0.0 && v <= 1.0 + 1e-12 ? 0.0 : 1.0, 0.0, what + ": range");
  }
}

void check_evidence_identity(Tally& t, const EvidenceResult& r, const std::string& what) {
  check_triple(t, r.triple, what);
  const auto& e = r.terms;
  if (r.triple.case_flag == CaseFlag::A) {
    t.check(std::abs(r.triple.t - std::max(e.gamma_t / e.delta, 0.0)), 1e-12,
            what + ": t = max(gamma_T / delta, 0)");
  } else {
    const double ind = e.b <= e.l && e.l < e.a ? 1.0 : 0.0;
    t.check(std::abs(r.triple.t - ind), 0.0, what + ": case B total indicator");
  }
  t.check(std::abs(std::max(e.gamma_d, 0.0) + std::max(e.gamma_i, 0.0) -
                   std::max(e.gamma_t, 0.0)),
          1e-12, what + ": gamma identity");
}

}  // namespace

CriterionResult criterion_decomposition(const VerifyOptions& o) {
  Stopwatch sw;
  CriterionResult r;
  r.id = 4;
  r.title = "decomposition identities over 1000 random models";
  Rng rng(substream_seed(o.seed, 4));
  Tally tally;
  const std::size_t models = 1000;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < models; ++i) {
    const double kind = rng.uniform();
    const Scm scm = kind < 0.4   ? random_threshold_scm(rng)
                    : kind < 0.8 ? random_monotone_scm(rng)
                                 : random_lexicographic_scm(rng);
    const Query q = random_query(scm, rng, true);
    const std::string tag = "model " + std::to_string(i);
    try {
      AnalyticCdf model(scm, q.stratum);
      auto nat = natural_pns(model, q);
      check_triple(tally, nat, tag + " natural");
      const double a = model.cdf_y_given_x(q.y_threshold.value(), q.x_base.value(), Strictness::strict);
      const double b = model.cdf_y_given_x(q.y_threshold.value(), q.x_alt.value(), Strictness::strict);
      tally.check(std::abs(nat.t - std::max(a - b, 0.0)), 1e-12, tag + ": t = max(a - b, 0)");

      const auto& xl = scm.treatment().levels;
      const OrderedValue xs(xl[rng.below(xl.size())]);
      check_evidence_identity(tally,
                              natural_pns_with_evidence(model, q,
                                                        Evidence::with_outcome(xs, random_outcome_interval(scm, rng))),
                              tag + " outcome evidence");
      check_evidence_identity(
          tally,
          natural_pns_with_mediator_evidence(
              model, q,
              Evidence::with_mediator_interval(xs, random_mediator_interval(scm, rng),
                                               random_outcome_interval(scm, rng))),
          tag + " mediator-interval evidence");
      check_evidence_identity(tally, pn_family(model, q), tag + " PN");
      check_evidence_identity(tally, ps_family(model, q), tag + " PS");

      auto truth = truth_pns(scm, q);
      tally.check(std::abs(truth.at("T-PNS") - truth.at("ND-PNS") - truth.at("NI-PNS")), 1e-12,
                  tag + ": truth T = ND + NI");
      try {
        auto te = truth_with_evidence(scm, q, pn_evidence(q), TruthMethod::exact(),
                                      ZeroMassPolicy::boundary_point);
        tally.check(std::abs(te.at("T-PNS") - te.at("ND-PNS") - te.at("NI-PNS")), 1e-12,
                    tag + ": evidence truth T = ND + NI");
      } catch (const ConditioningError&) {
        ++skipped;
      }

      Dataset d = sample_observational(scm, 300, substream_seed(o.seed + 4, i));
      try {
        Target tg{Family::pns, q};
        Estimate est = estimate(d, tg);
        const double t = *est.get("T-PNS");
        tally.check(std::abs(t - *est.get("ND-PNS") - *est.get("NI-PNS")), 1e-12,
                    tag + ": empirical t = nd + ni");
        if (t > 0.0) {
          tally.check(std::abs(*est.get("prop-ND") + *est.get("prop-NI") - 1.0), 1e-12,
                      tag + ": empirical proportions");
        }
        tg.family = Family::pn;
        est = estimate(d, tg);
        tally.check(std::abs(*est.get("PN") - *est.get("ND-PN") - *est.get("NI-PN")), 1e-12,
                    tag + ": empirical PN decomposition");
      } catch (const PositivityError&) {
        ++skipped;
      }
    } catch (const PositivityError&) {
      ++skipped;
    }
  }
  r.seconds = sw.seconds();
  r.passed = tally.failures == 0 && tally.checks > 0 && r.seconds < 30.0;
  r.detail = std::to_string(tally.checks) + " checks on " + std::to_string(models) +
             " models, " + std::to_string(tally.failures) + " failures, worst error " +
             sci(tally.worst) + ", " + std::to_string(skipped) + " skipped (empty cells)";
  if (tally.failures > 0) r.detail += "; first: " + tally.first_failure;
  return r;
}

namespace {

struct Coverage {
  std::size_t t1 = 0, t2 = 0, t3a = 0, t3b = 0, t4a = 0, t4b = 0, a1a = 0, a1b = 0;
};

void compare_triple(Tally& tally, const PnsTriple& f, const TruthReport& truth,
                    const std::string& what) {
  tally.check(std::abs(f.t - truth.at("T-PNS")), 1e-9, what + " T");
  tally.check(std::abs(f.nd - truth.at("ND-PNS")), 1e-9, what + " ND");
  tally.check(std::abs(f.ni - truth.at("NI-PNS")), 1e-9, what + " NI");
  tally.check(f.case_flag == truth.case_flag ? 0.0 : 1.0, 0.0, what + " case flag");
}

}  // namespace

CriterionResult criterion_oracle_equivalence(const VerifyOptions& o) {
  Stopwatch sw;
  CriterionResult r;
  r.id = 5;
  r.title = "oracle equivalence over 200 monotone models";
  Rng rng(substream_seed(o.seed, 5));
  Tally tally;
  Coverage cov;
  const std::size_t target_models = 200;
  const std::size_t lexicographic_models = 50;
  std::size_t accepted = 0, rejected = 0, skipped = 0;

  while (accepted < target_models && accepted + rejected < 20 * target_models) {
    const bool lex = accepted >= target_models - lexicographic_models;
    const Scm scm = lex ? random_lexicographic_scm(rng)
                        : (rng.uniform() < 0.8 ? random_monotone_scm(rng)
                                               : random_threshold_scm(rng));
    const auto mono = check_monotonicity(scm);
    if (!mono.ok() || (lex && !mono.assumption_a1)) {
      ++rejected;
      continue;
    }
    const std::string tag = "model " + std::to_string(accepted);
    ++accepted;
    for (int rep = 0; rep < 4; ++rep) {
      const Query q = random_query(scm, rng, true);
      const auto& xl = scm.treatment().levels;
      const auto& ml = scm.mediator().levels;
      AnalyticCdf model(scm, q.stratum);
      const std::string qt = tag + " query " + std::to_string(rep);

      auto truth = truth_pns(scm, q);
      tally.check(std::abs(cd_pns(model, q) - truth.at("CD-PNS")), 1e-9, qt + " CD-PNS");
      ++cov.t1;
      compare_triple(tally, natural_pns(model, q),
                     TruthReport{Method::exact, 0, CaseFlag::unconditional, truth.values},
                     qt + " natural");
      ++cov.t2;

      const OrderedValue xs(xl[rng.below(xl.size())]);
      const OrderedValue mstar(ml[rng.below(ml.size())]);
      try {
        Evidence e = Evidence::with_mediator_value(xs, mstar, random_outcome_interval(scm, rng));
        auto tr = truth_with_evidence(scm, q, e, TruthMethod::exact(),
                                      ZeroMassPolicy::boundary_point);
        auto f = cd_pns_with_evidence(model, q, e);
        tally.check(std::abs(f.value - tr.at("CD-PNS")), 1e-9, qt + " CD with evidence");
        tally.check(f.case_flag == tr.case_flag ? 0.0 : 1.0, 0.0, qt + " CD case flag");
        ++(f.case_flag == CaseFlag::A ? cov.t3a : cov.t3b);
      } catch (const ConditioningError&) {
        ++skipped;
      } catch (const PositivityError&) {
        ++skipped;
      }

      for (int which = 0; which < 3; ++which) {
        try {
          Evidence e = which == 0   ? Evidence::with_outcome(xs, random_outcome_interval(scm, rng))
                       : which == 1 ? pn_evidence(q)
                                    : ps_evidence(q);
          auto tr = truth_with_evidence(scm, q, e, TruthMethod::exact(),
                                        ZeroMassPolicy::boundary_point);
          auto f = natural_pns_with_evidence(model, q, e);
          compare_triple(tally, f.triple, tr, qt + (which == 0 ? " outcome evidence" : which == 1 ? " PN" : " PS"));
          ++(f.triple.case_flag == CaseFlag::A ? cov.t4a : cov.t4b);
        } catch (const ConditioningError&) {
          ++skipped;
        }
      }

      if (lex) {
        try {
          Evidence e = Evidence::with_mediator_interval(xs, random_mediator_interval(scm, rng),
                                                        random_outcome_interval(scm, rng));
          auto tr = truth_with_evidence(scm, q, e, TruthMethod::exact(),
                                        ZeroMassPolicy::boundary_point);
          auto f = natural_pns_with_mediator_evidence(model, q, e);
          compare_triple(tally, f.triple, tr, qt + " mediator-interval evidence");
          ++(f.triple.case_flag == CaseFlag::A ? cov.a1a : cov.a1b);
        } catch (const ConditioningError&) {
          ++skipped;
        }
      }
    }
  }
  r.seconds = sw.seconds();
  const bool covered = cov.t1 && cov.t2 && cov.t3a && cov.t3b && cov.t4a && cov.t4b &&
                       cov.a1a && cov.a1b;
  r.passed = accepted == target_models && tally.failures == 0 && covered && r.seconds < 120.0;
  r.detail = std::to_string(accepted) + " models (" + std::to_string(rejected) +
             " candidates rejected by the monotonicity check), " +
             std::to_string(tally.checks) + " checks, " + std::to_string(tally.failures) +
             " failures, worst error " + sci(tally.worst) + "; coverage T1 " +
             std::to_string(cov.t1) + ", T2 " + std::to_string(cov.t2) + ", T3 A/B " +
             std::to_string(cov.t3a) + "/" + std::to_string(cov.t3b) + ", T4 A/B " +
             std::to_string(cov.t4a) + "/" + std::to_string(cov.t4b) + ", A1 A/B " +
             std::to_string(cov.a1a) + "/" + std::to_string(cov.a1b) + ", " +
             std::to_string(skipped) + " zero-probability evidence draws skipped";
  if (tally.failures > 0) r.detail += "; first: " + tally.first_failure;
  return r;
}

// ---------------------------------------------------------------------------
// Criterion 6: reductions and a binary reference in exact rationals.

namespace {

using boost::multiprecision::cpp_rational;

struct BinaryReference {
  double t, nd, ni;
  std::optional<double> prop_nd, prop_ni;
  double cd;
  double pn, nd_pn, ni_pn;
  CaseFlag pn_case;
  double ps, nd_ps, ni_ps;
  CaseFlag ps_case;
  double cd_ev;
  CaseFlag cd_case;
};

double to_d(const cpp_rational& q) { return q.convert_to<double>(); }

cpp_rational rmax(const cpp_rational& a, const cpp_rational& b) { return a < b ? b : a; }
cpp_rational rmin(const cpp_rational& a, const cpp_rational& b) { return a < b ? a : b; }

// Binary treatment, mediator and outcome with y = 1, x' = 0, x = 1, m = 1,
// written with success probabilities P(Y = 1 | .) throughout.
BinaryReference binary_reference(const Dataset& d) {
  long long n[2] = {0, 0}, y1[2] = {0, 0}, nm[2][2] = {{0, 0}, {0, 0}},
            ym[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int x = d.x()[i] > 0.5, m = d.m()[i] > 0.5, y = d.y()[i] > 0.5;
    ++n[x];
    y1[x] += y;
    ++nm[x][m];
    ym[x][m] += y;
  }
  const cpp_rational p0(y1[0], n[0]), p1(y1[1], n[1]);
  cpp_rational r = 0;  // P(Y_{0,M_1} = 1)
  for (int m = 0; m < 2; ++m) {
    if (nm[1][m] == 0) continue;
    r += cpp_rational(ym[0][m], nm[0][m]) * cpp_rational(nm[1][m], n[1]);
  }
  BinaryReference out{};
  const cpp_rational zero = 0;
  const cpp_rational nd = rmax(p1 - rmax(p0, r), zero);
  const cpp_rational ni = rmax(rmin(p1, r) - p0, zero);
  const cpp_rational t = nd + ni;
  out.t = to_d(t);
  out.nd = to_d(nd);
  out.ni = to_d(ni);
  if (t > 0) {
    out.prop_nd = to_d(nd / t);
    out.prop_ni = to_d(ni / t);
  }
  const cpp_rational q01(ym[0][1], nm[0][1]), q11(ym[1][1], nm[1][1]);
  out.cd = to_d(rmax(q11 - q01, zero));
  // Necessity: evidence X = 1, Y = 1 has probability p1.
  if (p1 > 0) {
    out.pn = to_d(t / p1);
    out.nd_pn = to_d(nd / p1);
    out.ni_pn = to_d(ni / p1);
    out.pn_case = CaseFlag::A;
  } else {
    out.pn = out.nd_pn = out.ni_pn = 0.0;  // l = 1 is never below P(Y<1|x')
    out.pn_case = CaseFlag::B;
  }
  // Sufficiency: evidence X = 0, Y = 0 has probability 1 - p0.
  if (p0 < 1) {
    const cpp_rational q = 1 - p0;
    out.ps = to_d(t / q);
    out.nd_ps = to_d(nd / q);
    out.ni_ps = to_d(ni / q);
    out.ps_case = CaseFlag::A;
  } else {
    out.ps = out.nd_ps = out.ni_ps = 0.0;  // P(Y<1|x') = 0 is not above l = 0
    out.ps_case = CaseFlag::B;
  }
  // Controlled direct with evidence X = 1, M = 1, Y = 1: probability q11.
  if (q11 > 0) {
    out.cd_ev = to_d(rmax((q11 - q01) / q11, zero));
    out.cd_case = CaseFlag::A;
  } else {
    out.cd_ev = 0.0;
    out.cd_case = CaseFlag::B;
  }
  return out;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

bool same_bits(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || same_bits(*a, *b);
}

bool same_triple(const PnsTriple& a, const PnsTriple& b) {
  return same_bits(a.t, b.t) && same_bits(a.nd, b.nd) && same_bits(a.ni, b.ni) &&
         same_bits(a.prop_nd, b.prop_nd) && same_bits(a.prop_ni, b.prop_ni);
}

Dataset random_binary_dataset(Rng& rng, std::size_t n) {
  const double px = 0.2 + 0.6 * rng.uniform();
  double pm[2], py[2][2];
  for (auto& v : pm) v = 0.1 + 0.8 * rng.uniform();
  for (auto& row : py) {
    for (auto& v : row) {
      const double pick = rng.uniform();
      v = pick < 0.1 ? 0.0 : pick < 0.2 ? 1.0 : rng.uniform();
    }
  }
  std::vector<double> x(n), m(n), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int xi = rng.uniform() < px;
    const int mi = rng.uniform() < pm[xi];
    x[i] = xi;
    m[i] = mi;
    y[i] = rng.uniform() < py[xi][mi] ? 1.0 : 0.0;
  }
  return Dataset(Schema{}, std::move(x), std::move(m), std::move(y));
}

}  // namespace

CriterionResult criterion_reductions(const VerifyOptions& o) {
  Stopwatch sw;
  CriterionResult r;
  r.id = 6;
  r.title = "full-interval reductions and binary reference";
  Rng rng(substream_seed(o.seed, 6));
  Tally tally;

  // Bitwise full-interval reductions on empirical and analytic models.
  std::size_t reduction_cases = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    const Scm scm = i % 2 ? random_monotone_scm(rng) : random_threshold_scm(rng);
    const Query q = random_query(scm, rng, true);
    const OrderedValue xs(scm.treatment().levels[rng.below(scm.treatment().levels.size())]);
    const OrderedValue ms(scm.mediator().levels[rng.below(scm.mediator().levels.size())]);
    const std::string tag = "model " + std::to_string(i);
    auto run = [&](const CdfProvider& model, const std::string& which) {
      const PnsTriple base = natural_pns(model, q);
      auto e1 = natural_pns_with_evidence(model, q, Evidence::with_outcome(xs, Interval::full()));
      tally.check(same_triple(base, e1.triple) ? 0.0 : 1.0, 0.0, tag + which + " outcome evidence");
      auto e2 = natural_pns_with_mediator_evidence(
          model, q, Evidence::with_mediator_interval(xs, Interval::full(), Interval::full()));
      tally.check(same_triple(base, e2.triple) ? 0.0 : 1.0, 0.0,
                  tag + which + " mediator-interval evidence");
      auto c1 = cd_pns_with_evidence(model, q, Evidence::with_mediator_value(xs, ms, Interval::full()));
      tally.check(same_bits(cd_pns(model, q), c1.value) ? 0.0 : 1.0, 0.0, tag + which + " CD");
      auto pn = pn_family(model, q);
      auto pn_ref = natural_pns_with_evidence(model, q, pn_evidence(q));
      tally.check(same_triple(pn.triple, pn_ref.triple) ? 0.0 : 1.0, 0.0, tag + which + " PN");
      auto ps = ps_family(model, q);
      auto ps_ref = natural_pns_with_evidence(model, q, ps_evidence(q));
      tally.check(same_triple(ps.triple, ps_ref.triple) ? 0.0 : 1.0, 0.0, tag + which + " PS");
      ++reduction_cases;
    };
    try {
      run(AnalyticCdf(scm, q.stratum), " analytic");
    } catch (const PositivityError&) {
    }
    try {
      Dataset d = sample_observational(scm, 500, substream_seed(o.seed + 6, i));
      run(EmpiricalCdf(q.stratum.empty() ? d : stratify(d, q.stratum)), " empirical");
    } catch (const PositivityError&) {
    }
  }

  // Binary reference on 50 random datasets.
  std::size_t binary = 0, attempts = 0, case_b = 0;
  Query q = preset_query();
  q.m_fixed = OrderedValue(1.0);
  while (binary < 50 && attempts < 1000) {
    ++attempts;
    Dataset d = random_binary_dataset(rng, 20 + rng.below(400));
    BinaryReference ref;
    Estimate pns, pn, ps, cde, nde;
    try {
      ref = binary_reference(d);
      pns = estimate(d, Target{Family::pns, q});
      pn = estimate(d, Target{Family::pn, q});
      ps = estimate(d, Target{Family::ps, q});
      Query qe = q;
      qe.evidence = Evidence::with_mediator_value(OrderedValue(1.0), OrderedValue(1.0),
                                                  Interval::point(1.0));
      cde = estimate(d, Target{Family::pns, qe});
      qe.evidence = Evidence::with_outcome(OrderedValue(1.0), Interval::point(1.0));
      nde = estimate(d, Target{Family::pns, qe});
    } catch (const PositivityError&) {
      continue;
    }
    const std::string tag = "binary dataset " + std::to_string(binary);
    ++binary;
    constexpr double kTol = 1e-15;
    tally.check(std::abs(*pns.get("T-PNS") - ref.t), kTol, tag + " T-PNS");
    tally.check(std::abs(*pns.get("ND-PNS") - ref.nd), kTol, tag + " ND-PNS");
    tally.check(std::abs(*pns.get("NI-PNS") - ref.ni), kTol, tag + " NI-PNS");
    tally.check(pns.get("prop-ND").has_value() == ref.prop_nd.has_value() ? 0.0 : 1.0, 0.0,
                tag + " proportion defined");
    if (ref.prop_nd) {
      tally.check(std::abs(*pns.get("prop-ND") - *ref.prop_nd), kTol, tag + " prop-ND");
      tally.check(std::abs(*pns.get("prop-NI") - *ref.prop_ni), kTol, tag + " prop-NI");
    }
    tally.check(std::abs(*pns.get("CD-PNS") - ref.cd), kTol, tag + " CD-PNS");
    tally.check(std::abs(*pn.get("PN") - ref.pn), kTol, tag + " PN");
    tally.check(std::abs(*pn.get("ND-PN") - ref.nd_pn), kTol, tag + " ND-PN");
    tally.check(std::abs(*pn.get("NI-PN") - ref.ni_pn), kTol, tag + " NI-PN");
    tally.check(pn.case_flag == ref.pn_case ? 0.0 : 1.0, 0.0, tag + " PN case");
    tally.check(std::abs(*ps.get("PS") - ref.ps), kTol, tag + " PS");
    tally.check(std::abs(*ps.get("ND-PS") - ref.nd_ps), kTol, tag + " ND-PS");
    tally.check(std::abs(*ps.get("NI-PS") - ref.ni_ps), kTol, tag + " NI-PS");
    tally.check(ps.case_flag == ref.ps_case ? 0.0 : 1.0, 0.0, tag + " PS case");
    tally.check(std::abs(*cde.get("CD-PNS") - ref.cd_ev), kTol, tag + " CD with evidence");
    tally.check(cde.case_flag == ref.cd_case ? 0.0 : 1.0, 0.0, tag + " CD evidence case");
    tally.check(std::abs(*nde.get("T-PNS") - ref.pn), kTol, tag + " T-PNS with evidence");
    tally.check(std::abs(*nde.get("ND-PNS") - ref.nd_pn), kTol, tag + " ND-PNS with evidence");
    tally.check(std::abs(*nde.get("NI-PNS") - ref.ni_pn), kTol, tag + " NI-PNS with evidence");
    if (ref.pn_case == CaseFlag::B || ref.ps_case == CaseFlag::B || ref.cd_case == CaseFlag::B) {
      ++case_b;
    }
  }
  r.seconds = sw.seconds();
  r.passed = tally.failures == 0 && binary == 50 && reduction_cases > 0;
  r.detail = std::to_string(reduction_cases) + " bitwise full-interval reduction cases, " +
             std::to_string(binary) + " binary datasets (" + std::to_string(case_b) +
             " with a degenerate evidence branch) against an exact-rational reference; " +
             std::to_string(tally.checks) + " checks, " + std::to_string(tally.failures) +
             " failures, worst error " + sci(tally.worst);
  if (tally.failures > 0) r.detail += "; first: " + tally.first_failure;
  return r;
}

CriterionResult criterion_coverage(const VerifyOptions& o) {
  Stopwatch sw;
  CriterionResult r;
  r.id = 7;
  r.title = "bootstrap coverage, 200 datasets of N=1000";
  const std::size_t datasets = o.quick ? 40 : 200;
  BootstrapConfig cfg;
  cfg.replicates = o.quick ? 200 : 1000;
  const Scm scm = Scm::paper_bernoulli();
  const Target target{Family::pns, preset_query()};
  const double truth = preset_closed_form().t;
  std::size_t covered = 0;
  for (std::size_t i = 0; i < datasets; ++i) {
    Dataset d = sample_observational(scm, 1000, substream_seed(o.seed + 7, i));
    cfg.seed = substream_seed(o.seed + 70, i);
    const auto res = bootstrap_ci(d, target, cfg);
    const auto& ci = res.intervals.front();
    if (*ci.lower <= truth && truth <= *ci.upper) ++covered;
  }
  const double rate = static_cast<double>(covered) / static_cast<double>(datasets);
  VerifyRow cr;
  cr.quantity = "T-PNS 95% CI coverage >= 0.88";
  cr.truth = truth;
  cr.estimate = rate;
  cr.passed = rate >= 0.88;
  r.rows.push_back(cr);
  r.seconds = sw.seconds();
  r.passed = cr.passed && r.seconds < 300.0;
  r.detail = "coverage " + std::to_string(covered) + "/" + std::to_string(datasets) + " = " +
             fmt(rate, 3) + " (B=" + std::to_string(cfg.replicates) + ", exact T-PNS " +
             fmt(truth) + ")";
  return r;
}

CriterionResult criterion_excluded(const VerifyOptions&) {
  Stopwatch sw;
  CriterionResult r;
  r.id = 8;
  r.title = "excluded: application point values and reported PS truths";
  r.excluded = true;
  const Query q = preset_query();
  const auto truth = truth_with_evidence(Scm::paper_bernoulli(), q, ps_evidence(q));
  const auto cf = preset_closed_form();
  const double ps = truth.at("T-PNS");
  VerifyRow pr = row("PS exact (reported 0.097 not reproducible)", cf.ps, ps, 1e-9);
  r.rows.push_back(pr);
  r.seconds = sw.seconds();
  r.passed = pr.passed;
  r.detail = "exact PS/ND-PS/NI-PS = " + fmt(ps) + "/" + fmt(truth.at("ND-PNS")) + "/" +
             fmt(truth.at("NI-PNS")) +
             " under the stated model, irreconcilable with the reported 0.097/0.084/0.012; the "
             "employment-study figures (e.g. 23.840%) need data and a mediator coding that are "
             "not available; both replaced by criteria 1-7";
  return r;
}

std::vector<CriterionResult> run_all_criteria(const VerifyOptions& o) {
  return {criterion_exact_truths(o), criterion_estimation_protocol(o),
          criterion_pn_family(o),    criterion_decomposition(o),
          criterion_oracle_equivalence(o), criterion_reductions(o),
          criterion_coverage(o),     criterion_excluded(o)};
}

std::string format_criterion_line(const CriterionResult& r, bool with_time) {
  std::string status = r.excluded ? (r.passed ? "EXCLUDED(documented)" : "EXCLUDED(check failed)")
                                  : (r.passed ? "PASS" : "FAIL");
  std::string line = "[" + status + "] criterion " + std::to_string(r.id) + ": " + r.title;
  if (with_time) line += " (" + fmt(r.seconds, 2) + " s)";
  return line + ": " + r.detail;
}

}  // namespace medpoc
