#include <gtest/gtest.h>

#include <cmath>

#include "medpoc/identify.hpp"
#include "medpoc/oracle.hpp"
#include "medpoc/rng.hpp"
#include "medpoc/scm.hpp"
#include "medpoc/verification.hpp"

using namespace medpoc;

namespace {

double sig(double t) { return 1.0 / (1.0 + std::exp(-t)); }

Query preset_query() {
  Query q;
  q.x_base = OrderedValue(0.0);
  q.x_alt = OrderedValue(1.0);
  q.y_threshold = OrderedValue(1.0);
  return q;
}

// Independent exact oracle for the preset model: with a shared exogenous
// uniform per node, Y_{x,m} = 1 iff u_Y < sig(1 + x/2 + m/2) and
// M_x = 1 iff u_M < sig(1 + x/2).  Integrates the joint over (u_M, u_Y) by
// splitting each axis at every response threshold.
struct PresetOracle {
  static double m_of(double um, double x) { return um < sig(1 + 0.5 * x) ? 1 : 0; }
  static double y_of(double uy, double x, double m) { return uy < sig(1 + 0.5 * x + 0.5 * m) ? 1 : 0; }

  template <class F>
  static double integrate(F f) {
    std::vector<double> cm{0, sig(1), sig(1.5), 1};
    std::vector<double> cy{0, sig(1), sig(1.5), sig(2), 1};
    double total = 0;
    for (std::size_t i = 0; i + 1 < cm.size(); ++i) {
      for (std::size_t j = 0; j + 1 < cy.size(); ++j) {
        const double um = 0.5 * (cm[i] + cm[i + 1]);
        const double uy = 0.5 * (cy[j] + cy[j + 1]);
        total += (cm[i + 1] - cm[i]) * (cy[j + 1] - cy[j]) * f(um, uy);
      }
    }
    return total;
  }
};

}  // namespace

TEST(ExactOracle, PresetMatchesIndependentIntegration) {
  const auto r = truth_pns(Scm::paper_bernoulli(), preset_query());
  using O = PresetOracle;
  // Y_{x'} = 0 and Y_x = 1 (y = 1: "below y" means Y = 0).
  const double t = O::integrate([](double um, double uy) {
    return O::y_of(uy, 0, O::m_of(um, 0)) == 0 && O::y_of(uy, 1, O::m_of(um, 1)) == 1;
  });
  // Direct: the cross-world outcome Y_{x', M_x} is still below y.
  const double nd = O::integrate([](double um, double uy) {
    return O::y_of(uy, 0, O::m_of(um, 0)) == 0 && O::y_of(uy, 1, O::m_of(um, 1)) == 1 &&
           O::y_of(uy, 0, O::m_of(um, 1)) == 0;
  });
  const double ni = O::integrate([](double um, double uy) {
    return O::y_of(uy, 0, O::m_of(um, 0)) == 0 && O::y_of(uy, 1, O::m_of(um, 1)) == 1 &&
           O::y_of(uy, 0, O::m_of(um, 1)) == 1;
  });
  EXPECT_NEAR(r.at("T-PNS"), t, 1e-15);
  EXPECT_NEAR(r.at("ND-PNS"), nd, 1e-15);
  EXPECT_NEAR(r.at("NI-PNS"), ni, 1e-15);
  EXPECT_EQ(r.method, Method::exact);
  EXPECT_FALSE(r.find("CD-PNS").has_value());
}

TEST(ExactOracle, EvidenceTruthIsConditionalRatio) {
  using O = PresetOracle;
  const Query q = preset_query();
  const auto r = truth_with_evidence(Scm::paper_bernoulli(), q, pn_evidence(q));
  // PN: condition on X = 1, Y = 1; with X exogenous this is Y_1 = 1.
  const double den = O::integrate([](double um, double uy) { return O::y_of(uy, 1, O::m_of(um, 1)) == 1; });
  const double num = O::integrate([](double um, double uy) {
    return O::y_of(uy, 0, O::m_of(um, 0)) == 0 && O::y_of(uy, 1, O::m_of(um, 1)) == 1;
  });
  EXPECT_NEAR(r.at("T-PNS"), num / den, 1e-14);
  EXPECT_EQ(r.case_flag, CaseFlag::A);
}

TEST(MonteCarlo, AgreesWithExactWithinStandardErrors) {
  const Scm scm = Scm::paper_bernoulli();
  Query q = preset_query();
  q.m_fixed = OrderedValue(1.0);
  const auto exact = truth_pns(scm, q);
  const auto mc = truth_pns(scm, q, TruthMethod::mc(1 << 20, 99));
  EXPECT_EQ(mc.method, Method::monte_carlo);
  for (const char* name : {"T-PNS", "ND-PNS", "NI-PNS", "CD-PNS"}) {
    const auto& v = mc.values;
    const auto it = std::find_if(v.begin(), v.end(), [&](const TruthValue& t) { return t.name == name; });
    ASSERT_NE(it, v.end());
    EXPECT_GT(it->se, 0.0);
    EXPECT_LT(std::abs(it->value - exact.at(name)), 5 * it->se + 1e-12) << name;
  }
}

TEST(MonteCarlo, ParallelEqualsSerialReference) {
  const Scm scm = Scm::paper_bernoulli();
  const Query q = preset_query();
  const auto p = truth_pns(scm, q, TruthMethod::mc(200000, 4));
  const auto s = truth_pns_serial(scm, q, 200000, 4);
  for (std::size_t i = 0; i < p.values.size(); ++i) EXPECT_EQ(p.values[i].value, s.values[i].value);
  const auto e = pn_evidence(q);
  const auto pe = truth_with_evidence(scm, q, e, TruthMethod::mc(200000, 4));
  const auto se = truth_with_evidence_serial(scm, q, e, 200000, 4);
  EXPECT_EQ(pe.at("T-PNS"), se.at("T-PNS"));
  EXPECT_EQ(pe.samples, se.samples);
  EXPECT_LT(pe.samples, 200000u);
}

TEST(Sampling, DeterministicAndParallelInvariant) {
  const Scm scm = Scm::paper_bernoulli();
  const Dataset a = sample_observational(scm, 70000, 7);
  EXPECT_EQ(a, sample_observational(scm, 70000, 7));
  EXPECT_EQ(a, sample_observational_serial(scm, 70000, 7));
  EXPECT_FALSE(a == sample_observational(scm, 70000, 8));
  EXPECT_THROW(sample_observational(scm, 0, 1), UsageError);
}

TEST(Sampling, PresetColumnMeans) {
  const Dataset d = sample_observational(Scm::paper_bernoulli(), 1000000, 11);
  double sx = 0, sm = 0, sy = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    sx += d.x()[i];
    sm += d.m()[i];
    sy += d.y()[i];
  }
  const double n = static_cast<double>(d.size());
  const double pm = 0.5 * (sig(1) + sig(1.5));
  const double py = 0.5 * (sig(1) * sig(1.5) + (1 - sig(1)) * sig(1)) +
                    0.5 * (sig(1.5) * sig(2) + (1 - sig(1.5)) * sig(1.5));
  EXPECT_NEAR(sx / n, 0.5, 0.002);
  EXPECT_NEAR(sm / n, pm, 0.002);
  EXPECT_NEAR(sy / n, py, 0.002);
}

TEST(AnalyticCdf, PresetConditionals) {
  const AnalyticCdf m(Scm::paper_bernoulli());
  EXPECT_NEAR(m.cdf_y_given_xm(1, 1, 0, Strictness::strict), 1 - sig(1.5), 1e-15);
  EXPECT_NEAR(m.mediator_pmf(1, 0), sig(1), 1e-15);
  EXPECT_NEAR(m.cdf_y_given_x(1, 0, Strictness::inclusive), 1.0, 1e-15);
  EXPECT_EQ(m.rho(1, 0, 0), m.cdf_y_given_x(1, 0, Strictness::strict));
  EXPECT_NEAR(m.joint_cdf_ym_given_x(1, 1, 1, Strictness::strict, Strictness::strict),
              (1 - sig(1.5)) * (1 - sig(1.5)), 1e-15);
  EXPECT_NEAR(m.union_cdf_ym_given_x(1, 1, 1),
              (1 - sig(1.5)) + sig(1.5) * (1 - sig(2)), 1e-15);
  EXPECT_THROW(m.cdf_y_given_x(1, 3, Strictness::strict), PositivityError);
}

TEST(Effects, PresetMeanScale) {
  Query q = preset_query();
  q.m_fixed = OrderedValue(0.0);
  const auto e = effects(Scm::paper_bernoulli(), q);
  const double ey1 = sig(1.5) * sig(2) + (1 - sig(1.5)) * sig(1.5);
  const double ey0 = sig(1) * sig(1.5) + (1 - sig(1)) * sig(1);
  EXPECT_NEAR(e.te, ey1 - ey0, 1e-15);
  EXPECT_NEAR(*e.cde, sig(1.5) - sig(1), 1e-15);
  const double nde = sig(1) * sig(2) + (1 - sig(1)) * sig(1.5) - ey0;
  EXPECT_NEAR(e.nde, nde, 1e-15);
  EXPECT_NEAR(e.nde - e.nie_reverse, e.te, 1e-15);
}

TEST(Monotonicity, PresetPassesUnstructuredModelsOftenFail) {
  const auto r = check_monotonicity(Scm::paper_bernoulli());
  EXPECT_TRUE(r.ok());
  EXPECT_TRUE(r.assumption4_prime);
  EXPECT_TRUE(r.assumption5_prime);
  Rng rng(17);
  int failures = 0;
  for (int i = 0; i < 50; ++i) {
    const auto rep = check_monotonicity(random_threshold_scm(rng));
    if (!rep.ok()) {
      ++failures;
      EXPECT_FALSE(rep.violations.empty());
    }
  }
  EXPECT_GT(failures, 0);
}

TEST(Monotonicity, GeneratedModelsSatisfyTheirDesign) {
  Rng rng(23);
  int a1 = 0;
  for (int i = 0; i < 40; ++i) {
    EXPECT_TRUE(check_monotonicity(random_monotone_scm(rng)).ok());
    const auto lex = check_monotonicity(random_lexicographic_scm(rng));
    EXPECT_TRUE(lex.ok());
    a1 += lex.assumption_a1;
  }
  EXPECT_GT(a1, 20);
}

TEST(Oracle, ZeroMassEvidencePolicies) {
  // Preset outcome is binary: Y in [0.25, 0.75] never happens.
  const Scm scm = Scm::paper_bernoulli();
  const Query q = preset_query();
  const auto e = Evidence::with_outcome(OrderedValue(1.0), Interval(OrderedValue(0.25), OrderedValue(0.75), true));
  EXPECT_THROW(truth_with_evidence(scm, q, e), ConditioningError);
  const auto r = truth_with_evidence(scm, q, e, TruthMethod::exact(), ZeroMassPolicy::boundary_point);
  EXPECT_EQ(r.case_flag, CaseFlag::B);
  const AnalyticCdf m(scm);
  const auto f = natural_pns_with_evidence(m, q, e);
  EXPECT_EQ(f.triple.case_flag, CaseFlag::B);
  EXPECT_EQ(f.triple.t, r.at("T-PNS"));
  EXPECT_EQ(f.triple.nd, r.at("ND-PNS"));
  EXPECT_EQ(f.triple.ni, r.at("NI-PNS"));
  // Above every outcome there is no boundary unit at all.
  const auto above = Evidence::with_outcome(OrderedValue(1.0), Interval(OrderedValue(2.0), OrderedValue(3.0), true));
  EXPECT_THROW(truth_with_evidence(scm, q, above, TruthMethod::exact(), ZeroMassPolicy::boundary_point),
               ConditioningError);
}

TEST(Scm, DocumentValidation) {
  auto doc = Scm::paper_bernoulli_json();
  doc["mediator"]["coef"] = {0.5, 1.0};
  EXPECT_THROW(Scm::from_json(doc), SchemaError);
  EXPECT_THROW(Scm::from_json(nlohmann::json::object()), SchemaError);
  EXPECT_THROW(Scm::preset("nope"), UsageError);
  EXPECT_NO_THROW(Scm::preset("paper-bernoulli"));
}
