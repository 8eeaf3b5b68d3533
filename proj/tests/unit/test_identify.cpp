#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "medpoc/estimator.hpp"
#include "medpoc/identify.hpp"
#include "medpoc/oracle.hpp"
#include "medpoc/rng.hpp"
#include "medpoc/scm.hpp"

using namespace medpoc;

namespace {

double sig(double t) { return 1.0 / (1.0 + std::exp(-t)); }

// Preset Bernoulli model written out by hand: P(M=1|x) = sig(1 + x/2),
// P(Y=1|x,m) = sig(1 + x/2 + m/2).
struct Hand {
  double py1(double x, double m) const { return sig(1 + 0.5 * x + 0.5 * m); }
  double pm1(double x) const { return sig(1 + 0.5 * x); }
  double a() const { return 1 - (pm1(0) * py1(0, 1) + (1 - pm1(0)) * py1(0, 0)); }
  double b() const { return 1 - (pm1(1) * py1(1, 1) + (1 - pm1(1)) * py1(1, 0)); }
  double rho() const { return pm1(1) * (1 - py1(0, 1)) + (1 - pm1(1)) * (1 - py1(0, 0)); }
};

Query preset_query() {
  Query q;
  q.x_base = OrderedValue(0.0);
  q.x_alt = OrderedValue(1.0);
  q.y_threshold = OrderedValue(1.0);
  return q;
}

bool same(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST(NaturalFromTerms, MaxMinForms) {
  auto p = natural_from_terms(0.3, 0.1, 0.2);
  EXPECT_DOUBLE_EQ(p.nd, 0.1);
  EXPECT_DOUBLE_EQ(p.ni, 0.1);
  EXPECT_DOUBLE_EQ(p.t, 0.2);
  EXPECT_DOUBLE_EQ(*p.prop_nd, 0.5);
  p = natural_from_terms(0.3, 0.1, 0.05);  // rho below b: all indirect
  EXPECT_EQ(p.nd, 0.0);
  EXPECT_DOUBLE_EQ(p.ni, 0.2);
  p = natural_from_terms(0.3, 0.1, 0.5);  // rho above a: all direct
  EXPECT_DOUBLE_EQ(p.nd, 0.2);
  EXPECT_EQ(p.ni, 0.0);
  p = natural_from_terms(0.1, 0.3, 0.2);  // negative total clips to zero
  EXPECT_EQ(p.t, 0.0);
  EXPECT_FALSE(p.prop_nd.has_value());
  EXPECT_FALSE(p.prop_ni.has_value());
  EXPECT_EQ(p.case_flag, CaseFlag::unconditional);
}

TEST(NaturalWithEvidence, CaseAIsScaledClippedGammas) {
  EvidenceTerms e;
  e.a = 0.6;
  e.b = 0.2;
  e.rho = 0.35;
  e.l = 0.25;
  e.u = 0.5;
  auto p = natural_with_evidence_from_terms(e);
  EXPECT_EQ(p.case_flag, CaseFlag::A);
  EXPECT_DOUBLE_EQ(e.delta, 0.25);
  EXPECT_DOUBLE_EQ(e.gamma_t, 0.5 - 0.25);
  EXPECT_DOUBLE_EQ(e.gamma_d, 0.35 - 0.25);
  EXPECT_DOUBLE_EQ(e.gamma_i, 0.5 - 0.35);
  EXPECT_DOUBLE_EQ(p.t, 1.0);
  EXPECT_DOUBLE_EQ(p.nd, 0.4);
  EXPECT_DOUBLE_EQ(p.ni, 0.6);
}

TEST(NaturalWithEvidence, CaseBIndicators) {
  EvidenceTerms e;
  e.a = 0.5;
  e.b = 0.2;
  e.l = e.u = 0.3;
  e.rho = 0.4;  // l below rho: direct
  auto p = natural_with_evidence_from_terms(e);
  EXPECT_EQ(p.case_flag, CaseFlag::B);
  EXPECT_EQ(p.t, 1.0);
  EXPECT_EQ(p.nd, 1.0);
  EXPECT_EQ(p.ni, 0.0);
  e.rho = 0.25;  // rho at or below l: indirect
  p = natural_with_evidence_from_terms(e);
  EXPECT_EQ(p.nd, 0.0);
  EXPECT_EQ(p.ni, 1.0);
  e.rho = 0.3;
  p = natural_with_evidence_from_terms(e);
  EXPECT_EQ(p.ni, 1.0);
  e.l = e.u = 0.5;  // l not below a
  p = natural_with_evidence_from_terms(e);
  EXPECT_EQ(p.t, 0.0);
  e.l = e.u = 0.1;  // l below b
  p = natural_with_evidence_from_terms(e);
  EXPECT_EQ(p.t, 0.0);
}

TEST(CdWithEvidence, BothCases) {
  auto r = cd_with_evidence_from_terms(0.6, 0.2, 0.1, 0.5);
  EXPECT_EQ(r.case_flag, CaseFlag::A);
  EXPECT_DOUBLE_EQ(r.value, (0.5 - 0.2) / 0.4);
  r = cd_with_evidence_from_terms(0.6, 0.2, 0.7, 0.9);
  EXPECT_EQ(r.value, 0.0);
  r = cd_with_evidence_from_terms(0.6, 0.2, 0.3, 0.3);
  EXPECT_EQ(r.case_flag, CaseFlag::B);
  EXPECT_EQ(r.value, 1.0);
  r = cd_with_evidence_from_terms(0.6, 0.2, 0.6, 0.6);
  EXPECT_EQ(r.value, 0.0);
}

TEST(PresetModel, ClosedFormsFromHandWrittenProbabilities) {
  const Hand h;
  const AnalyticCdf model(Scm::paper_bernoulli());
  Query q = preset_query();
  const auto p = natural_pns(model, q);
  EXPECT_NEAR(p.t, h.a() - h.b(), 1e-15);
  EXPECT_NEAR(p.nd, std::min(h.a(), h.rho()) - h.b(), 1e-15);
  EXPECT_NEAR(p.ni, h.a() - std::max(h.b(), h.rho()), 1e-15);
  EXPECT_NEAR(p.t, 0.074957, 1e-6);
  EXPECT_NEAR(p.nd, 0.067472, 1e-6);
  EXPECT_NEAR(p.ni, 0.007485, 1e-6);

  const auto pn = pn_family(model, q);
  EXPECT_NEAR(pn.triple.t, (h.a() - h.b()) / (1 - h.b()), 1e-15);
  EXPECT_NEAR(pn.triple.t, 0.086230, 1e-6);
  const auto ps = ps_family(model, q);
  EXPECT_NEAR(ps.triple.t, (h.a() - h.b()) / h.a(), 1e-15);
  EXPECT_NEAR(ps.triple.t, 0.364411, 1e-6);

  q.m_fixed = OrderedValue(1.0);
  EXPECT_NEAR(cd_pns(model, q), h.py1(1, 1) - h.py1(0, 1), 1e-15);
  const auto e = Evidence::with_mediator_value(OrderedValue(1.0), OrderedValue(1.0), Interval::point(1.0));
  const auto cde = cd_pns_with_evidence(model, q, e);
  EXPECT_NEAR(cde.value, (h.py1(1, 1) - h.py1(0, 1)) / h.py1(1, 1), 1e-15);
  EXPECT_NEAR(cde.value, 0.0717789, 1e-6);
}

TEST(FullInterval, ReducesBitwise) {
  Rng rng(5);
  for (int k = 0; k < 30; ++k) {
    std::vector<double> x(300), m(300), y(300);
    for (std::size_t i = 0; i < 300; ++i) {
      x[i] = static_cast<double>(rng.below(2));
      m[i] = static_cast<double>(rng.below(2));
      y[i] = static_cast<double>(rng.below(4));
    }
    const EmpiricalCdf model(Dataset(Schema{}, x, m, y));
    Query q = preset_query();
    q.y_threshold = OrderedValue(1.0 + rng.below(3));
    q.m_fixed = OrderedValue(static_cast<double>(rng.below(2)));
    const auto base = natural_pns(model, q);
    for (double xs : {0.0, 1.0}) {
      auto r = natural_pns_with_evidence(model, q, Evidence::with_outcome(OrderedValue(xs), Interval::full()));
      EXPECT_TRUE(same(base.t, r.triple.t) && same(base.nd, r.triple.nd) && same(base.ni, r.triple.ni));
      auto r2 = natural_pns_with_mediator_evidence(
          model, q, Evidence::with_mediator_interval(OrderedValue(xs), Interval::full(), Interval::full()));
      EXPECT_TRUE(same(base.t, r2.triple.t) && same(base.nd, r2.triple.nd));
      auto c = cd_pns_with_evidence(
          model, q, Evidence::with_mediator_value(OrderedValue(xs), *q.m_fixed, Interval::full()));
      EXPECT_TRUE(same(cd_pns(model, q), c.value));
    }
  }
}

TEST(Identify, ContractErrorsAndWarnings) {
  const AnalyticCdf model(Scm::paper_bernoulli());
  Query q = preset_query();
  EXPECT_THROW(cd_pns(model, q), UsageError);
  const auto eo = Evidence::with_outcome(OrderedValue(1.0), Interval::full());
  EXPECT_THROW(natural_pns_with_mediator_evidence(model, q, eo), InvalidEvidenceError);
  q.m_fixed = OrderedValue(0.0);
  EXPECT_THROW(cd_pns_with_evidence(model, q, eo), InvalidEvidenceError);
  const auto mi = Evidence::with_mediator_interval(OrderedValue(1.0), Interval::point(1.0), Interval::full());
  EXPECT_THROW(natural_pns_with_evidence(model, q, mi), InvalidEvidenceError);
  const auto r = natural_pns_with_mediator_evidence(model, q, mi);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_EQ(r.warnings[0], kAssumptionA1Warning);
}

TEST(Identify, FamilyEvidenceShapes) {
  const Query q = preset_query();
  const auto pn = pn_evidence(q);
  EXPECT_EQ(pn.kind(), EvidenceKind::outcome_only);
  EXPECT_EQ(pn.x_star(), q.x_alt);
  EXPECT_EQ(pn.y_interval().lower(), q.y_threshold);
  EXPECT_FALSE(pn.y_interval().upper().has_value());
  const auto ps = ps_evidence(q);
  EXPECT_EQ(ps.x_star(), q.x_base);
  EXPECT_FALSE(ps.y_interval().lower().has_value());
  EXPECT_EQ(ps.y_interval().upper(), q.y_threshold);
  EXPECT_FALSE(ps.y_interval().upper_closed());
}

TEST(Estimator, ReportsNamedValues) {
  const Dataset d(Schema{}, {0, 0, 0, 1, 1, 1}, {0, 1, 1, 0, 1, 1}, {0, 0, 1, 1, 1, 0});
  Target t;
  t.query = preset_query();
  t.query.m_fixed = OrderedValue(1.0);
  auto e = estimate(d, t);
  ASSERT_TRUE(e.get("CD-PNS").has_value());
  EXPECT_DOUBLE_EQ(*e.get("T-PNS"), *e.get("ND-PNS") + *e.get("NI-PNS"));
  t.family = Family::pn;
  t.query.m_fixed.reset();
  e = estimate(d, t);
  EXPECT_TRUE(e.get("PN").has_value());
  EXPECT_FALSE(e.get("T-PNS").has_value());
  t.query.evidence = pn_evidence(t.query);
  EXPECT_THROW(estimate(d, t), UsageError);
  EXPECT_EQ(parse_family("ps"), Family::ps);
  EXPECT_THROW(parse_family("pq"), UsageError);
}
