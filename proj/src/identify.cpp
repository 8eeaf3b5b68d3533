#include "medpoc/identify.hpp"

#include <algorithm>

namespace medpoc {

const char* case_flag_name(CaseFlag f) noexcept {
  switch (f) {
    case CaseFlag::unconditional: return "unconditional";
    case CaseFlag::A: return "A";
    case CaseFlag::B: return "B";
  }
  return "?";
}

void fill_proportions(PnsTriple& p) {
  if (p.t > 0.0) {
    p.prop_nd = p.nd / p.t;
    p.prop_ni = p.ni / p.t;
  } else {
    p.prop_nd.reset();
    p.prop_ni.reset();
  }
}

PnsTriple natural_from_terms(double a, double b, double rho) {
  PnsTriple p;
  p.nd = std::max(std::min(a, rho) - b, 0.0);
  p.ni = std::max(a - std::max(b, rho), 0.0);
  p.t = p.nd + p.ni;
  p.case_flag = CaseFlag::unconditional;
  fill_proportions(p);
  return p;
}

// With l = 0 and u = 1 every expression below collapses to the unconditional
// form operation by operation, so the full-interval reduction is bitwise.
PnsTriple natural_with_evidence_from_terms(EvidenceTerms& t) {
  const double au = std::min(t.a, t.u);
  const double bl = std::max(t.b, t.l);
  t.gamma_t = au - bl;
  t.gamma_d = std::min(au, t.rho) - bl;
  t.gamma_i = au - std::max(bl, t.rho);
  t.delta = t.u - t.l;

  PnsTriple p;
  if (t.delta > 0.0) {
    p.case_flag = CaseFlag::A;
    p.nd = std::max(t.gamma_d / t.delta, 0.0);
    p.ni = std::max(t.gamma_i / t.delta, 0.0);
  } else {
    // Degenerate evidence: the limit of the ratio at the boundary point l.
    p.case_flag = CaseFlag::B;
    const bool total = t.b <= t.l && t.l < t.a;
    p.nd = total && t.l < t.rho ? 1.0 : 0.0;
    p.ni = total && t.rho <= t.l ? 1.0 : 0.0;
  }
  p.t = p.nd + p.ni;
  fill_proportions(p);
  return p;
}

CdEvidenceResult cd_with_evidence_from_terms(double a, double b, double l,
                                             double u) {
  CdEvidenceResult r;
  r.terms.a = a;
  r.terms.b = b;
  r.terms.l = l;
  r.terms.u = u;
  r.terms.beta = u - l;
  r.terms.alpha = std::min(a, u) - std::max(b, l);
  if (r.terms.beta > 0.0) {
    r.case_flag = CaseFlag::A;
    r.value = std::max(r.terms.alpha / r.terms.beta, 0.0);
  } else {
    r.case_flag = CaseFlag::B;
    r.value = b <= l && l < a ? 1.0 : 0.0;
  }
  return r;
}

namespace {

const OrderedValue& require_m(const Query& q) {
  if (!q.m_fixed) {
    throw UsageError("controlled-direct quantities need a fixed mediator level");
  }
  return *q.m_fixed;
}

void require_kind(const Evidence& e, EvidenceKind kind) {
  if (e.kind() != kind) {
    throw InvalidEvidenceError(std::string("expected evidence of kind ") +
                               evidence_kind_name(kind) + ", got " +
                               evidence_kind_name(e.kind()));
  }
}

Strictness upper_strictness(const Interval& i) {
  return i.upper_closed() ? Strictness::inclusive : Strictness::strict;
}

}  // namespace

double cd_pns(const CdfProvider& model, const Query& q) {
  const double m = require_m(q).value();
  const double y = q.y_threshold.value();
  const double a = model.cdf_y_given_xm(y, q.x_base.value(), m, Strictness::strict);
  const double b = model.cdf_y_given_xm(y, q.x_alt.value(), m, Strictness::strict);
  return std::max(a - b, 0.0);
}

PnsTriple natural_pns(const CdfProvider& model, const Query& q) {
  const double y = q.y_threshold.value();
  const double xb = q.x_base.value();
  const double xa = q.x_alt.value();
  const double a = model.cdf_y_given_x(y, xb, Strictness::strict);
  const double b = model.cdf_y_given_x(y, xa, Strictness::strict);
  const double r = model.rho(y, xb, xa);
  return natural_from_terms(a, b, r);
}

CdEvidenceResult cd_pns_with_evidence(const CdfProvider& model, const Query& q,
                                      const Evidence& e) {
  require_kind(e, EvidenceKind::mediator_value);
  const double m = require_m(q).value();
  const double y = q.y_threshold.value();
  const double a = model.cdf_y_given_xm(y, q.x_base.value(), m, Strictness::strict);
  const double b = model.cdf_y_given_xm(y, q.x_alt.value(), m, Strictness::strict);
  const double xs = e.x_star().value();
  const double ms = e.m_star()->value();
  const Interval& iy = e.y_interval();
  const double l =
      model.cdf_y_given_xm(iy.lower_threshold(), xs, ms, Strictness::strict);
  const double u =
      model.cdf_y_given_xm(iy.upper_threshold(), xs, ms, upper_strictness(iy));
  return cd_with_evidence_from_terms(a, b, l, u);
}

namespace {

EvidenceTerms natural_base_terms(const CdfProvider& model, const Query& q) {
  const double y = q.y_threshold.value();
  const double xb = q.x_base.value();
  const double xa = q.x_alt.value();
  EvidenceTerms t;
  t.a = model.cdf_y_given_x(y, xb, Strictness::strict);
  t.b = model.cdf_y_given_x(y, xa, Strictness::strict);
  t.rho = model.rho(y, xb, xa);
  return t;
}

}  // namespace

EvidenceResult natural_pns_with_evidence(const CdfProvider& model,
                                         const Query& q, const Evidence& e) {
  require_kind(e, EvidenceKind::outcome_only);
  EvidenceResult r;
  r.terms = natural_base_terms(model, q);
  const double xs = e.x_star().value();
  const Interval& iy = e.y_interval();
  r.terms.l = model.cdf_y_given_x(iy.lower_threshold(), xs, Strictness::strict);
  r.terms.u =
      model.cdf_y_given_x(iy.upper_threshold(), xs, upper_strictness(iy));
  r.triple = natural_with_evidence_from_terms(r.terms);
  return r;
}

EvidenceResult natural_pns_with_mediator_evidence(const CdfProvider& model,
                                                  const Query& q,
                                                  const Evidence& e) {
  require_kind(e, EvidenceKind::mediator_interval);
  EvidenceResult r;
  r.terms = natural_base_terms(model, q);
  const double xs = e.x_star().value();
  const Interval& iy = e.y_interval();
  const Interval& im = *e.m_interval();
  // Upper: joint box below (y_u, m_u).  Lower: everything with Y below y_l
  // or M below m_l, which the chain order places before the evidence set.
  r.terms.u = model.joint_cdf_ym_given_x(iy.upper_threshold(),
                                         im.upper_threshold(), xs,
                                         upper_strictness(iy),
                                         upper_strictness(im));
  r.terms.l = model.union_cdf_ym_given_x(iy.lower_threshold(),
                                         im.lower_threshold(), xs);
  r.triple = natural_with_evidence_from_terms(r.terms);
  r.warnings.emplace_back(kAssumptionA1Warning);
  return r;
}

Evidence pn_evidence(const Query& q) {
  return Evidence::with_outcome(q.x_alt,
                                Interval(q.y_threshold, std::nullopt, false));
}

Evidence ps_evidence(const Query& q) {
  return Evidence::with_outcome(q.x_base,
                                Interval(std::nullopt, q.y_threshold, false));
}

EvidenceResult pn_family(const CdfProvider& model, const Query& q) {
  return natural_pns_with_evidence(model, q, pn_evidence(q));
}

EvidenceResult ps_family(const CdfProvider& model, const Query& q) {
  return natural_pns_with_evidence(model, q, ps_evidence(q));
}

}  // namespace medpoc
