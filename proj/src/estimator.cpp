#include "medpoc/estimator.hpp"

namespace medpoc {

const char* family_name(Family f) noexcept {
  switch (f) {
    case Family::pns: return "pns";
    case Family::pn: return "pn";
    case Family::ps: return "ps";
  }
  return "?";
}

Family parse_family(const std::string& s) {
  if (s == "pns") return Family::pns;
  if (s == "pn") return Family::pn;
  if (s == "ps") return Family::ps;
  throw UsageError("unknown family '" + s + "' (expected pns, pn or ps)");
}

std::optional<double> Estimate::get(const std::string& name) const {
  for (const auto& v : values) {
    if (v.name == name) return v.value;
  }
  return std::nullopt;
}

namespace {

void push_triple(Estimate& out, const PnsTriple& p, const char* t,
                 const char* nd, const char* ni) {
  out.values.push_back({t, p.t});
  out.values.push_back({nd, p.nd});
  out.values.push_back({ni, p.ni});
  out.values.push_back({"prop-ND", p.prop_nd});
  out.values.push_back({"prop-NI", p.prop_ni});
  out.case_flag = p.case_flag;
}

}  // namespace

Estimate evaluate(const CdfProvider& model, const Target& target) {
  const Query& q = target.query;
  Estimate out;
  if (target.family != Family::pns) {
    if (q.evidence) {
      throw UsageError("pn and ps families define their own evidence; drop the evidence flags");
    }
    const bool pn = target.family == Family::pn;
    EvidenceResult r = pn ? pn_family(model, q) : ps_family(model, q);
    push_triple(out, r.triple, pn ? "PN" : "PS", pn ? "ND-PN" : "ND-PS",
                pn ? "NI-PN" : "NI-PS");
    out.terms = r.terms;
    return out;
  }

  if (!q.evidence) {
    push_triple(out, natural_pns(model, q), "T-PNS", "ND-PNS", "NI-PNS");
    if (q.m_fixed) out.values.push_back({"CD-PNS", cd_pns(model, q)});
    return out;
  }

  const Evidence& e = *q.evidence;
  switch (e.kind()) {
    case EvidenceKind::mediator_value: {
      CdEvidenceResult r = cd_pns_with_evidence(model, q, e);
      out.values.push_back({"CD-PNS", r.value});
      out.case_flag = r.case_flag;
      out.terms = r.terms;
      break;
    }
    case EvidenceKind::outcome_only: {
      EvidenceResult r = natural_pns_with_evidence(model, q, e);
      push_triple(out, r.triple, "T-PNS", "ND-PNS", "NI-PNS");
      out.terms = r.terms;
      break;
    }
    case EvidenceKind::mediator_interval: {
      EvidenceResult r = natural_pns_with_mediator_evidence(model, q, e);
      push_triple(out, r.triple, "T-PNS", "ND-PNS", "NI-PNS");
      out.terms = r.terms;
      out.warnings = r.warnings;
      break;
    }
  }
  return out;
}

Estimate estimate(const Dataset& d, const Target& target) {
  if (target.query.stratum.empty()) return evaluate(EmpiricalCdf(d), target);
  return evaluate(EmpiricalCdf(stratify(d, target.query.stratum)), target);
}

}  // namespace medpoc
