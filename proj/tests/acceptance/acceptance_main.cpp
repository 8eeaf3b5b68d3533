// Acceptance suite: one line per criterion, nonzero exit on any failure.
#include <cstdio>
#include <cstring>
#include <iostream>

#include "medpoc/verification.hpp"

int main(int argc, char** argv) {
  medpoc::VerifyOptions opts;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--quick") == 0) opts.quick = true;
  }
  bool ok = true;
  using Fn = medpoc::CriterionResult (*)(const medpoc::VerifyOptions&);
  const Fn criteria[] = {
      medpoc::criterion_exact_truths,      medpoc::criterion_estimation_protocol,
      medpoc::criterion_pn_family,         medpoc::criterion_decomposition,
      medpoc::criterion_oracle_equivalence, medpoc::criterion_reductions,
      medpoc::criterion_coverage,          medpoc::criterion_excluded,
  };
  for (Fn f : criteria) {
    medpoc::CriterionResult r;
    try {
      r = f(opts);
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    std::cout << medpoc::format_criterion_line(r) << std::endl;
    ok = ok && r.passed;
  }
  std::cout << (ok ? "acceptance: all criteria passed" : "acceptance: FAILED") << std::endl;
  return ok ? 0 : 1;
}
