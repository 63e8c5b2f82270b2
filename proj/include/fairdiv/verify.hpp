#pragma once

#include <functional>
#include <string>
#include <vector>

#include "fairdiv/core.hpp"
#include "fairdiv/lp.hpp"
#include "fairdiv/rng.hpp"

namespace fairdiv {

// Independent cross-checking oracles. Everything here recomputes results
// from first principles (exhaustive enumeration, exact rational
// arithmetic) and deliberately shares no code with the solvers it audits.

// Minimum over all n^m integral allocations of the max pairwise envy
// under `values`. Only sensible at desk scale (n^m <= ~10^7).
double min_integral_max_envy(const ValuationMatrix& values);

// Maximum utilitarian welfare over all integral allocations.
double max_integral_welfare(const ValuationMatrix& values);

// Exact optimum of a LinearProgram computed by a from-scratch rational
// simplex (GMP arithmetic, Bland's rule, guaranteed finite). Doubles are
// dyadic so the conversion to rationals is lossless.
double exact_lp_optimum(const LinearProgram& lp);

// One randomized oracle case: an association-inequality check plus a
// conditional-mean check. Returns the number of violated assertions.
long statcheck_case_violations(Stream& rng);

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double elapsed_s = 0.0;
};

// The full acceptance battery. Criteria run in order; each returns a
// pass/fail plus a one-line detail. `sink`, when set, receives results
// as they complete (used for live progress printing).
std::vector<CriterionResult> run_acceptance(
    std::uint64_t seed,
    const std::function<void(const CriterionResult&)>& sink = {});

}  // namespace fairdiv
