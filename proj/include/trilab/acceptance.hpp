#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "trilab/config_surface.hpp"

namespace trilab::accept {

enum class Profile { quick, full };

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// Runs the acceptance battery, printing one PASS/FAIL line per criterion.
// `only` = 0 runs everything, otherwise the single criterion id.
// Returns the per-criterion results; callers exit nonzero on any failure.
std::vector<CriterionResult> run_acceptance(Profile profile, std::ostream& log, int only = 0);

// Oracle-agreement criterion with an injectable inner transform; the test
// suite feeds a broken transform and expects a FAIL verdict.
CriterionResult criterion_oracle_agreement(surf::SphereFtFn ft, long mc_samples = 100000);

}  // namespace trilab::accept
