#ifndef FDL_INVARIANTS_HPP
#define FDL_INVARIANTS_HPP

#include "simnet.hpp"

namespace fdl::sim {

struct Verdict {
    std::string name;
    std::string property;  // the guarantee being checked
    bool pass = false;
    std::string detail;
};

// Evaluates the fairness, confidentiality, timeliness and accounting
// guarantees against a finished run. Fairness verdicts for a party are
// only emitted when that party ran the honest machine.
std::vector<Verdict> check_invariants(const Transcript& t, const RunConfig& cfg);

}  // namespace fdl::sim

#endif
