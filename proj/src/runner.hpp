#ifndef FDL_RUNNER_HPP
#define FDL_RUNNER_HPP

#include "invariants.hpp"
#include "scenario.hpp"

namespace fdl::run {

struct RunOutcome {
    uint64_t rep = 0;
    uint64_t seed = 0;
    sim::Transcript transcript;
    std::vector<sim::Verdict> verdicts;  // invariant + expectation verdicts
    bool pass = false;
};

struct ScenarioResult {
    scn::Scenario scenario;
    std::vector<RunOutcome> runs;
    bool pass = false;

    std::string report_json() const;
    std::string transcripts_jsonl() const;
};

// Executes all repetitions; repetition k runs with seed + k.
ScenarioResult run_scenario(const scn::Scenario& scenario);

// Identifier block echoed into every report for reproducibility.
std::string build_info_json();

}  // namespace fdl::run

#endif
