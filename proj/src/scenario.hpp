#ifndef FDL_SCENARIO_HPP
#define FDL_SCENARIO_HPP

#include <stdexcept>

#include "simnet.hpp"

// Scenario files: JSON descriptions of one run configuration plus an
// adversary program and optional expected outcomes. The schema is
// documented in the README; violations raise ScenarioError.

namespace fdl::scn {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Expectations {
    std::optional<std::string> outcome;  // sold / not_sold
    std::optional<uint64_t> ctr;         // resolved value ("n" resolves to n)
    std::optional<bool> plt;
    std::optional<bool> pom_accepted;
    std::optional<bool> wrong_rk_accepted;
    std::optional<bool> zero_escrow;
    bool conservation_violated = false;  // negative-control wiring
};

struct Scenario {
    std::string name;
    sim::RunConfig run;
    uint64_t repetitions = 1;
    Expectations expect;
    bool ctr_expect_is_n = false;
};

struct Overrides {
    std::optional<uint64_t> seed;
    std::optional<std::string> mode;
    std::optional<uint64_t> n;
    std::optional<uint64_t> eta;
};

// Parses and validates; throws ScenarioError on any schema violation.
Scenario load_scenario(const std::string& json_text, const Overrides& overrides = {});
Scenario load_scenario_file(const std::string& path, const Overrides& overrides = {});

}  // namespace fdl::scn

#endif
