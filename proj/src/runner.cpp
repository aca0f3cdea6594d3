#include "runner.hpp"

#include "json.hpp"

namespace fdl::run {

using json = nlohmann::ordered_json;
using arbiter::PartyId;

std::string build_info_json() {
    json j;
    j["library"] = "fairdeliver 1.0.0";
    j["hash"] = "SHA-256";
    j["signature"] = "Ed25519";
    j["group"] = "NIST P-384";
    j["scenario_schema"] = 1;
    j["report_schema"] = 1;
    j["transcript_schema"] = 1;
    return j.dump();
}

namespace {

// Expectation checks become verdicts alongside the invariant checks.
void append_expectations(const scn::Scenario& s, const sim::Transcript& t,
                         std::vector<sim::Verdict>& verdicts) {
    const auto& e = s.expect;
    auto add = [&](const std::string& name, bool pass, const std::string& detail) {
        verdicts.push_back(sim::Verdict{name, "scenario expectation", pass, detail});
    };
    if (e.outcome) add("expect-outcome", t.final_phase == *e.outcome,
                       "final phase " + t.final_phase + ", expected " + *e.outcome);
    if (e.ctr)
        add("expect-ctr", t.final_ctr == *e.ctr,
            "ctr " + std::to_string(t.final_ctr) + ", expected " + std::to_string(*e.ctr));
    if (e.plt) add("expect-plt", t.final_plt == *e.plt, t.final_plt ? "plt set" : "plt clear");
    bool pom = false, wrk = false;
    for (const auto& rec : t.session_records) {
        pom = pom || rec.pom_accepted;
        wrk = wrk || rec.wrong_rk_accepted;
    }
    if (e.pom_accepted)
        add("expect-pom", pom == *e.pom_accepted,
            pom ? "misbehavior proof accepted" : "no misbehavior proof accepted");
    if (e.wrong_rk_accepted)
        add("expect-wrong-rk", wrk == *e.wrong_rk_accepted,
            wrk ? "cover complaint accepted" : "no cover complaint accepted");
    if (e.zero_escrow)
        add("expect-zero-escrow", (t.final_escrow == 0) == *e.zero_escrow,
            "escrow " + std::to_string(t.final_escrow));
}

bool overall_pass(const scn::Scenario& s, const std::vector<sim::Verdict>& verdicts) {
    for (const auto& v : verdicts) {
        bool expect_fail = s.expect.conservation_violated && v.name == "conservation";
        if (expect_fail ? v.pass : !v.pass) return false;
    }
    return true;
}

}  // namespace

ScenarioResult run_scenario(const scn::Scenario& scenario) {
    ScenarioResult result;
    result.scenario = scenario;
    result.pass = true;
    for (uint64_t rep = 0; rep < scenario.repetitions; ++rep) {
        RunOutcome outcome;
        outcome.rep = rep;
        outcome.seed = scenario.run.seed + rep;
        sim::RunConfig cfg = scenario.run;
        cfg.seed = outcome.seed;
        outcome.transcript = sim::run(cfg);
        outcome.verdicts = sim::check_invariants(outcome.transcript, cfg);
        append_expectations(scenario, outcome.transcript, outcome.verdicts);
        outcome.pass = overall_pass(scenario, outcome.verdicts);
        result.pass = result.pass && outcome.pass;
        result.runs.push_back(std::move(outcome));
    }
    return result;
}

std::string ScenarioResult::report_json() const {
    json j;
    j["schema"] = 1;
    j["build"] = json::parse(build_info_json());
    json sj;
    sj["name"] = scenario.name;
    sj["mode"] = arbiter::mode_name(scenario.run.session.mode);
    sj["n"] = scenario.run.session.n;
    sj["eta"] = scenario.run.session.eta;
    sj["prices"] = {{"delivery", scenario.run.session.prices.delivery},
                    {"content", scenario.run.session.prices.content},
                    {"penalty", scenario.run.session.prices.penalty}};
    uint64_t raw_len = scenario.run.content_length.value_or(scenario.run.session.n *
                                                            scenario.run.session.eta);
    sj["content_length"] = raw_len;
    sj["effective_chunks"] = (raw_len + scenario.run.session.eta - 1) / scenario.run.session.eta;
    sj["padded_chunks"] = scenario.run.session.n;
    sj["theta"] = scenario.run.session.theta;
    sj["sessions"] = scenario.run.session.sessions;
    sj["delta"] = scenario.run.session.delta;
    sj["seed"] = scenario.run.seed;
    sj["repetitions"] = scenario.repetitions;
    json corrupt = json::array();
    for (PartyId p : scenario.run.adversary.corrupt) corrupt.push_back(arbiter::party_name(p));
    sj["corrupt"] = corrupt;
    j["scenario"] = sj;

    json runs_json = json::array();
    uint64_t passed = 0;
    for (const auto& r : runs) {
        json rj;
        rj["rep"] = r.rep;
        rj["seed"] = r.seed;
        rj["pass"] = r.pass;
        json verdicts = json::array();
        for (const auto& v : r.verdicts) {
            verdicts.push_back({{"name", v.name},
                                {"property", v.property},
                                {"pass", v.pass},
                                {"detail", v.detail}});
        }
        rj["verdicts"] = verdicts;
        json fin;
        fin["phase"] = r.transcript.final_phase;
        fin["ctr"] = r.transcript.final_ctr;
        fin["plt"] = r.transcript.final_plt;
        json balances;
        for (const auto& [p, v] : r.transcript.final_balances)
            balances[arbiter::party_name(p)] = v;
        fin["balances"] = balances;
        fin["escrow"] = r.transcript.final_escrow;
        rj["final"] = fin;
        json counters;
        counters["rounds"] = r.transcript.last_round;
        counters["onchain_messages"] = r.transcript.contract_accepted_messages;
        counters["onchain_bytes"] = r.transcript.contract_accepted_bytes;
        json per_party;
        for (const auto& [p, st] : r.transcript.stats)
            per_party[arbiter::party_name(p)] = {{"bytes_sent", st.bytes_sent},
                                                 {"bytes_received", st.bytes_received},
                                                 {"halt_round", st.halt_round}};
        counters["parties"] = per_party;
        rj["counters"] = counters;
        json sessions = json::array();
        for (const auto& s : r.transcript.session_records) {
            json srec;
            srec["nonce"] = s.nonce;
            srec["outcome"] = s.outcome;
            srec["ctr"] = s.ctr;
            srec["initiated_round"] = s.initiated_round;
            srec["settled_round"] = s.settled_round;
            if (s.plt) srec["plt"] = true;
            if (s.pom_accepted) srec["pom_accepted"] = true;
            if (s.wrong_rk_accepted) srec["wrong_rk_accepted"] = true;
            sessions.push_back(srec);
        }
        rj["sessions"] = sessions;
        json events = json::array();
        for (const auto& ev : r.transcript.events) {
            json erec;
            erec["round"] = ev.round;
            erec["event"] = msg::kind_name(ev.kind);
            if (ev.ctr != 0) erec["index"] = ev.ctr;
            events.push_back(erec);
        }
        rj["events"] = events;
        rj["decrypt_rounds"] = r.transcript.consumer_decrypt_rounds;
        runs_json.push_back(rj);
        if (r.pass) ++passed;
    }
    j["runs"] = runs_json;
    j["summary"] = {{"runs", runs.size()},
                    {"passed", passed},
                    {"failed", runs.size() - passed},
                    {"pass", pass}};
    return j.dump(2);
}

std::string ScenarioResult::transcripts_jsonl() const {
    std::string out;
    for (const auto& r : runs) out += r.transcript.to_jsonl();
    return out;
}

}  // namespace fdl::run
