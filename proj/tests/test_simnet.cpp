#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "invariants.hpp"

using namespace fdl;
using namespace fdl::sim;

static RunConfig base_config(arbiter::Mode mode, uint64_t n, uint64_t seed) {
    RunConfig cfg;
    cfg.session.mode = mode;
    cfg.session.n = n;
    cfg.session.eta = 64;
    cfg.session.prices = msg::Prices{2, 5, 10};
    cfg.session.contract_timers = arbiter::ContractTimers::defaults(n, 1);
    cfg.seed = seed;
    return cfg;
}

static bool all_pass(const std::vector<Verdict>& vs) {
    for (const auto& v : vs)
        if (!v.pass) return false;
    return true;
}

TEST_CASE("honest download run settles with completeness balances") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 7);
    Transcript t = run(cfg);
    CHECK(t.final_phase == "sold");
    CHECK(t.final_ctr == 4);
    CHECK_FALSE(t.liveness_failure);
    CHECK(t.final_escrow == 0);

    int64_t dp = int64_t(t.final_balances[PartyId::provider]) -
                 int64_t(t.initial_balances[PartyId::provider]);
    int64_t dd = int64_t(t.final_balances[PartyId::deliverer]) -
                 int64_t(t.initial_balances[PartyId::deliverer]);
    int64_t dc = int64_t(t.final_balances[PartyId::consumer]) -
                 int64_t(t.initial_balances[PartyId::consumer]);
    CHECK(dp == 4 * (5 - 2));
    CHECK(dd == 4 * 2);
    CHECK(dc == -4 * 5);

    // Consumer decrypted the real content.
    REQUIRE(t.consumer_output.size() == 4);
    for (size_t i = 0; i < 4; ++i) CHECK(t.consumer_output[i] == t.leaves[i]);

    auto verdicts = check_invariants(t, cfg);
    for (const auto& v : verdicts) {
        CAPTURE(v.name);
        CAPTURE(v.detail);
        CHECK(v.pass);
    }
}

TEST_CASE("honest stream run settles with completeness balances and O(1) latency") {
    RunConfig cfg = base_config(arbiter::Mode::stream, 4, 9);
    Transcript t = run(cfg);
    CHECK(t.final_phase == "sold");
    CHECK(t.final_ctr == 4);
    CHECK(t.final_escrow == 0);
    CHECK(int64_t(t.final_balances[PartyId::provider]) -
              int64_t(t.initial_balances[PartyId::provider]) ==
          4 * 3);
    CHECK(int64_t(t.final_balances[PartyId::deliverer]) -
              int64_t(t.initial_balances[PartyId::deliverer]) ==
          8);
    REQUIRE(t.consumer_decrypt_rounds.size() == 4);
    auto verdicts = check_invariants(t, cfg);
    for (const auto& v : verdicts) {
        CAPTURE(v.name);
        CAPTURE(v.detail);
        CHECK(v.pass);
    }
    bool saw_latency = false;
    for (const auto& v : verdicts) saw_latency = saw_latency || v.name == "stream-latency";
    CHECK(saw_latency);
}

TEST_CASE("same scenario and seed reproduce the transcript byte for byte") {
    for (auto mode : {arbiter::Mode::download, arbiter::Mode::stream}) {
        RunConfig cfg = base_config(mode, 4, 1234);
        Transcript a = run(cfg);
        Transcript b = run(cfg);
        CHECK(a.to_jsonl() == b.to_jsonl());
        RunConfig other = cfg;
        other.seed = 1235;
        Transcript c = run(other);
        CHECK(a.to_jsonl() != c.to_jsonl());
    }
}

TEST_CASE("byte counters equal the sum of envelope payload sizes") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 11);
    Transcript t = run(cfg);
    std::map<PartyId, uint64_t> sent;
    for (const auto& e : t.envelopes)
        if (e.from != PartyId::contract) sent[e.from] += e.size;
    for (const auto& [p, st] : t.stats) CHECK(st.bytes_sent == sent[p]);
}

TEST_CASE("honest channels deliver within delta rounds") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 13);
    cfg.session.delta = 2;
    cfg.session.party_timer = 4;
    cfg.session.contract_timers = arbiter::ContractTimers::defaults(4, 2);
    cfg.adversary.delay_all = true;
    Transcript t = run(cfg);
    for (const auto& e : t.envelopes) {
        CHECK(e.round_delivered > e.round_sent);
        CHECK(e.round_delivered <= e.round_sent + 2);
    }
    CHECK(t.final_phase == "sold");
    CHECK(t.final_ctr == 4);
    auto verdicts = check_invariants(t, cfg);
    CHECK(all_pass(verdicts));
}

TEST_CASE("mutation negative control: broken payout is caught by conservation") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 17);
    cfg.adversary.fault = arbiter::Fault::double_pay_deliverer;
    Transcript t = run(cfg);
    auto verdicts = check_invariants(t, cfg);
    bool conservation_failed = false;
    for (const auto& v : verdicts)
        if (v.name == "conservation") conservation_failed = !v.pass;
    CHECK(conservation_failed);
}

TEST_CASE("repeatable delivery: two sessions against one prepared deliverer") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 19);
    cfg.session.theta = 2;
    cfg.session.sessions = 2;
    Transcript t = run(cfg);
    REQUIRE(t.session_records.size() == 2);
    CHECK(t.session_records[0].outcome == "sold");
    CHECK(t.session_records[1].outcome == "sold");
    CHECK(t.session_records[0].ctr == 4);
    CHECK(t.session_records[1].ctr == 4);
    CHECK(t.final_escrow == 0);
    CHECK(t.consumer_output.size() == 8);
    // One sell message total: the prepared deliverer is reused.
    uint64_t sells = 0;
    for (const auto& e : t.envelopes)
        if (e.kind == msg::Kind::sell) ++sells;
    CHECK(sells == 1);
    CHECK(all_pass(check_invariants(t, cfg)));
}
