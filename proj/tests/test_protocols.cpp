#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "invariants.hpp"

using namespace fdl;
using namespace fdl::sim;

namespace {

RunConfig base_config(arbiter::Mode mode, uint64_t n, uint64_t seed) {
    RunConfig cfg;
    cfg.session.mode = mode;
    cfg.session.n = n;
    cfg.session.eta = 64;
    cfg.session.prices = msg::Prices{2, 5, 10};
    cfg.session.contract_timers = arbiter::ContractTimers::defaults(n, 1);
    cfg.seed = seed;
    return cfg;
}

int64_t delta_of(const Transcript& t, PartyId p) {
    return int64_t(t.final_balances.at(p)) - int64_t(t.initial_balances.at(p));
}

void expect_verdicts_pass(const Transcript& t, const RunConfig& cfg) {
    for (const auto& v : check_invariants(t, cfg)) {
        CAPTURE(v.name);
        CAPTURE(v.detail);
        CHECK(v.pass);
    }
}

}  // namespace

TEST_CASE("pad_content") {
    crypto::Rng rng(1);

    SUBCASE("100 bytes at eta=64 pads to 2 chunks") {
        auto padded = proto::pad_content(rng.next_bytes(100), 64);
        CHECK(padded.n == 2);
        CHECK(padded.original_len == 100);
        CHECK(padded.chunks[0].size() == 64);
        // Tail zero-padded.
        for (size_t i = 36; i < 64; ++i) CHECK(padded.chunks[1][i] == 0);
    }
    SUBCASE("exact multiple stays unchanged") {
        Bytes raw = rng.next_bytes(4 * 64);
        auto padded = proto::pad_content(raw, 64);
        CHECK(padded.n == 4);
        Bytes joined;
        for (const auto& c : padded.chunks) joined.insert(joined.end(), c.begin(), c.end());
        CHECK(joined == raw);
    }
    SUBCASE("three chunks' worth pads to four") {
        auto padded = proto::pad_content(rng.next_bytes(3 * 64), 64);
        CHECK(padded.n == 4);
        for (auto b : padded.chunks[3]) CHECK(b == 0);
    }
    SUBCASE("rejects empty input and bad eta") {
        CHECK_THROWS_AS(proto::pad_content(Bytes{}, 64), std::invalid_argument);
        CHECK_THROWS_AS(proto::pad_content(Bytes(10, 1), 48), std::invalid_argument);
    }
}

TEST_CASE("prepare phase: deliverer accepts only provider-signed chunks") {
    proto::SessionConfig sc;
    sc.n = 4;
    crypto::Rng rng(2);
    Digest contract_id = rng.next_digest();
    proto::Provider provider(sc, {}, contract_id, {rng.next_bytes(64), rng.next_bytes(64),
                                                   rng.next_bytes(64), rng.next_bytes(64)},
                             rng.fork("p"));
    // Every prepared chunk verifies under the provider's key.
    Digest cid = arbiter::derive_content_id(provider.root(), contract_id);
    auto start_out = provider.step({}, 0);
    REQUIRE(start_out.size() == 1);
    const auto* start = std::get_if<msg::Start>(&start_out[0].message.body);
    REQUIRE(start);
    vfd::ChunkValidator psi{start->pk_p, cid};
    for (const auto& c : provider.prepared_chunks()) CHECK(psi(c));

    proto::Deliverer deliverer(sc, {}, contract_id, rng.fork("d"));
    // Deliverer joins on the started event.
    auto out = deliverer.step(
        {{PartyId::contract,
          msg::Message{{}, msg::EvStarted{start->pk_p, start->root, 1, 4, start->prices}}}},
        1);
    REQUIRE(out.size() == 1);
    CHECK(msg::kind_of(out[0].message) == msg::Kind::join);

    SUBCASE("honest sell acknowledged with prepared") {
        out = deliverer.step(
            {{PartyId::provider, msg::Message{{}, msg::Sell{provider.prepared_chunks()}}}}, 2);
        REQUIRE(out.size() == 1);
        CHECK(msg::kind_of(out[0].message) == msg::Kind::prepared);
    }
    SUBCASE("tampered chunk refused") {
        auto chunks = provider.prepared_chunks();
        chunks[2].ciphertext[0] ^= 0x01;
        out = deliverer.step({{PartyId::provider, msg::Message{{}, msg::Sell{chunks}}}}, 2);
        CHECK(out.empty());
        CHECK(deliverer.halted());
    }
}

TEST_CASE("download: deliverer aborts mid-delivery, consumer keeps the paid prefix") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 21);
    cfg.adversary.corrupt = {PartyId::deliverer};
    cfg.adversary.deliverer.corrupt = true;
    cfg.adversary.deliverer.abort_after_chunks = 2;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "sold");
    CHECK(t.final_ctr == 2);
    CHECK(delta_of(t, PartyId::consumer) == -2 * 5);
    CHECK(delta_of(t, PartyId::deliverer) == 2 * 2);
    CHECK(delta_of(t, PartyId::provider) == 2 * (5 - 2));
    REQUIRE(t.consumer_output.size() == 2);
    CHECK(t.consumer_output[0] == t.leaves[0]);
    CHECK(t.consumer_output[1] == t.leaves[1]);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("download: seven of eight chunks delivered, revealed and decrypted") {
    RunConfig cfg = base_config(arbiter::Mode::download, 8, 22);
    cfg.adversary.corrupt = {PartyId::deliverer};
    cfg.adversary.deliverer.corrupt = true;
    cfg.adversary.deliverer.abort_after_chunks = 7;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "sold");
    CHECK(t.final_ctr == 7);
    // The consumer ends holding exactly the first seven original chunks.
    REQUIRE(t.consumer_output.size() == 7);
    for (size_t i = 0; i < 7; ++i) CHECK(t.consumer_output[i] == t.leaves[i]);
    CHECK(delta_of(t, PartyId::consumer) == -7 * 5);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("download: forged merkle tree kills the session at zero consumer spend") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 23);
    cfg.adversary.corrupt = {PartyId::provider};
    cfg.adversary.provider.corrupt = true;
    cfg.adversary.provider.bad_mtree_sig = true;
    Transcript t = run(cfg);
    CHECK(t.final_ctr == 0);
    CHECK(delta_of(t, PartyId::consumer) >= 0);
    CHECK(t.consumer_output.empty());
    // No receipt was ever issued.
    for (const auto& e : t.envelopes) CHECK(e.kind != msg::Kind::receipt);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("download: wrong chunk key yields an accepted proof of misbehavior") {
    RunConfig cfg = base_config(arbiter::Mode::download, 8, 25);
    cfg.adversary.corrupt = {PartyId::provider};
    cfg.adversary.provider.corrupt = true;
    cfg.adversary.provider.wrong_key_chunk = 3;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "not_sold");
    REQUIRE(t.session_records.size() == 1);
    CHECK(t.session_records[0].pom_accepted);
    // Full refund plus penalty.
    CHECK(delta_of(t, PartyId::consumer) == 10);
    CHECK(delta_of(t, PartyId::provider) == -10 - int64_t(t.final_ctr * 2));
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("download: corrupted reveal value is proven wrong") {
    RunConfig cfg = base_config(arbiter::Mode::download, 8, 27);
    cfg.adversary.corrupt = {PartyId::provider};
    cfg.adversary.provider.corrupt = true;
    cfg.adversary.provider.wrong_reveal_elem = 0;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "not_sold");
    REQUIRE(t.session_records.size() == 1);
    CHECK(t.session_records[0].pom_accepted);
    CHECK(delta_of(t, PartyId::consumer) == 10);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("download: short reveal cover triggers wrong_rk") {
    RunConfig cfg = base_config(arbiter::Mode::download, 8, 29);
    cfg.adversary.corrupt = {PartyId::provider};
    cfg.adversary.provider.corrupt = true;
    cfg.adversary.provider.reveal_short_cover = true;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "not_sold");
    REQUIRE(t.session_records.size() == 1);
    CHECK(t.session_records[0].wrong_rk_accepted);
    CHECK(delta_of(t, PartyId::consumer) == 10);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("download: provider that never reveals forfeits via timeout") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 31);
    cfg.adversary.corrupt = {PartyId::provider};
    cfg.adversary.provider.corrupt = true;
    cfg.adversary.provider.skip_reveal = true;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "not_sold");
    CHECK(delta_of(t, PartyId::consumer) == 10);  // refund + penalty
    CHECK(delta_of(t, PartyId::deliverer) == 4 * 2);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("download: consumer withholding receipts still pays for the receipted prefix") {
    RunConfig cfg = base_config(arbiter::Mode::download, 8, 33);
    cfg.adversary.corrupt = {PartyId::consumer};
    cfg.adversary.consumer.corrupt = true;
    cfg.adversary.consumer.withhold_receipts_from = 4;
    cfg.adversary.consumer.no_complaint = true;
    Transcript t = run(cfg);
    // Receipts 1..3 reached the deliverer; chunk 4 was sent unpaid.
    CHECK(t.final_ctr == 3);
    CHECK(delta_of(t, PartyId::deliverer) == 3 * 2);
    CHECK(delta_of(t, PartyId::provider) == 3 * (5 - 2));
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("download: sybil coalition pays the provider in full") {
    RunConfig cfg = base_config(arbiter::Mode::download, 4, 35);
    cfg.adversary.corrupt = {PartyId::deliverer, PartyId::consumer};
    cfg.adversary.deliverer.corrupt = true;
    cfg.adversary.deliverer.sybil = true;
    cfg.adversary.consumer.corrupt = true;
    cfg.adversary.consumer.gift_receipt_index = 4;
    cfg.adversary.consumer.early_delivered = true;
    cfg.adversary.consumer.no_complaint = true;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "sold");
    CHECK(t.final_ctr == 4);
    // No chunk ever crossed the wire...
    for (const auto& e : t.envelopes) CHECK(e.kind != msg::Kind::deliver);
    // ...yet the provider still nets the full spread.
    CHECK(delta_of(t, PartyId::provider) == 4 * (5 - 2));
    CHECK(delta_of(t, PartyId::deliverer) + delta_of(t, PartyId::consumer) == -4 * (5 - 2));
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("single-chunk sessions settle in both modes") {
    for (auto mode : {arbiter::Mode::download, arbiter::Mode::stream}) {
        RunConfig cfg = base_config(mode, 1, 47);
        Transcript t = run(cfg);
        CAPTURE(arbiter::mode_name(mode));
        CHECK(t.final_phase == "sold");
        CHECK(t.final_ctr == 1);
        REQUIRE(t.consumer_output.size() == 1);
        CHECK(t.consumer_output[0] == t.leaves[0]);
        CHECK(delta_of(t, PartyId::provider) == 3);
        expect_verdicts_pass(t, cfg);
    }
}

TEST_CASE("stream: repeatable delivery over two sessions") {
    RunConfig cfg = base_config(arbiter::Mode::stream, 4, 49);
    cfg.session.theta = 2;
    cfg.session.sessions = 2;
    Transcript t = run(cfg);
    REQUIRE(t.session_records.size() == 2);
    CHECK(t.session_records[0].outcome == "sold");
    CHECK(t.session_records[1].outcome == "sold");
    CHECK(t.consumer_output.size() == 8);
    CHECK(t.final_escrow == 0);
    CHECK(delta_of(t, PartyId::provider) == 2 * 4 * 3);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("stream: wrong key is proven and the penalty flips to the consumer") {
    RunConfig cfg = base_config(arbiter::Mode::stream, 4, 37);
    cfg.adversary.corrupt = {PartyId::provider};
    cfg.adversary.provider.corrupt = true;
    cfg.adversary.provider.wrong_stream_key_at = 2;
    Transcript t = run(cfg);
    REQUIRE(t.session_records.size() == 1);
    CHECK(t.session_records[0].pom_accepted);
    CHECK(t.final_plt);
    // One chunk was streamed fine before the bad key.
    CHECK(t.consumer_output.size() == 1);
    CHECK(delta_of(t, PartyId::consumer) == -1 * 5 + 10);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("stream: consumer stopping mid-way leaves at most one unpaid chunk each") {
    RunConfig cfg = base_config(arbiter::Mode::stream, 8, 39);
    cfg.adversary.corrupt = {PartyId::consumer};
    cfg.adversary.consumer.corrupt = true;
    cfg.adversary.consumer.abort_after_chunks = 3;
    Transcript t = run(cfg);
    // Chunks 1..3 completed cycles; deliver(4) may be in flight unpaid.
    CHECK(t.final_ctr == 3);
    CHECK(delta_of(t, PartyId::deliverer) == 3 * 2);
    CHECK(delta_of(t, PartyId::provider) == 3 * (5 - 2));
    uint64_t delivers = 0;
    for (const auto& e : t.envelopes)
        if (e.kind == msg::Kind::deliver) delivers = std::max(delivers, *e.index);
    CHECK(delivers <= 4);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("stream: deliverer crash does not sink the provider's claim") {
    RunConfig cfg = base_config(arbiter::Mode::stream, 4, 41);
    cfg.adversary.corrupt = {PartyId::deliverer};
    cfg.adversary.deliverer.corrupt = true;
    cfg.adversary.deliverer.abort_after_chunks = 2;
    cfg.adversary.deliverer.skip_claim = true;
    Transcript t = run(cfg);
    // Both cycles the consumer finished were receipted to P as well; P
    // claims alone and D is still paid via the max rule.
    CHECK(t.final_ctr == 2);
    CHECK(delta_of(t, PartyId::deliverer) == 2 * 2);
    CHECK(delta_of(t, PartyId::provider) == 2 * (5 - 2));
    CHECK(delta_of(t, PartyId::consumer) == -2 * 5);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("stream: nobody claims, everyone is made whole") {
    RunConfig cfg = base_config(arbiter::Mode::stream, 4, 43);
    cfg.adversary.corrupt = {PartyId::provider, PartyId::deliverer};
    cfg.adversary.provider.corrupt = true;
    cfg.adversary.provider.stop_stream_keys_at = 1;
    cfg.adversary.provider.skip_claim = true;
    cfg.adversary.deliverer.corrupt = true;
    cfg.adversary.deliverer.abort_after_chunks = 1;
    cfg.adversary.deliverer.skip_claim = true;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "not_sold");
    CHECK(t.final_ctr == 0);
    CHECK(delta_of(t, PartyId::consumer) == 0);
    CHECK(delta_of(t, PartyId::provider) == 0);
    CHECK(delta_of(t, PartyId::deliverer) == 0);
    expect_verdicts_pass(t, cfg);
}

TEST_CASE("stream: sybil claims without delivery still pay the provider") {
    RunConfig cfg = base_config(arbiter::Mode::stream, 4, 45);
    cfg.adversary.corrupt = {PartyId::deliverer, PartyId::consumer};
    cfg.adversary.deliverer.corrupt = true;
    cfg.adversary.deliverer.sybil = true;
    cfg.adversary.consumer.corrupt = true;
    cfg.adversary.consumer.gift_receipt_index = 4;
    cfg.adversary.consumer.early_delivered = true;
    cfg.adversary.consumer.no_complaint = true;
    Transcript t = run(cfg);
    CHECK(t.final_phase == "sold");
    CHECK(t.final_ctr == 4);
    CHECK(delta_of(t, PartyId::provider) == 4 * (5 - 2));
    expect_verdicts_pass(t, cfg);
}
