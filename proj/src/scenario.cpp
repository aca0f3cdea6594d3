#include "scenario.hpp"

#include <fstream>

#include "json.hpp"
#include "merkle.hpp"

namespace fdl::scn {

using json = nlohmann::json;
using arbiter::PartyId;

namespace {

[[noreturn]] void fail(const std::string& why) { throw ScenarioError("scenario: " + why); }

uint64_t get_u64(const json& j, const char* key, uint64_t fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number_unsigned()) fail(std::string(key) + " must be a non-negative integer");
    return j[key].get<uint64_t>();
}

PartyId parse_party(const std::string& s) {
    if (s == "P" || s == "provider") return PartyId::provider;
    if (s == "D" || s == "deliverer") return PartyId::deliverer;
    if (s == "C" || s == "consumer") return PartyId::consumer;
    fail("unknown party '" + s + "'");
}

struct Trigger {
    std::optional<uint64_t> on_chunk;
    std::optional<uint64_t> on_element;
    std::optional<uint64_t> at_round;
};

Trigger parse_trigger(const json& j) {
    Trigger t;
    if (!j.is_object()) fail("trigger must be an object");
    if (j.contains("on_chunk")) t.on_chunk = j["on_chunk"].get<uint64_t>();
    if (j.contains("on_element")) t.on_element = j["on_element"].get<uint64_t>();
    if (j.contains("at_round")) t.at_round = j["at_round"].get<uint64_t>();
    return t;
}

// Maps one program step onto the behavior knobs of the corrupted party.
void apply_action(sim::AdversaryPlan& plan, PartyId party, const Trigger& trig, const json& act) {
    auto need_chunk = [&]() -> uint64_t {
        if (!trig.on_chunk) fail("action requires an on_chunk trigger");
        return *trig.on_chunk;
    };
    if (!act.is_object() || act.size() != 1) fail("action must be a single-key object");
    const std::string kind = act.begin().key();
    const json& arg = act.begin().value();

    if (kind == "abort") {
        if (trig.at_round) {
            if (party == PartyId::provider) plan.provider.abort_round = *trig.at_round;
            if (party == PartyId::deliverer) plan.deliverer.abort_round = *trig.at_round;
            if (party == PartyId::consumer) plan.consumer.abort_round = *trig.at_round;
        } else {
            uint64_t k = need_chunk();
            if (party == PartyId::deliverer) plan.deliverer.abort_after_chunks = k;
            else if (party == PartyId::consumer) plan.consumer.abort_after_chunks = k;
            else plan.provider.stop_stream_keys_at = k + 1;
        }
    } else if (kind == "withhold_receipt") {
        if (party != PartyId::consumer) fail("withhold_receipt applies to the consumer");
        plan.consumer.withhold_receipts_from = need_chunk();
    } else if (kind == "withhold") {
        const std::string what = arg.get<std::string>();
        if (what == "reveal") plan.provider.skip_reveal = true;
        else if (what == "mtree") plan.provider.skip_mtree = true;
        else if (what == "claim" && party == PartyId::provider) plan.provider.skip_claim = true;
        else if (what == "claim" && party == PartyId::deliverer) plan.deliverer.skip_claim = true;
        else if (what == "proof") plan.deliverer.ignore_proof_request = true;
        else if (what == "completion") plan.consumer.skip_delivered = true;
        else if (what == "complaint") plan.consumer.no_complaint = true;
        else if (what == "keys") plan.provider.stop_stream_keys_at = need_chunk();
        else fail("unknown withhold target '" + what + "'");
    } else if (kind == "substitute") {
        const std::string what = arg.get<std::string>();
        if (what == "chunk") plan.provider.garbage_chunk = need_chunk();
        else if (what == "chunk_key") plan.provider.wrong_key_chunk = need_chunk();
        else if (what == "stream_key") plan.provider.wrong_stream_key_at = need_chunk();
        else if (what == "reveal_value") {
            if (!trig.on_element) fail("substitute reveal_value needs on_element");
            plan.provider.wrong_reveal_elem = *trig.on_element;
        } else if (what == "short_cover") plan.provider.reveal_short_cover = true;
        else if (what == "mtree_sig") plan.provider.bad_mtree_sig = true;
        else fail("unknown substitute target '" + what + "'");
    } else if (kind == "send_forged") {
        const std::string what = arg.is_string() ? arg.get<std::string>() : "";
        if (what == "receipt") {
            plan.consumer.gift_receipt_index = need_chunk();
        } else if (what == "receipt_both") {
            plan.consumer.gift_receipt_index = need_chunk();
            plan.consumer.gift_to_provider = true;
        } else if (what == "completion") {
            plan.consumer.early_delivered = true;
        } else {
            fail("unknown send_forged target '" + what + "'");
        }
    } else if (kind == "sybil") {
        if (party != PartyId::deliverer) fail("sybil applies to the deliverer");
        plan.deliverer.sybil = true;
    } else if (kind == "delay_to_max") {
        plan.delay_all = true;
    } else {
        fail("unknown action '" + kind + "'");
    }
}

}  // namespace

Scenario load_scenario(const std::string& json_text, const Overrides& overrides) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("top level must be an object");
    if (get_u64(j, "schema", 1) != 1) fail("unsupported schema version");

    Scenario s;
    s.name = j.value("name", "unnamed");
    auto& sc = s.run.session;

    std::string mode = overrides.mode.value_or(j.value("mode", "download"));
    if (mode == "download") sc.mode = arbiter::Mode::download;
    else if (mode == "stream") sc.mode = arbiter::Mode::stream;
    else fail("mode must be download or stream");

    sc.n = overrides.n.value_or(get_u64(j, "n", 4));
    if (!merkle::is_power_of_two(sc.n) || sc.n > (1ull << 20))
        fail("n must be a power of two in [1, 2^20]");
    sc.eta = overrides.eta.value_or(get_u64(j, "eta", 64));
    if (sc.eta == 0 || sc.eta % 32 != 0 || sc.eta > (1ull << 20))
        fail("eta must be a positive multiple of 32, at most 2^20");

    sc.prices.delivery = 2;
    sc.prices.content = 5;
    sc.prices.penalty = 0;
    if (j.contains("prices")) {
        const json& p = j["prices"];
        sc.prices.delivery = get_u64(p, "delivery", sc.prices.delivery);
        sc.prices.content = get_u64(p, "content", sc.prices.content);
        sc.prices.penalty = get_u64(p, "penalty", 0);
    }
    if (sc.prices.penalty == 0) sc.prices.penalty = std::max<uint64_t>(1, sc.n * sc.prices.content / 4);
    if (sc.prices.content <= sc.prices.delivery)
        fail("per-chunk content price must exceed the delivery price");
    if (sc.prices.content > (1ull << 32) || sc.prices.penalty > (1ull << 40))
        fail("prices out of range");

    sc.theta = get_u64(j, "theta", 1);
    sc.sessions = get_u64(j, "sessions", 1);
    if (sc.theta < 1 || sc.theta > (1ull << 16)) fail("theta must lie in [1, 2^16]");
    if (sc.sessions < 1 || sc.sessions > sc.theta)
        fail("sessions must lie in [1, theta]");
    sc.delta = get_u64(j, "delta", 1);
    if (sc.delta < 1 || sc.delta > 8) fail("delta must lie in [1, 8]");

    sc.contract_timers = arbiter::ContractTimers::defaults(sc.n, sc.delta);
    sc.party_timer = 2 * sc.delta;
    if (j.contains("timers")) {
        const json& t = j["timers"];
        sc.contract_timers.deliver = get_u64(t, "deliver", sc.contract_timers.deliver);
        sc.contract_timers.dispute = get_u64(t, "dispute", sc.contract_timers.dispute);
        sc.contract_timers.reveal = get_u64(t, "reveal", sc.contract_timers.reveal);
        sc.contract_timers.receive = get_u64(t, "receive", sc.contract_timers.receive);
        sc.contract_timers.finish = get_u64(t, "finish", sc.contract_timers.finish);
        sc.contract_timers.proof_wait = get_u64(t, "proof_wait", sc.contract_timers.proof_wait);
        sc.party_timer = get_u64(t, "party", sc.party_timer);
    }
    if (sc.contract_timers.finish <= sc.contract_timers.receive)
        fail("finish timer must exceed the receive timer");

    s.run.seed = overrides.seed.value_or(get_u64(j, "seed", 1));
    s.repetitions = get_u64(j, "repetitions", 1);
    if (s.repetitions < 1 || s.repetitions > 1000) fail("repetitions must lie in [1, 1000]");
    if (j.contains("content_length")) {
        uint64_t len = get_u64(j, "content_length", 0);
        uint64_t chunks = len == 0 ? 0 : (len + sc.eta - 1) / sc.eta;
        uint64_t padded = 1;
        while (padded < chunks) padded *= 2;
        if (len == 0 || padded != sc.n) fail("content_length does not pad to n chunks");
        s.run.content_length = len;
    }

    if (j.contains("adversary")) {
        const json& a = j["adversary"];
        if (a.contains("corrupt")) {
            for (const auto& e : a["corrupt"])
                s.run.adversary.corrupt.insert(parse_party(e.get<std::string>()));
        }
        if (s.run.adversary.corrupt.size() > 2) fail("at most two parties may be corrupted");
        s.run.adversary.provider.corrupt = s.run.adversary.is_corrupt(PartyId::provider);
        s.run.adversary.deliverer.corrupt = s.run.adversary.is_corrupt(PartyId::deliverer);
        s.run.adversary.consumer.corrupt = s.run.adversary.is_corrupt(PartyId::consumer);
        if (a.value("delay_all", false)) s.run.adversary.delay_all = true;
        if (a.contains("program")) {
            if (!a["program"].is_array()) fail("adversary program must be an array");
            for (const auto& step : a["program"]) {
                if (!step.contains("party") || !step.contains("action"))
                    fail("program steps need party and action");
                PartyId party = parse_party(step["party"].get<std::string>());
                if (!s.run.adversary.is_corrupt(party))
                    fail("program step for a party not marked corrupt");
                Trigger trig =
                    step.contains("trigger") ? parse_trigger(step["trigger"]) : Trigger{};
                apply_action(s.run.adversary, party, trig, step["action"]);
            }
        }
    }

    if (j.contains("fault_injection")) {
        const std::string f = j["fault_injection"].get<std::string>();
        if (f == "double_pay_deliverer") s.run.adversary.fault = arbiter::Fault::double_pay_deliverer;
        else fail("unknown fault_injection '" + f + "'");
    }

    if (j.contains("expect")) {
        const json& e = j["expect"];
        if (e.contains("outcome")) {
            s.expect.outcome = e["outcome"].get<std::string>();
            if (*s.expect.outcome != "sold" && *s.expect.outcome != "not_sold")
                fail("expect.outcome must be sold or not_sold");
        }
        if (e.contains("ctr")) {
            if (e["ctr"].is_string()) {
                if (e["ctr"].get<std::string>() != "n") fail("expect.ctr must be a number or \"n\"");
                s.ctr_expect_is_n = true;
                s.expect.ctr = sc.n;
            } else {
                s.expect.ctr = e["ctr"].get<uint64_t>();
            }
        }
        if (e.contains("plt")) s.expect.plt = e["plt"].get<bool>();
        if (e.contains("pom_accepted")) s.expect.pom_accepted = e["pom_accepted"].get<bool>();
        if (e.contains("wrong_rk_accepted"))
            s.expect.wrong_rk_accepted = e["wrong_rk_accepted"].get<bool>();
        if (e.contains("zero_escrow")) s.expect.zero_escrow = e["zero_escrow"].get<bool>();
        if (e.contains("conservation_violated"))
            s.expect.conservation_violated = e["conservation_violated"].get<bool>();
    }

    return s;
}

Scenario load_scenario_file(const std::string& path, const Overrides& overrides) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot read scenario file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Scenario s = load_scenario(text, overrides);
    if (s.name == "unnamed") {
        auto slash = path.find_last_of('/');
        s.name = slash == std::string::npos ? path : path.substr(slash + 1);
    }
    return s;
}

}  // namespace fdl::scn
