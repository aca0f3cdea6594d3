#include "simnet.hpp"

#include <algorithm>
#include <deque>

#include "json.hpp"

namespace fdl::sim {

namespace {

struct Envelope {
    uint64_t deliver_round = 0;
    uint64_t sent_round = 0;
    PartyId from, to;
    Bytes payload;
    uint64_t seq = 0;
};

std::optional<uint64_t> message_index(const msg::Message& m) {
    return std::visit(
        [](const auto& b) -> std::optional<uint64_t> {
            using T = std::decay_t<decltype(b)>;
            if constexpr (std::is_same_v<T, msg::Deliver>) return b.chunk.index;
            else if constexpr (std::is_same_v<T, msg::Receipt> || std::is_same_v<T, msg::KeyReq> ||
                               std::is_same_v<T, msg::KeyReveal> ||
                               std::is_same_v<T, msg::ClaimDelivery> ||
                               std::is_same_v<T, msg::ClaimRevealing>)
                return b.index;
            else if constexpr (std::is_same_v<T, msg::VfdProofMsg>)
                return b.has_receipt ? std::optional<uint64_t>(b.index) : std::nullopt;
            else if constexpr (std::is_same_v<T, msg::EvRevealing>)
                return b.ctr;
            else if constexpr (std::is_same_v<T, msg::EvPayingDelivery> ||
                               std::is_same_v<T, msg::EvPayingRevealing>)
                return b.index;
            else
                return std::nullopt;
        },
        m.body);
}

}  // namespace

Transcript run(const RunConfig& cfg) {
    const auto& sc = cfg.session;
    crypto::Rng root_rng(cfg.seed);

    // Committed content: pseudorandom bytes padded into n chunks.
    uint64_t raw_len = cfg.content_length.value_or(sc.n * sc.eta);
    Bytes raw = root_rng.fork("content").next_bytes(raw_len);
    proto::PaddedContent content = proto::pad_content(raw, sc.eta);
    if (content.n != sc.n) throw std::invalid_argument("content length inconsistent with n");

    Digest contract_id = root_rng.fork("contract").next_digest();

    arbiter::Ledger ledger;
    std::map<PartyId, uint64_t> init_bal;
    if (cfg.initial_balances) {
        init_bal = *cfg.initial_balances;
    } else {
        init_bal[PartyId::provider] =
            sc.theta * (sc.n * sc.prices.delivery + sc.prices.penalty) + 100;
        init_bal[PartyId::deliverer] = 100;
        init_bal[PartyId::consumer] = sc.sessions * sc.n * sc.prices.content + 100;
    }
    for (const auto& [p, v] : init_bal) ledger.set_balance(p, v);

    arbiter::Contract contract(sc.mode, contract_id, sc.contract_timers, cfg.adversary.fault);

    proto::Provider provider(sc, cfg.adversary.provider, contract_id, content.chunks,
                             root_rng.fork("provider"));
    proto::Deliverer deliverer(sc, cfg.adversary.deliverer, contract_id,
                               root_rng.fork("deliverer"));
    proto::Consumer consumer(sc, cfg.adversary.consumer, contract_id, root_rng.fork("consumer"));

    // Ground truth for payload classification.
    std::vector<Bytes> true_ct(sc.n);
    for (uint64_t i = 1; i <= sc.n; ++i)
        true_ct[i - 1] =
            crypto::sym_encrypt(provider.key_tree().chunk_key(i), content.chunks[i - 1]);

    Transcript t;
    t.mode = arbiter::mode_name(sc.mode);
    t.n = sc.n;
    t.eta = sc.eta;
    t.delta = sc.delta;
    t.seed = cfg.seed;
    t.theta = sc.theta;
    t.sessions_planned = sc.sessions;
    t.prices = sc.prices;
    t.root_hex = hex(provider.root());
    {
        merkle::MerkleTree mt = merkle::build_mt(content.chunks);
        t.leaves = mt.levels[0];
    }
    t.corrupt = cfg.adversary.corrupt;
    t.initial_balances = init_bal;
    t.initial_supply = ledger.total_supply();
    for (PartyId p : {PartyId::provider, PartyId::deliverer, PartyId::consumer})
        t.stats[p] = PartyStats{};

    std::deque<Envelope> in_flight;
    uint64_t seq = 0;

    auto classify = [&](const msg::Message& m) -> bool {
        if (const auto* d = std::get_if<msg::Deliver>(&m.body)) {
            return d->chunk.index >= 1 && d->chunk.index <= sc.n &&
                   d->chunk.ciphertext == true_ct[d->chunk.index - 1];
        }
        if (const auto* k = std::get_if<msg::KeyReveal>(&m.body)) {
            return k->index >= 1 && k->index <= sc.n &&
                   k->key == provider.key_tree().chunk_key(k->index);
        }
        return true;
    };

    auto post = [&](PartyId from, PartyId to, const msg::Message& m, uint64_t round) {
        Bytes payload = msg::encode_message(m);
        uint64_t delay = cfg.adversary.delay_all ? sc.delta : 1;
        EnvelopeRecord rec;
        rec.round_sent = round;
        rec.round_delivered = round + delay;
        rec.from = from;
        rec.to = to;
        rec.kind = msg::kind_of(m);
        rec.size = payload.size();
        rec.index = message_index(m);
        rec.true_payload = classify(m);
        t.envelopes.push_back(rec);
        if (from != PartyId::contract) {
            t.stats[from].bytes_sent += payload.size();
            if (rec.kind == msg::Kind::deliver) t.stats[from].deliver_bytes_sent += payload.size();
        }
        in_flight.push_back(Envelope{round + delay, round, from, to, std::move(payload), seq++});
    };

    auto post_emissions = [&](const std::vector<arbiter::Emission>& ems, uint64_t round) {
        for (const auto& em : ems) {
            EventRecord ev;
            ev.round = round;
            ev.kind = msg::kind_of(em.message);
            if (const auto* r = std::get_if<msg::EvRevealing>(&em.message.body)) ev.ctr = r->ctr;
            if (const auto* pd = std::get_if<msg::EvPayingDelivery>(&em.message.body))
                ev.ctr = pd->index;
            if (const auto* pr = std::get_if<msg::EvPayingRevealing>(&em.message.body))
                ev.ctr = pr->index;
            t.events.push_back(ev);
            if (em.to) {
                post(PartyId::contract, *em.to, em.message, round);
            } else {
                for (PartyId p : {PartyId::provider, PartyId::deliverer, PartyId::consumer})
                    post(PartyId::contract, p, em.message, round);
            }
        }
    };

    auto drain_ledger = [&](uint64_t round) {
        for (auto& op : ledger.drain_ops())
            t.ledger_ops.push_back(
                LedgerRecord{round, op.party, op.balance_delta, op.escrow_delta, op.reason});
    };

    // Session bookkeeping keyed off contract events.
    SessionRecord current_session;
    bool session_open = false;
    size_t events_seen = 0;

    const uint64_t cap = 16 * sc.n + 64;
    uint64_t round = 0;
    for (;; ++round) {
        if (round > cap) {
            t.liveness_failure = true;
            break;
        }

        // Deliver due envelopes.
        std::vector<Envelope> due;
        for (auto it = in_flight.begin(); it != in_flight.end();) {
            if (it->deliver_round <= round) {
                due.push_back(std::move(*it));
                it = in_flight.erase(it);
            } else {
                ++it;
            }
        }
        std::sort(due.begin(), due.end(), [](const Envelope& a, const Envelope& b) {
            if (a.from != b.from) return static_cast<int>(a.from) < static_cast<int>(b.from);
            return a.seq < b.seq;
        });

        std::map<PartyId, std::vector<proto::Inbound>> inboxes;
        for (auto& env : due) {
            auto m = msg::decode_message(env.payload);
            if (!m) continue;  // never happens on honest-coded paths
            if (env.to != PartyId::contract) t.stats[env.to].bytes_received += env.payload.size();
            inboxes[env.to].push_back(proto::Inbound{env.from, std::move(*m)});
        }

        // Contract first: inbound messages, then timers.
        for (const auto& in : inboxes[PartyId::contract]) {
            ContractRecord rec;
            rec.round = round;
            rec.from = in.from;
            rec.kind = msg::kind_of(in.message);
            rec.size = msg::encode_message(in.message).size();
            rec.phase_before = arbiter::phase_name(contract.phase());
            auto res = contract.handle(in.from, in.message, rec.size, round, ledger);
            rec.accepted = res.accepted;
            rec.reason = res.reason;
            rec.phase_after = arbiter::phase_name(contract.phase());
            t.contract_log.push_back(rec);
            if (res.accepted && rec.kind == msg::Kind::pom_download)
                current_session.pom_accepted = true;
            if (res.accepted && rec.kind == msg::Kind::pom_stream) current_session.pom_accepted = true;
            if (res.accepted && rec.kind == msg::Kind::wrong_rk)
                current_session.wrong_rk_accepted = true;
            post_emissions(res.emissions, round);
        }
        post_emissions(contract.tick(round, ledger), round);
        drain_ledger(round);

        // Track session boundaries from the freshly emitted events.
        for (size_t ei = events_seen; ei < t.events.size(); ++ei) {
            const auto& ev = t.events[ei];
            if (ev.kind == msg::Kind::ev_initiated) {
                current_session = SessionRecord{};
                current_session.nonce = contract.session_nonce();
                current_session.sid_hex = hex(contract.session_id());
                current_session.initiated_round = round;
                session_open = true;
            }
            if ((ev.kind == msg::Kind::ev_sold || ev.kind == msg::Kind::ev_not_sold) &&
                session_open) {
                current_session.settled_round = round;
                current_session.outcome = ev.kind == msg::Kind::ev_sold ? "sold" : "not_sold";
                current_session.ctr = contract.ctr();
                current_session.plt = contract.penalty_flag();
                t.session_records.push_back(current_session);
                session_open = false;
            }
        }
        events_seen = t.events.size();

        // Parties in fixed order.
        auto run_party = [&](PartyId id, auto& machine) {
            auto out = machine.step(inboxes[id], round);
            for (auto& ob : out) post(id, ob.to, ob.message, round);
        };
        run_party(PartyId::provider, provider);
        run_party(PartyId::deliverer, deliverer);
        run_party(PartyId::consumer, consumer);

        bool all_halted = provider.halted() && deliverer.halted() && consumer.halted();
        if (all_halted && contract.idle() && in_flight.empty()) break;
    }

    t.last_round = round;
    for (auto& [p, st] : t.stats) {
        switch (p) {
            case PartyId::provider:
                st.halted = provider.halted();
                st.halt_round = provider.halt_round();
                break;
            case PartyId::deliverer:
                st.halted = deliverer.halted();
                st.halt_round = deliverer.halt_round();
                break;
            case PartyId::consumer:
                st.halted = consumer.halted();
                st.halt_round = consumer.halt_round();
                break;
            default: break;
        }
    }
    for (PartyId p : {PartyId::provider, PartyId::deliverer, PartyId::consumer})
        t.final_balances[p] = ledger.balance(p);
    t.final_escrow = ledger.escrow();
    t.final_phase = arbiter::phase_name(contract.phase());
    t.final_ctr = contract.ctr();
    t.final_plt = contract.penalty_flag();
    t.contract_accepted_messages = contract.accepted_messages();
    t.contract_accepted_bytes = contract.accepted_bytes();
    t.consumer_output = consumer.output_digests();
    t.consumer_decrypt_rounds = consumer.decrypt_rounds();
    return t;
}

std::string Transcript::to_jsonl() const {
    using json = nlohmann::ordered_json;
    std::string out;
    auto emit = [&](const json& j) {
        out += j.dump();
        out += '\n';
    };

    json header;
    header["record"] = "header";
    header["schema"] = 1;
    header["mode"] = mode;
    header["n"] = n;
    header["eta"] = eta;
    header["delta"] = delta;
    header["seed"] = seed;
    header["theta"] = theta;
    header["sessions"] = sessions_planned;
    header["prices"] = {{"delivery", prices.delivery},
                        {"content", prices.content},
                        {"penalty", prices.penalty}};
    header["root"] = root_hex;
    json corrupt_list = json::array();
    for (PartyId p : corrupt) corrupt_list.push_back(arbiter::party_name(p));
    header["corrupt"] = corrupt_list;
    json bal;
    for (const auto& [p, v] : initial_balances) bal[arbiter::party_name(p)] = v;
    header["initial_balances"] = bal;
    emit(header);

    for (const auto& e : envelopes) {
        json j;
        j["record"] = "env";
        j["sent"] = e.round_sent;
        j["rcv"] = e.round_delivered;
        j["from"] = arbiter::party_name(e.from);
        j["to"] = arbiter::party_name(e.to);
        j["kind"] = msg::kind_name(e.kind);
        j["bytes"] = e.size;
        if (e.index) j["index"] = *e.index;
        if (!e.true_payload) j["substituted"] = true;
        emit(j);
    }
    for (const auto& c : contract_log) {
        json j;
        j["record"] = "contract";
        j["round"] = c.round;
        j["from"] = arbiter::party_name(c.from);
        j["kind"] = msg::kind_name(c.kind);
        j["bytes"] = c.size;
        j["accepted"] = c.accepted;
        if (!c.reason.empty()) j["reason"] = c.reason;
        j["phase"] = c.phase_after;
        emit(j);
    }
    for (const auto& l : ledger_ops) {
        json j;
        j["record"] = "ledger";
        j["round"] = l.round;
        j["party"] = arbiter::party_name(l.party);
        j["balance_delta"] = l.balance_delta;
        j["escrow_delta"] = l.escrow_delta;
        j["reason"] = l.reason;
        emit(j);
    }
    for (const auto& s : session_records) {
        json j;
        j["record"] = "session";
        j["nonce"] = s.nonce;
        j["sid"] = s.sid_hex;
        j["initiated_round"] = s.initiated_round;
        j["settled_round"] = s.settled_round;
        j["outcome"] = s.outcome;
        j["ctr"] = s.ctr;
        j["plt"] = s.plt;
        if (s.pom_accepted) j["pom_accepted"] = true;
        if (s.wrong_rk_accepted) j["wrong_rk_accepted"] = true;
        emit(j);
    }
    json summary;
    summary["record"] = "summary";
    summary["last_round"] = last_round;
    summary["liveness_failure"] = liveness_failure;
    summary["final_phase"] = final_phase;
    summary["ctr"] = final_ctr;
    summary["plt"] = final_plt;
    json fb;
    for (const auto& [p, v] : final_balances) fb[arbiter::party_name(p)] = v;
    summary["final_balances"] = fb;
    summary["escrow"] = final_escrow;
    summary["onchain_messages"] = contract_accepted_messages;
    summary["onchain_bytes"] = contract_accepted_bytes;
    json stats_j;
    for (const auto& [p, st] : stats) {
        stats_j[arbiter::party_name(p)] = {{"bytes_sent", st.bytes_sent},
                                           {"bytes_received", st.bytes_received},
                                           {"deliver_bytes_sent", st.deliver_bytes_sent},
                                           {"halted", st.halted},
                                           {"halt_round", st.halt_round}};
    }
    summary["parties"] = stats_j;
    json outputs = json::array();
    for (const auto& d : consumer_output) outputs.push_back(hex(d));
    summary["consumer_output"] = outputs;
    summary["decrypt_rounds"] = consumer_decrypt_rounds;
    emit(summary);
    return out;
}

}  // namespace fdl::sim
