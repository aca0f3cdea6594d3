#include "invariants.hpp"

#include <sstream>

namespace fdl::sim {

namespace {

std::string fmt(const char* what, uint64_t a, uint64_t b) {
    std::ostringstream os;
    os << what << " " << a << " vs " << b;
    return os.str();
}

}  // namespace

std::vector<Verdict> check_invariants(const Transcript& t, const RunConfig& cfg) {
    std::vector<Verdict> out;
    const auto& sc = cfg.session;
    bool p_honest = !t.corrupt.count(PartyId::provider);
    bool d_honest = !t.corrupt.count(PartyId::deliverer);
    bool c_honest = !t.corrupt.count(PartyId::consumer);
    bool fault_injected = cfg.adversary.fault != arbiter::Fault::none;

    // --- conservation: replay every ledger move ---
    {
        std::map<PartyId, int64_t> bal;
        for (const auto& [p, v] : t.initial_balances) bal[p] = static_cast<int64_t>(v);
        int64_t escrow = 0;
        int64_t supply = static_cast<int64_t>(t.initial_supply);
        bool ok = true;
        std::string detail = "supply constant across " +
                             std::to_string(t.ledger_ops.size()) + " ledger moves";
        for (const auto& op : t.ledger_ops) {
            bal[op.party] += op.balance_delta;
            escrow += op.escrow_delta;
            if (bal[op.party] < 0 || escrow < 0) {
                ok = false;
                detail = "negative balance at round " + std::to_string(op.round);
                break;
            }
            int64_t now = escrow;
            for (const auto& [p, v] : bal) now += v;
            if (now != supply) {
                ok = false;
                detail = "supply drifted at round " + std::to_string(op.round) + " (" +
                         op.reason + ")";
                break;
            }
        }
        if (ok) {
            for (const auto& [p, v] : t.final_balances)
                if (bal[p] != static_cast<int64_t>(v)) {
                    ok = false;
                    detail = "replayed balances disagree with the final ledger";
                }
            if (escrow != static_cast<int64_t>(t.final_escrow)) {
                ok = false;
                detail = "replayed escrow disagrees with the final ledger";
            }
        }
        out.push_back(Verdict{"conservation",
                              "total coin supply constant through every contract operation", ok,
                              detail});
    }

    // --- liveness ---
    out.push_back(Verdict{"liveness", "the run settles before the round cap",
                          !t.liveness_failure,
                          t.liveness_failure ? "round cap tripped" : ""});

    // --- consumer fairness ---
    if (c_honest && !fault_injected) {
        bool valid_outputs = true;
        size_t pos = 0;
        for (const auto& d : t.consumer_output) {
            if (pos < t.leaves.size() && d == t.leaves[pos]) {
                ++pos;
            } else if (!t.leaves.empty() && d == t.leaves[0]) {
                pos = 1;  // next session restarts the prefix
            } else {
                valid_outputs = false;
                break;
            }
        }
        int64_t paid = static_cast<int64_t>(t.initial_balances.at(PartyId::consumer)) -
                       static_cast<int64_t>(t.final_balances.at(PartyId::consumer));
        int64_t value =
            static_cast<int64_t>(t.consumer_output.size() * sc.prices.content);
        bool ok = valid_outputs && paid <= value;
        std::ostringstream os;
        os << "paid " << paid << " for " << t.consumer_output.size() << " valid chunks";
        out.push_back(Verdict{"consumer-fairness",
                              "the consumer pays only for valid content it de facto holds", ok,
                              os.str()});
    }

    // --- delivery fairness ---
    if (d_honest && !fault_injected) {
        int64_t delta = static_cast<int64_t>(t.final_balances.at(PartyId::deliverer)) -
                        static_cast<int64_t>(t.initial_balances.at(PartyId::deliverer));
        bool ok = delta >= 0 && delta % static_cast<int64_t>(sc.prices.delivery) == 0;
        uint64_t paid_chunks = ok ? delta / sc.prices.delivery : 0;
        uint64_t deliver_msg = 0;
        for (const auto& e : t.envelopes)
            if (e.kind == msg::Kind::deliver && e.from == PartyId::deliverer)
                deliver_msg = std::max(deliver_msg, e.size);
        uint64_t sent = t.stats.at(PartyId::deliverer).deliver_bytes_sent;
        uint64_t sessions = std::max<uint64_t>(1, t.session_records.size());
        // Unpaid upload is at most one chunk message per session.
        ok = ok && sent <= (paid_chunks + sessions) * std::max<uint64_t>(deliver_msg, 1);
        out.push_back(Verdict{
            "delivery-fairness",
            "unpaid upload bounded by one chunk message per session", ok,
            fmt("deliver bytes vs paid-chunk allowance", sent,
                (paid_chunks + sessions) * std::max<uint64_t>(deliver_msg, 1))});
    }

    // --- provider fairness ---
    if (p_honest && !fault_injected) {
        // What the corrupted coalition can decrypt: a chunk counts once its
        // true ciphertext and its true key are both in the coalition's view.
        std::set<uint64_t> chunks_avail, keys_avail;
        if (!d_honest)
            for (uint64_t i = 1; i <= sc.n; ++i) chunks_avail.insert(i);  // delegated set
        for (const auto& e : t.envelopes) {
            if (!t.corrupt.count(e.to) || !e.index || !e.true_payload) continue;
            if (e.kind == msg::Kind::deliver) chunks_avail.insert(*e.index);
            if (e.kind == msg::Kind::key_reveal) keys_avail.insert(*e.index);
        }
        if (!c_honest) {
            // The consumer's decryption key opens every honest reveal.
            for (const auto& s : t.session_records)
                for (uint64_t i = 1; i <= s.ctr; ++i) keys_avail.insert(i);
        }
        uint64_t determined = 0;
        for (uint64_t i : chunks_avail)
            if (keys_avail.count(i)) ++determined;
        // Across multiple sessions the same content re-sells; each session
        // contributes its own entitlement.
        uint64_t sessions = std::max<uint64_t>(1, t.session_records.size());
        int64_t entitled = 0;
        if (determined > 0)
            entitled = static_cast<int64_t>(determined - 1) *
                       static_cast<int64_t>(sc.prices.content - sc.prices.delivery);
        static_cast<void>(sessions);
        int64_t delta = static_cast<int64_t>(t.final_balances.at(PartyId::provider)) -
                        static_cast<int64_t>(t.initial_balances.at(PartyId::provider));
        bool ok = delta >= entitled;
        std::ostringstream os;
        os << "net " << delta << " with " << determined << " chunks decryptable by the coalition";
        out.push_back(Verdict{"provider-fairness",
                              "provider nets at least (l-1) spreads when l chunks leak", ok,
                              os.str()});
    }

    // --- confidentiality against the deliverer ---
    {
        bool ok = true;
        std::string detail = "no key-bearing or plaintext-bearing message reached the deliverer";
        for (const auto& e : t.envelopes) {
            if (e.to == PartyId::deliverer && e.kind == msg::Kind::key_reveal) {
                ok = false;
                detail = "plaintext chunk key addressed to the deliverer";
            }
        }
        out.push_back(Verdict{
            "confidentiality",
            "the deliverer handles ciphertext and encrypted reveals only", ok, detail});
    }

    // --- timeliness ---
    {
        uint64_t factor = sc.mode == arbiter::Mode::download ? 2 : 4;
        uint64_t per_session = sc.delta * factor * sc.n + 64;
        uint64_t bound = per_session * std::max<uint64_t>(1, sc.sessions);
        bool ok = true;
        uint64_t worst = 0;
        for (const auto& [p, st] : t.stats) {
            if (t.corrupt.count(p)) continue;
            ok = ok && st.halted && st.halt_round <= bound;
            worst = std::max(worst, st.halt_round);
        }
        out.push_back(Verdict{"timeliness", "honest parties halt within O(n) rounds", ok,
                              fmt("worst honest halt round vs bound", worst, bound)});
    }

    // --- streaming latency ---
    if (sc.mode == arbiter::Mode::stream && p_honest && d_honest && c_honest &&
        !cfg.adversary.delay_all && !fault_injected) {
        bool ok = t.consumer_decrypt_rounds.size() == sc.n * sc.sessions &&
                  !t.session_records.empty();
        std::string detail;
        if (ok) {
            uint64_t gap = 0;
            size_t per = sc.n;
            for (size_t s = 0; ok && s < t.session_records.size(); ++s) {
                size_t base = s * per;
                uint64_t first = t.consumer_decrypt_rounds[base];
                ok = first >= t.session_records[s].initiated_round &&
                     first - t.session_records[s].initiated_round <= 8;
                for (size_t k = base + 1; ok && k < base + per; ++k) {
                    uint64_t g =
                        t.consumer_decrypt_rounds[k] - t.consumer_decrypt_rounds[k - 1];
                    if (gap == 0) gap = g;
                    ok = g == gap;
                }
            }
            detail = "per-chunk gap " + std::to_string(gap) + " rounds";
        } else {
            detail = "incomplete decryption record";
        }
        out.push_back(Verdict{"stream-latency",
                              "each next chunk becomes readable a constant number of rounds "
                              "after the previous one",
                              ok, detail});
    }

    return out;
}

}  // namespace fdl::sim
