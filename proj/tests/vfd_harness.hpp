#ifndef FDL_TESTS_VFD_HARNESS_HPP
#define FDL_TESTS_VFD_HARNESS_HPP

// Two-party round scheduler for exercising the verifiable-fair-delivery
// machines under adversarial abort/withhold/garble schedules. Messages
// sent in round r arrive in round r+1.

#include <deque>

#include "vfd.hpp"

namespace fdl::testing {

struct VfdSchedule {
    bool corrupt_sender = false;
    bool corrupt_receiver = false;
    // Sender misbehavior (indices are chunk indices).
    std::optional<uint64_t> sender_abort_before;  // stop before delivering this chunk
    std::optional<uint64_t> sender_garble_at;     // break the chunk signature here
    // Receiver misbehavior.
    std::optional<uint64_t> receiver_withhold_from;  // swallow receipts from this index on
    std::optional<uint64_t> receiver_garble_at;      // break the receipt signature here
    std::optional<uint64_t> receiver_abort_at;       // ignore delivers from this index on
};

struct VfdRunResult {
    uint64_t honest_halt_round = 0;  // last round an honest machine halted
    uint64_t verified_ctr = 0;       // verifier output on the sender's proof
    uint64_t receiver_valid = 0;     // valid chunks the receiver holds
    bool receiver_complete = false;
};

inline VfdRunResult run_vfd(uint64_t n, const VfdSchedule& sched, uint64_t seed) {
    using namespace fdl;
    crypto::Rng rng(seed);
    crypto::Rng prng = rng.fork("provider");
    crypto::Rng srng = rng.fork("sender");
    crypto::Rng rrng = rng.fork("receiver");

    crypto::SigKeyPair provider = crypto::sig_keygen(prng);
    crypto::SigKeyPair sender_keys = crypto::sig_keygen(srng);
    crypto::SigKeyPair receiver_keys = crypto::sig_keygen(rrng);
    Digest cid = rng.next_digest();
    Digest sid = rng.next_digest();

    std::vector<msg::SignedChunk> chunks;
    for (uint64_t i = 1; i <= n; ++i) {
        Bytes ct = rng.next_bytes(64);
        Signature sig = crypto::sign(provider, msg::chunk_sig_payload(cid, i, ct));
        chunks.push_back(msg::SignedChunk{i, ct, sig});
    }

    vfd::Sender sender;
    sender.sid = sid;
    sender.pk_receiver = receiver_keys.pub;
    sender.pk_self = sender_keys.pub;
    sender.chunks = chunks;

    vfd::Receiver receiver;
    receiver.sid = sid;
    receiver.pk_sender = sender_keys.pub;
    receiver.keys = receiver_keys;
    receiver.validator = vfd::ChunkValidator{provider.pub, cid};
    receiver.n = n;

    std::deque<msg::Message> to_receiver, to_sender;

    auto sender_emit = [&](std::vector<msg::Message> out) {
        for (auto& m : out) {
            if (auto* d = std::get_if<msg::Deliver>(&m.body); d && sched.corrupt_sender) {
                if (sched.sender_abort_before && d->chunk.index >= *sched.sender_abort_before) {
                    sender.halted = true;
                    continue;
                }
                if (sched.sender_garble_at && d->chunk.index == *sched.sender_garble_at)
                    d->chunk.sig[0] ^= 0xff;
            }
            to_receiver.push_back(std::move(m));
        }
    };
    auto receiver_emit = [&](std::vector<msg::Message> out) {
        for (auto& m : out) {
            if (auto* r = std::get_if<msg::Receipt>(&m.body); r && sched.corrupt_receiver) {
                if (sched.receiver_withhold_from && r->index >= *sched.receiver_withhold_from)
                    continue;
                if (sched.receiver_garble_at && r->index == *sched.receiver_garble_at)
                    m = msg::Message{sid, msg::Receipt{r->index, Signature{}}};
            }
            to_sender.push_back(std::move(m));
        }
    };

    sender_emit(sender.activate(0));
    receiver.activate(0);

    VfdRunResult res;
    auto note_halts = [&](uint64_t round) {
        static_cast<void>(round);
        if (!sched.corrupt_sender && sender.halted)
            res.honest_halt_round = std::max(res.honest_halt_round, round);
        if (!sched.corrupt_receiver && receiver.halted)
            res.honest_halt_round = std::max(res.honest_halt_round, round);
    };
    note_halts(0);

    uint64_t round = 0;
    const uint64_t cap = 4 * n + 16;
    while ((!sender.halted || !receiver.halted) && round < cap) {
        ++round;
        std::deque<msg::Message> in_s;
        std::swap(in_s, to_sender);
        std::deque<msg::Message> in_r;
        std::swap(in_r, to_receiver);

        for (auto& m : in_s)
            if (auto* r = std::get_if<msg::Receipt>(&m.body)) sender_emit(sender.on_receipt(*r, round));
        for (auto& m : in_r) {
            if (auto* d = std::get_if<msg::Deliver>(&m.body)) {
                if (sched.corrupt_receiver && sched.receiver_abort_at &&
                    d->chunk.index >= *sched.receiver_abort_at) {
                    receiver.halted = true;
                    continue;
                }
                receiver_emit(receiver.on_deliver(*d, round));
            }
        }
        sender.on_tick(round);
        receiver.on_tick(round);
        note_halts(round);
    }

    res.verified_ctr =
        vfd::verify_proof(sender.proof, sid, receiver_keys.pub, sender_keys.pub, n);
    vfd::ChunkValidator psi{provider.pub, cid};
    uint64_t valid = 0;
    for (const auto& c : receiver.accepted) {
        if (c.index == valid + 1 && psi(c))
            ++valid;
        else
            break;
    }
    res.receiver_valid = valid;
    res.receiver_complete = receiver.complete;
    return res;
}

inline VfdSchedule random_schedule(crypto::Rng& rng, uint64_t n) {
    VfdSchedule s;
    uint64_t idx = 1 + rng.next_u64() % n;
    switch (rng.next_u64() % 6) {
        case 0:
            s.corrupt_sender = true;
            s.sender_abort_before = idx;
            break;
        case 1:
            s.corrupt_sender = true;
            s.sender_garble_at = idx;
            break;
        case 2:
            s.corrupt_receiver = true;
            s.receiver_withhold_from = idx;
            break;
        case 3:
            s.corrupt_receiver = true;
            s.receiver_garble_at = idx;
            break;
        case 4:
            s.corrupt_receiver = true;
            s.receiver_abort_at = idx;
            break;
        default:
            break;  // honest run
    }
    return s;
}

}  // namespace fdl::testing

#endif
