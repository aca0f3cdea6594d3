#include "vfd.hpp"

namespace fdl::vfd {

std::vector<msg::Message> Sender::deliver_next() {
    const auto& chunk = chunks[acked];  // chunk with index acked+1
    return {msg::Message{sid, msg::Deliver{chunk}}};
}

std::vector<msg::Message> Sender::activate(uint64_t round) {
    if (chunks.empty()) {
        halted = true;
        return {};
    }
    deadline = round + timer_rounds;
    return deliver_next();
}

std::vector<msg::Message> Sender::on_receipt(const msg::Receipt& r, uint64_t round) {
    if (halted) return {};
    uint64_t awaited = acked + 1;
    bool valid = r.index == awaited &&
                 crypto::verify(pk_receiver,
                                msg::receipt_payload(sid, r.index, pk_receiver, pk_self), r.sig);
    if (!valid) {
        halted = true;  // latest proof retained
        return {};
    }
    proof = ReceiptProof{r.index, r.sig};
    acked = r.index;
    if (acked == chunks.size()) {
        halted = true;
        return {};
    }
    deadline = round + timer_rounds;
    return deliver_next();
}

void Sender::on_tick(uint64_t round) {
    if (!halted && round >= deadline) halted = true;
}

void Receiver::activate(uint64_t round) {
    deadline = round + timer_rounds;
    if (n == 0) halted = true;
}

std::vector<msg::Message> Receiver::on_deliver(const msg::Deliver& d, uint64_t round) {
    if (halted) return {};
    // Strictly sequential: anything out of order halts the receiver.
    if (d.chunk.index != expected || !validator(d.chunk)) {
        halted = true;
        return {};
    }
    accepted.push_back(d.chunk);
    Signature sig = crypto::sign(
        keys, msg::receipt_payload(sid, d.chunk.index, keys.pub, pk_sender));
    msg::Receipt receipt{d.chunk.index, sig};
    if (expected == n) {
        complete = true;
        halted = true;
    } else {
        ++expected;
        deadline = round + timer_rounds;
    }
    return {msg::Message{sid, receipt}};
}

void Receiver::on_tick(uint64_t round) {
    if (!halted && round >= deadline) halted = true;
}

uint64_t verify_proof(const std::optional<ReceiptProof>& proof, const Digest& sid,
                      const PubKey& pk_receiver, const PubKey& pk_sender, uint64_t n) {
    if (!proof || proof->index < 1 || proof->index > n) return 0;
    if (!crypto::verify(pk_receiver, msg::receipt_payload(sid, proof->index, pk_receiver, pk_sender),
                        proof->sig))
        return 0;
    return proof->index;
}

}  // namespace fdl::vfd
