#ifndef FDL_VFD_HPP
#define FDL_VFD_HPP

#include <optional>
#include <vector>

#include "messages.hpp"

// Verifiable fair delivery: the sender streams validated chunks, the
// receiver acknowledges each with a signed receipt, and the latest receipt
// is a publicly verifiable delivery count. Both machines are pure step
// functions driven by the surrounding scheduler; timers count scheduler
// rounds and reset on every progress event.

namespace fdl::vfd {

struct ReceiptProof {
    uint64_t index = 0;
    Signature sig{};
    auto operator<=>(const ReceiptProof&) const = default;
};

// The external validation predicate: chunk i is valid iff the provider
// signed (i || ciphertext) under the content scope id.
struct ChunkValidator {
    PubKey pk_provider{};
    Digest cid;

    bool operator()(const msg::SignedChunk& chunk) const {
        return crypto::verify(pk_provider,
                              msg::chunk_sig_payload(cid, chunk.index, chunk.ciphertext),
                              chunk.sig);
    }
};

struct Sender {
    // configuration
    Digest sid;
    PubKey pk_receiver{};
    PubKey pk_self{};
    std::vector<msg::SignedChunk> chunks;
    uint64_t timer_rounds = 2;

    // state
    uint64_t acked = 0;  // highest receipted index
    std::optional<ReceiptProof> proof;
    bool halted = false;
    uint64_t deadline = 0;

    std::vector<msg::Message> activate(uint64_t round);
    std::vector<msg::Message> on_receipt(const msg::Receipt& r, uint64_t round);
    void on_tick(uint64_t round);

private:
    std::vector<msg::Message> deliver_next();
};

struct Receiver {
    // configuration
    Digest sid;
    PubKey pk_sender{};
    crypto::SigKeyPair keys;
    ChunkValidator validator;
    uint64_t n = 0;
    uint64_t timer_rounds = 2;

    // state
    uint64_t expected = 1;
    std::vector<msg::SignedChunk> accepted;
    bool halted = false;
    bool complete = false;
    uint64_t deadline = 0;

    void activate(uint64_t round);
    std::vector<msg::Message> on_deliver(const msg::Deliver& d, uint64_t round);
    void on_tick(uint64_t round);
};

// Converts the latest receipt into a delivery count: the receipt's index
// when its signature binds (sid, index, pk_R, pk_S) and lies in [1, n],
// otherwise 0. A missing proof counts as 0.
uint64_t verify_proof(const std::optional<ReceiptProof>& proof, const Digest& sid,
                      const PubKey& pk_receiver, const PubKey& pk_sender, uint64_t n);

}  // namespace fdl::vfd

#endif
