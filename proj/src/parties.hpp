#ifndef FDL_PARTIES_HPP
#define FDL_PARTIES_HPP

#include "arbiter.hpp"
#include "vfd.hpp"

// Party state machines for the downloading protocol (Prepare / Deliver /
// Reveal) and the streaming protocol (Prepare / Stream / Payout). Each
// machine is stepped once per round with its sorted inbox and returns the
// messages it wants sent. Corrupted parties run the same machines with
// behavior knobs compiled from the scenario's adversary program.

namespace fdl::proto {

using arbiter::Mode;
using arbiter::PartyId;

struct SessionConfig {
    Mode mode = Mode::download;
    uint64_t n = 4;
    uint64_t eta = 64;
    msg::Prices prices{2, 5, 10};
    uint64_t theta = 1;
    uint64_t sessions = 1;
    uint64_t delta = 1;
    arbiter::ContractTimers contract_timers = arbiter::ContractTimers::defaults(4, 1);
    uint64_t party_timer = 2;
};

struct Inbound {
    PartyId from = PartyId::contract;
    msg::Message message;
};

struct Outbound {
    PartyId to = PartyId::contract;
    msg::Message message;
};

struct PaddedContent {
    std::vector<Bytes> chunks;
    uint64_t n = 0;
    uint64_t original_len = 0;
};

// Zero-pads to a whole number of chunks, then appends zero chunks up to
// the next power of two. Throws std::invalid_argument on empty input or a
// chunk size that is not a positive multiple of 32.
PaddedContent pad_content(ByteView raw, uint64_t eta);

// --- adversarial behavior knobs ---

struct ProviderBehavior {
    bool corrupt = false;
    std::optional<uint64_t> wrong_key_chunk;     // encrypt this chunk under a stray key
    std::optional<uint64_t> garbage_chunk;       // sign garbage bytes for this chunk
    bool reveal_short_cover = false;             // reveal one key fewer than owed
    bool skip_reveal = false;                    // never send the key reveal
    std::optional<uint64_t> wrong_reveal_elem;   // corrupt this cover element's value
    std::optional<uint64_t> wrong_stream_key_at; // streaming: sign a wrong chunk key
    std::optional<uint64_t> stop_stream_keys_at; // streaming: stop answering key requests
    bool skip_claim = false;                     // streaming: never claim
    bool skip_mtree = false;
    bool bad_mtree_sig = false;
    std::optional<uint64_t> abort_round;
};

struct DelivererBehavior {
    bool corrupt = false;
    std::optional<uint64_t> abort_after_chunks;  // stop after delivering this many
    bool ignore_proof_request = false;
    bool sybil = false;  // skip delivery; live off gifted receipts
    bool skip_claim = false;
    std::optional<uint64_t> abort_round;
};

struct ConsumerBehavior {
    bool corrupt = false;
    std::optional<uint64_t> withhold_receipts_from;  // swallow receipts from this index
    std::optional<uint64_t> abort_after_chunks;      // stop participating after this many
    std::optional<uint64_t> gift_receipt_index;      // sign unearned receipts at session start
    bool gift_to_provider = false;
    bool early_delivered = false;  // announce completion immediately
    bool skip_delivered = false;
    bool no_complaint = false;
    std::optional<uint64_t> abort_round;
};

// --- machines ---

class Provider {
public:
    Provider(const SessionConfig& cfg, const ProviderBehavior& behavior, const Digest& contract_id,
             std::vector<Bytes> content, crypto::Rng rng);

    std::vector<Outbound> step(const std::vector<Inbound>& inbox, uint64_t round);
    bool halted() const { return halted_; }
    uint64_t halt_round() const { return halt_round_; }
    const Digest& root() const { return root_; }
    const std::vector<msg::SignedChunk>& prepared_chunks() const { return encrypted_; }
    const keytree::KeyTree& key_tree() const { return kt_; }

private:
    std::vector<Outbound> on_revealing(uint64_t ctr);
    void maybe_claim(std::vector<Outbound>& out, bool allow_partial);
    void finish_session(std::vector<Outbound>& out, uint64_t round);

    SessionConfig cfg_;
    ProviderBehavior behavior_;
    Digest contract_id_;
    crypto::Rng rng_;
    crypto::SigKeyPair keys_;

    std::vector<Bytes> plain_;
    SymKey mk_;
    keytree::KeyTree kt_;
    merkle::MerkleTree mt_;
    Digest root_;
    Digest cid_;
    std::vector<msg::SignedChunk> encrypted_;

    // session state
    Digest sid_;
    PubKey pk_c_{};
    bool has_vpk_ = false;
    crypto::GroupElement vpk_c_;
    uint64_t reveal_cursor_ = 1;  // z: next key index to reveal (streaming)
    std::optional<msg::Receipt> best_receipt_;
    bool claimed_ = false;
    std::optional<uint64_t> key_receipt_deadline_;
    uint64_t sessions_done_ = 0;
    bool session_live_ = false;
    bool started_ = false;
    bool halted_ = false;
    uint64_t halt_round_ = 0;
};

class Deliverer {
public:
    Deliverer(const SessionConfig& cfg, const DelivererBehavior& behavior, const Digest& contract_id,
              crypto::Rng rng);

    std::vector<Outbound> step(const std::vector<Inbound>& inbox, uint64_t round);
    bool halted() const { return halted_; }
    uint64_t halt_round() const { return halt_round_; }
    const PubKey& pub() const { return keys_.pub; }

private:
    void maybe_claim(std::vector<Outbound>& out, bool allow_partial);
    std::vector<Outbound> filtered_send(std::vector<msg::Message> msgs);

    SessionConfig cfg_;
    DelivererBehavior behavior_;
    Digest contract_id_;
    crypto::Rng rng_;
    crypto::SigKeyPair keys_;

    PubKey pk_p_{};
    Digest root_;
    Digest cid_;
    std::vector<msg::SignedChunk> chunks_;
    bool have_chunks_ = false;

    // session state
    Digest sid_;
    PubKey pk_c_{};
    std::optional<vfd::Sender> sender_;  // downloading
    uint64_t stream_cursor_ = 0;         // y: last receipted index (streaming)
    uint64_t delivered_count_ = 0;
    std::optional<msg::Receipt> best_receipt_;
    bool claimed_ = false;
    std::optional<uint64_t> chunk_receipt_deadline_;
    uint64_t sessions_done_ = 0;
    bool session_live_ = false;
    bool halted_ = false;
    uint64_t halt_round_ = 0;
};

class Consumer {
public:
    Consumer(const SessionConfig& cfg, const ConsumerBehavior& behavior, const Digest& contract_id,
             crypto::Rng rng);

    std::vector<Outbound> step(const std::vector<Inbound>& inbox, uint64_t round);
    bool halted() const { return halted_; }
    uint64_t halt_round() const { return halt_round_; }

    // Chunks the consumer has output as valid content, in order, with the
    // round each became readable.
    const std::vector<Digest>& output_digests() const { return output_digests_; }
    const std::vector<uint64_t>& decrypt_rounds() const { return decrypt_rounds_; }

private:
    struct SessionKeys {
        crypto::SigKeyPair sig;
        crypto::VpkeKeyPair vpke;
    };

    std::vector<Outbound> on_ready(uint64_t round);
    std::vector<Outbound> on_mtree(const msg::Mtree& m, uint64_t round);
    std::vector<Outbound> on_deliver_download(const msg::Deliver& m, uint64_t round);
    std::vector<Outbound> on_deliver_stream(const msg::Deliver& m, uint64_t round);
    std::vector<Outbound> on_key_reveal(const msg::KeyReveal& m, uint64_t round);
    std::vector<Outbound> on_revealed(const msg::EvRevealed& m, uint64_t round);
    msg::Receipt make_receipt(uint64_t index, const PubKey& peer);

    SessionConfig cfg_;
    ConsumerBehavior behavior_;
    Digest contract_id_;
    crypto::Rng rng_;

    PubKey pk_p_{}, pk_d_{};
    Digest root_;
    Digest cid_;

    // session state
    SessionKeys keys_;
    Digest sid_;
    std::optional<merkle::MerkleTree> mt_;
    std::optional<vfd::Receiver> receiver_;  // downloading
    uint64_t ctr_ = 0;
    uint64_t stream_expected_ = 1;  // x
    std::vector<msg::SignedChunk> stream_chunks_;
    bool stream_stopped_ = false;
    std::optional<uint64_t> key_response_deadline_;
    bool delivered_sent_ = false;
    uint64_t sessions_done_ = 0;
    bool session_live_ = false;
    bool halted_ = false;
    uint64_t halt_round_ = 0;

    std::vector<Digest> output_digests_;
    std::vector<uint64_t> decrypt_rounds_;
};

}  // namespace fdl::proto

#endif
