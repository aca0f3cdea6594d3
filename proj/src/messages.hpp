#ifndef FDL_MESSAGES_HPP
#define FDL_MESSAGES_HPP

#include <variant>
#include <vector>

#include "bytes.hpp"
#include "crypto.hpp"
#include "merkle.hpp"
#include "keytree.hpp"

// Every message exchanged in a run — party-to-party, party-to-contract and
// contract event — with its canonical wire encoding. Envelopes carry the
// encoded form, so byte counters measure exactly what the codec produces.
//
// Wire layout: kind tag (1) || session id (32, zero before a session forms)
// || body. Integers are 8-byte big-endian, digests/keys raw 32 bytes, group
// elements 49-byte compressed points, signatures raw 64 bytes.

namespace fdl::msg {

enum class Kind : uint8_t {
    // party -> contract
    start = 0x01,
    join = 0x02,
    prepared = 0x03,
    consume = 0x04,
    delivered = 0x05,
    vfd_proof = 0x06,
    reveal_keys = 0x07,
    wrong_rk = 0x08,
    pom_download = 0x09,
    pom_stream = 0x0a,
    claim_delivery = 0x0b,
    claim_revealing = 0x0c,
    reset = 0x0d,
    received = 0x0e,
    // contract events
    ev_started = 0x20,
    ev_joined = 0x21,
    ev_ready = 0x22,
    ev_initiated = 0x23,
    ev_get_vfd_proof = 0x24,
    ev_revealing = 0x25,
    ev_revealed = 0x26,
    ev_received = 0x27,
    ev_paying_delivery = 0x28,
    ev_paying_revealing = 0x29,
    ev_sold = 0x2a,
    ev_not_sold = 0x2b,
    // party <-> party
    sell = 0x40,
    mtree = 0x41,
    deliver = 0x42,
    receipt = 0x43,
    key_req = 0x44,
    key_reveal = 0x45,
};

const char* kind_name(Kind k);
extern const Kind kAllKinds[32];

// Domain tags prefixed to every signed composite.
enum class SigTag : uint8_t {
    chunk = 0x80,       // content scope: tag || cid || index || ciphertext
    mtree = 0x81,       // content scope: tag || cid || root
    receipt = 0x82,     // session scope: tag || sid || index || pk_signer || pk_peer
    key_req = 0x83,     // session scope: tag || sid || index || pk_consumer
    key_reveal = 0x84,  // session scope: tag || sid || index || key
};

struct SignedChunk {
    uint64_t index = 0;
    Bytes ciphertext;
    Signature sig{};
    auto operator<=>(const SignedChunk&) const = default;
};

struct EncryptedRevealElem {
    uint64_t position = 0;
    crypto::VpkeCiphertext ct;
    auto operator<=>(const EncryptedRevealElem&) const = default;
};

struct EncryptedRevealSet {
    std::vector<EncryptedRevealElem> elems;
    auto operator<=>(const EncryptedRevealSet&) const = default;

    Bytes canonical_bytes() const;
    Digest digest() const;
    std::vector<uint64_t> positions() const;
};

struct PomDownload {
    uint64_t chunk_index = 0;    // i
    uint64_t element_index = 0;  // j, into erk
    Bytes ciphertext;
    Signature chunk_sig{};
    Digest leaf;  // committed hash of the true chunk
    merkle::MerkleProof mtp;
    keytree::RevealElem rk_elem;  // decrypted cover element j
    EncryptedRevealSet erk;
    crypto::VpkeProof vd_proof;
    auto operator<=>(const PomDownload&) const = default;
};

struct PomStream {
    uint64_t chunk_index = 0;
    Bytes ciphertext;
    Signature chunk_sig{};
    SymKey key;
    Signature key_sig{};
    Digest leaf;
    merkle::MerkleProof mtp;
    auto operator<=>(const PomStream&) const = default;
};

struct Prices {
    uint64_t delivery = 0;  // paid by provider to deliverer, per chunk
    uint64_t content = 0;   // paid by consumer, per chunk
    uint64_t penalty = 0;   // provider misbehavior deposit, per session
    auto operator<=>(const Prices&) const = default;
};

// --- party -> contract ---

struct Start {
    PubKey pk_p{};
    Digest root;
    uint64_t theta = 0;
    uint64_t n = 0;
    Prices prices;
    static constexpr Kind kKind = Kind::start;
    auto operator<=>(const Start&) const = default;
};
struct Join {
    PubKey pk_d{};
    static constexpr Kind kKind = Kind::join;
    auto operator<=>(const Join&) const = default;
};
struct Prepared {
    static constexpr Kind kKind = Kind::prepared;
    auto operator<=>(const Prepared&) const = default;
};
struct Consume {
    PubKey pk_c{};
    bool has_vpk = false;
    crypto::GroupElement vpk;
    static constexpr Kind kKind = Kind::consume;
    auto operator<=>(const Consume&) const = default;
};
struct Delivered {
    static constexpr Kind kKind = Kind::delivered;
    auto operator<=>(const Delivered&) const = default;
};
struct VfdProofMsg {
    bool has_receipt = false;
    uint64_t index = 0;
    Signature sig{};
    static constexpr Kind kKind = Kind::vfd_proof;
    auto operator<=>(const VfdProofMsg&) const = default;
};
struct RevealKeys {
    EncryptedRevealSet erk;
    static constexpr Kind kKind = Kind::reveal_keys;
    auto operator<=>(const RevealKeys&) const = default;
};
struct WrongRk {
    static constexpr Kind kKind = Kind::wrong_rk;
    auto operator<=>(const WrongRk&) const = default;
};
struct PomDownloadMsg {
    PomDownload pom;
    static constexpr Kind kKind = Kind::pom_download;
    auto operator<=>(const PomDownloadMsg&) const = default;
};
struct PomStreamMsg {
    PomStream pom;
    static constexpr Kind kKind = Kind::pom_stream;
    auto operator<=>(const PomStreamMsg&) const = default;
};
struct ClaimDelivery {
    uint64_t index = 0;
    Signature sig{};
    static constexpr Kind kKind = Kind::claim_delivery;
    auto operator<=>(const ClaimDelivery&) const = default;
};
struct ClaimRevealing {
    uint64_t index = 0;
    Signature sig{};
    static constexpr Kind kKind = Kind::claim_revealing;
    auto operator<=>(const ClaimRevealing&) const = default;
};
struct Reset {
    static constexpr Kind kKind = Kind::reset;
    auto operator<=>(const Reset&) const = default;
};
struct Received {
    static constexpr Kind kKind = Kind::received;
    auto operator<=>(const Received&) const = default;
};

// --- contract events ---

struct EvStarted {
    PubKey pk_p{};
    Digest root;
    uint64_t theta = 0;
    uint64_t n = 0;
    Prices prices;
    static constexpr Kind kKind = Kind::ev_started;
    auto operator<=>(const EvStarted&) const = default;
};
struct EvJoined {
    PubKey pk_d{};
    static constexpr Kind kKind = Kind::ev_joined;
    auto operator<=>(const EvJoined&) const = default;
};
struct EvReady {
    static constexpr Kind kKind = Kind::ev_ready;
    auto operator<=>(const EvReady&) const = default;
};
struct EvInitiated {
    PubKey pk_c{};
    bool has_vpk = false;
    crypto::GroupElement vpk;
    Digest session_id;
    uint64_t nonce = 0;
    static constexpr Kind kKind = Kind::ev_initiated;
    auto operator<=>(const EvInitiated&) const = default;
};
struct EvGetVfdProof {
    static constexpr Kind kKind = Kind::ev_get_vfd_proof;
    auto operator<=>(const EvGetVfdProof&) const = default;
};
struct EvRevealing {
    uint64_t ctr = 0;
    static constexpr Kind kKind = Kind::ev_revealing;
    auto operator<=>(const EvRevealing&) const = default;
};
struct EvRevealed {
    EncryptedRevealSet erk;
    static constexpr Kind kKind = Kind::ev_revealed;
    auto operator<=>(const EvRevealed&) const = default;
};
struct EvReceived {
    static constexpr Kind kKind = Kind::ev_received;
    auto operator<=>(const EvReceived&) const = default;
};
struct EvPayingDelivery {
    uint64_t index = 0;
    static constexpr Kind kKind = Kind::ev_paying_delivery;
    auto operator<=>(const EvPayingDelivery&) const = default;
};
struct EvPayingRevealing {
    uint64_t index = 0;
    static constexpr Kind kKind = Kind::ev_paying_revealing;
    auto operator<=>(const EvPayingRevealing&) const = default;
};
struct EvSold {
    static constexpr Kind kKind = Kind::ev_sold;
    auto operator<=>(const EvSold&) const = default;
};
struct EvNotSold {
    static constexpr Kind kKind = Kind::ev_not_sold;
    auto operator<=>(const EvNotSold&) const = default;
};

// --- party <-> party ---

struct Sell {
    std::vector<SignedChunk> chunks;
    static constexpr Kind kKind = Kind::sell;
    auto operator<=>(const Sell&) const = default;
};
struct Mtree {
    std::vector<Digest> leaves;
    Signature sig{};
    static constexpr Kind kKind = Kind::mtree;
    auto operator<=>(const Mtree&) const = default;
};
struct Deliver {
    SignedChunk chunk;
    static constexpr Kind kKind = Kind::deliver;
    auto operator<=>(const Deliver&) const = default;
};
struct Receipt {
    uint64_t index = 0;
    Signature sig{};
    static constexpr Kind kKind = Kind::receipt;
    auto operator<=>(const Receipt&) const = default;
};
struct KeyReq {
    uint64_t index = 0;
    Signature sig{};
    static constexpr Kind kKind = Kind::key_req;
    auto operator<=>(const KeyReq&) const = default;
};
struct KeyReveal {
    uint64_t index = 0;
    SymKey key;
    Signature sig{};
    static constexpr Kind kKind = Kind::key_reveal;
    auto operator<=>(const KeyReveal&) const = default;
};

using Body =
    std::variant<Start, Join, Prepared, Consume, Delivered, VfdProofMsg, RevealKeys, WrongRk,
                 PomDownloadMsg, PomStreamMsg, ClaimDelivery, ClaimRevealing, Reset, Received,
                 EvStarted,
                 EvJoined, EvReady, EvInitiated, EvGetVfdProof, EvRevealing, EvRevealed,
                 EvReceived, EvPayingDelivery, EvPayingRevealing, EvSold, EvNotSold, Sell, Mtree,
                 Deliver, Receipt, KeyReq, KeyReveal>;

struct Message {
    Digest sid;  // zero before the session id exists
    Body body;
    bool operator==(const Message&) const = default;
};

Kind kind_of(const Body& body);
inline Kind kind_of(const Message& m) { return kind_of(m.body); }

Bytes encode_message(const Message& m);
std::optional<Message> decode_message(ByteView data);

// --- canonical signing payloads ---

Bytes chunk_sig_payload(const Digest& cid, uint64_t index, ByteView ciphertext);
Bytes mtree_sig_payload(const Digest& cid, const Digest& root);
Bytes receipt_payload(const Digest& sid, uint64_t index, const PubKey& pk_signer,
                      const PubKey& pk_peer);
Bytes key_req_payload(const Digest& sid, uint64_t index, const PubKey& pk_consumer);
Bytes key_reveal_payload(const Digest& sid, uint64_t index, const SymKey& key);

}  // namespace fdl::msg

#endif
