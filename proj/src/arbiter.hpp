#ifndef FDL_ARBITER_HPP
#define FDL_ARBITER_HPP

#include <map>
#include <string>

#include "messages.hpp"
#include "vfd.hpp"

// The coin ledger and the two arbiter contracts: a downloading contract
// that settles one VFD proof and one key reveal per session, and a
// streaming contract that settles the two latest receipts. Contracts are
// deterministic reducers; every accepted message bumps the on-chain call
// and byte counters that the efficiency checks read.

namespace fdl::arbiter {

enum class PartyId : uint8_t { contract = 0, provider = 1, deliverer = 2, consumer = 3 };
const char* party_name(PartyId p);

// Deliberate contract defects for negative-control runs.
enum class Fault : uint8_t {
    none = 0,
    double_pay_deliverer,  // credits the deliverer without backing escrow
};

class Ledger {
public:
    struct Op {
        PartyId party;
        int64_t balance_delta = 0;
        int64_t escrow_delta = 0;
        std::string reason;
    };

    void set_balance(PartyId p, uint64_t amount) { balances_[p] = amount; }
    uint64_t balance(PartyId p) const;
    uint64_t escrow() const { return escrow_; }
    uint64_t total_supply() const;

    // Moves coins between a balance and the contract escrow. Debits fail
    // without mutating anything when the balance is short.
    bool to_escrow(PartyId p, uint64_t amount, const std::string& reason);
    bool from_escrow(PartyId p, uint64_t amount, const std::string& reason);
    // Unbacked credit; only reachable through an injected fault.
    void mint(PartyId p, uint64_t amount, const std::string& reason);

    std::vector<Op> drain_ops() { return std::exchange(ops_, {}); }

private:
    std::map<PartyId, uint64_t> balances_;
    uint64_t escrow_ = 0;
    std::vector<Op> ops_;
};

struct Emission {
    std::optional<PartyId> to;  // nullopt broadcasts to all parties
    msg::Message message;
};

struct HandleResult {
    bool accepted = false;
    std::string reason;  // reject reason, or a short accept note
    std::vector<Emission> emissions;
};

// Timer durations in scheduler rounds.
struct ContractTimers {
    uint64_t deliver = 0;
    uint64_t dispute = 0;
    uint64_t reveal = 0;
    uint64_t receive = 0;
    uint64_t finish = 0;
    uint64_t proof_wait = 2;

    static ContractTimers defaults(uint64_t n, uint64_t delta);
};

enum class Mode : uint8_t { download = 0, stream = 1 };
const char* mode_name(Mode m);

// Contract phase. Downloading uses the revealing/revealed arm, streaming
// the received/paying arm; both share prepare and the terminal states.
enum class Phase : uint8_t {
    empty,
    started,
    joined,
    ready,
    initiated,
    revealing,
    revealed,
    received,
    paying_delivery,
    paying_revealing,
    sold,
    not_sold,
};
const char* phase_name(Phase p);

class Contract {
public:
    Contract(Mode mode, Digest contract_id, ContractTimers timers, Fault fault = Fault::none)
        : mode_(mode), contract_id_(contract_id), timers_(timers), fault_(fault) {}

    // `wire_size` is the encoded size of the message; accepted messages
    // add it to the on-chain byte counter.
    HandleResult handle(PartyId from, const msg::Message& m, size_t wire_size, uint64_t round,
                        Ledger& ledger);
    std::vector<Emission> tick(uint64_t round, Ledger& ledger);

    bool idle() const;  // no armed timer can fire anymore

    Mode mode() const { return mode_; }
    Phase phase() const { return phase_; }
    uint64_t ctr() const { return ctr_; }
    uint64_t ctr_deliverer() const { return ctr_d_; }
    uint64_t ctr_provider() const { return ctr_p_; }
    bool penalty_flag() const { return plt_; }
    uint64_t theta() const { return theta_; }
    uint64_t chunk_count() const { return n_; }
    const Digest& session_id() const { return sid_; }
    uint64_t session_nonce() const { return nonce_; }
    const Digest& content_id() const { return cid_; }
    const Digest& contract_id() const { return contract_id_; }
    const msg::Prices& prices() const { return prices_; }
    uint64_t accepted_messages() const { return accepted_messages_; }
    uint64_t accepted_bytes() const { return accepted_bytes_; }
    const std::optional<Digest>& erk_hash() const { return erk_hash_; }

private:
    HandleResult reject(const std::string& why) { return HandleResult{false, why, {}}; }
    HandleResult accept(std::vector<Emission> ems, const std::string& note = "");

    HandleResult on_start(PartyId from, const msg::Start& m, Ledger& ledger);
    HandleResult on_join(PartyId from, const msg::Join& m);
    HandleResult on_prepared(PartyId from);
    HandleResult on_consume(PartyId from, const msg::Consume& m, uint64_t round, Ledger& ledger);
    HandleResult on_delivered(PartyId from, uint64_t round);
    HandleResult on_vfd_proof(PartyId from, const msg::VfdProofMsg& m, uint64_t round,
                              Ledger& ledger);
    HandleResult on_reveal_keys(PartyId from, const msg::RevealKeys& m, uint64_t round);
    HandleResult on_wrong_rk(PartyId from, uint64_t round, Ledger& ledger);
    HandleResult on_pom_download(PartyId from, const msg::PomDownloadMsg& m, uint64_t round,
                                 Ledger& ledger);
    HandleResult on_received(PartyId from, uint64_t round);
    HandleResult on_pom_stream(PartyId from, const msg::PomStreamMsg& m, uint64_t round);
    HandleResult on_claim_delivery(PartyId from, const msg::ClaimDelivery& m, uint64_t round);
    HandleResult on_claim_revealing(PartyId from, const msg::ClaimRevealing& m, uint64_t round);
    HandleResult on_reset(PartyId from, Ledger& ledger);

    std::vector<Emission> settle_delivery(uint64_t verified_ctr, uint64_t round, Ledger& ledger);
    std::vector<Emission> settle_stream(Ledger& ledger);
    void request_proof(uint64_t round, std::vector<Emission>& ems);
    void clear_session();

    bool validate_pom_download(const msg::PomDownload& pom) const;
    bool validate_pom_stream(const msg::PomStream& pom) const;

    Mode mode_;
    Digest contract_id_;
    ContractTimers timers_;
    Fault fault_;

    Phase phase_ = Phase::empty;
    PubKey pk_p_{}, pk_d_{}, pk_c_{};
    bool has_vpk_ = false;
    crypto::GroupElement vpk_c_;
    Digest root_;
    Digest cid_;  // content scope id: hash(root || contract id)
    Digest sid_;
    uint64_t nonce_ = 0;
    uint64_t theta_ = 0;
    uint64_t n_ = 0;
    msg::Prices prices_;
    uint64_t ctr_ = 0, ctr_d_ = 0, ctr_p_ = 0;
    bool plt_ = false;
    std::optional<Digest> erk_hash_;
    std::vector<uint64_t> erk_positions_;

    // Absolute round deadlines.
    std::optional<uint64_t> t_deliver_, t_dispute_, t_reveal_, t_receive_, t_finish_;
    std::optional<uint64_t> proof_deadline_;

    uint64_t accepted_messages_ = 0;
    uint64_t accepted_bytes_ = 0;
};

Digest derive_content_id(const Digest& root, const Digest& contract_id);
Digest derive_session_id(const Digest& root, const Digest& contract_id, const PubKey& pk_sender,
                         const PubKey& pk_receiver, uint64_t nonce);

}  // namespace fdl::arbiter

#endif
