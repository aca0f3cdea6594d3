#ifndef FDL_SIMNET_HPP
#define FDL_SIMNET_HPP

#include <set>

#include "parties.hpp"

// Deterministic synchronous-round scheduler. Messages sent in round r are
// delivered at r+1 (or r+delta when the adversary stretches them); within
// a round the contract processes first, then provider, deliverer and
// consumer, and inboxes are sorted by sender rank. A transcript of every
// envelope, contract decision, ledger move and party summary is the sole
// input to the invariant checks.

namespace fdl::sim {

using arbiter::PartyId;

struct AdversaryPlan {
    std::set<PartyId> corrupt;
    proto::ProviderBehavior provider;
    proto::DelivererBehavior deliverer;
    proto::ConsumerBehavior consumer;
    bool delay_all = false;
    arbiter::Fault fault = arbiter::Fault::none;

    bool is_corrupt(PartyId p) const { return corrupt.count(p) > 0; }
};

struct RunConfig {
    proto::SessionConfig session;
    AdversaryPlan adversary;
    uint64_t seed = 0;
    std::optional<uint64_t> content_length;  // defaults to n * eta
    std::optional<std::map<PartyId, uint64_t>> initial_balances;
};

struct EnvelopeRecord {
    uint64_t round_sent = 0;
    uint64_t round_delivered = 0;
    PartyId from = PartyId::contract, to = PartyId::contract;
    msg::Kind kind = msg::Kind::start;
    uint64_t size = 0;
    std::optional<uint64_t> index;  // chunk/receipt index when applicable
    bool true_payload = true;       // chunk/key matches the committed content
};

struct ContractRecord {
    uint64_t round = 0;
    PartyId from = PartyId::contract;
    msg::Kind kind = msg::Kind::start;
    uint64_t size = 0;
    bool accepted = false;
    std::string reason;
    std::string phase_before, phase_after;
};

struct LedgerRecord {
    uint64_t round = 0;
    PartyId party = PartyId::contract;
    int64_t balance_delta = 0;
    int64_t escrow_delta = 0;
    std::string reason;
};

struct EventRecord {
    uint64_t round = 0;
    msg::Kind kind = msg::Kind::ev_started;
    uint64_t ctr = 0;  // for revealing/paying events
};

struct PartyStats {
    uint64_t bytes_sent = 0;
    uint64_t bytes_received = 0;
    uint64_t deliver_bytes_sent = 0;
    bool halted = false;
    uint64_t halt_round = 0;
};

struct SessionRecord {
    uint64_t nonce = 0;
    std::string sid_hex;
    uint64_t initiated_round = 0;
    uint64_t settled_round = 0;
    std::string outcome;  // sold / not_sold
    uint64_t ctr = 0;
    bool plt = false;
    bool pom_accepted = false;
    bool wrong_rk_accepted = false;
};

struct Transcript {
    // run identity
    std::string mode;
    uint64_t n = 0, eta = 0, delta = 1, seed = 0, theta = 1, sessions_planned = 1;
    msg::Prices prices;
    std::string root_hex;
    std::vector<Digest> leaves;  // committed content digests
    std::set<PartyId> corrupt;

    std::map<PartyId, uint64_t> initial_balances;
    uint64_t initial_supply = 0;

    std::vector<EnvelopeRecord> envelopes;
    std::vector<ContractRecord> contract_log;
    std::vector<EventRecord> events;
    std::vector<LedgerRecord> ledger_ops;
    std::vector<SessionRecord> session_records;

    std::map<PartyId, PartyStats> stats;
    std::map<PartyId, uint64_t> final_balances;
    uint64_t final_escrow = 0;
    std::string final_phase;
    uint64_t final_ctr = 0;
    bool final_plt = false;
    uint64_t contract_accepted_messages = 0;
    uint64_t contract_accepted_bytes = 0;

    std::vector<Digest> consumer_output;
    std::vector<uint64_t> consumer_decrypt_rounds;

    uint64_t last_round = 0;
    bool liveness_failure = false;

    std::string to_jsonl() const;
};

Transcript run(const RunConfig& cfg);

}  // namespace fdl::sim

#endif
