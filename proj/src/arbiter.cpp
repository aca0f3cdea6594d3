#include "arbiter.hpp"

#include "keytree.hpp"
#include "merkle.hpp"

namespace fdl::arbiter {

const char* party_name(PartyId p) {
    switch (p) {
        case PartyId::contract: return "contract";
        case PartyId::provider: return "P";
        case PartyId::deliverer: return "D";
        case PartyId::consumer: return "C";
    }
    return "?";
}

const char* mode_name(Mode m) { return m == Mode::download ? "download" : "stream"; }

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::empty: return "empty";
        case Phase::started: return "started";
        case Phase::joined: return "joined";
        case Phase::ready: return "ready";
        case Phase::initiated: return "initiated";
        case Phase::revealing: return "revealing";
        case Phase::revealed: return "revealed";
        case Phase::received: return "received";
        case Phase::paying_delivery: return "payingDelivery";
        case Phase::paying_revealing: return "payingRevealing";
        case Phase::sold: return "sold";
        case Phase::not_sold: return "not_sold";
    }
    return "?";
}

uint64_t Ledger::balance(PartyId p) const {
    auto it = balances_.find(p);
    return it == balances_.end() ? 0 : it->second;
}

uint64_t Ledger::total_supply() const {
    uint64_t total = escrow_;
    for (const auto& [p, v] : balances_) total += v;
    return total;
}

bool Ledger::to_escrow(PartyId p, uint64_t amount, const std::string& reason) {
    if (balance(p) < amount) return false;
    balances_[p] -= amount;
    escrow_ += amount;
    ops_.push_back(Op{p, -static_cast<int64_t>(amount), static_cast<int64_t>(amount), reason});
    return true;
}

bool Ledger::from_escrow(PartyId p, uint64_t amount, const std::string& reason) {
    if (escrow_ < amount) return false;
    escrow_ -= amount;
    balances_[p] += amount;
    ops_.push_back(Op{p, static_cast<int64_t>(amount), -static_cast<int64_t>(amount), reason});
    return true;
}

void Ledger::mint(PartyId p, uint64_t amount, const std::string& reason) {
    balances_[p] += amount;
    ops_.push_back(Op{p, static_cast<int64_t>(amount), 0, reason});
}

ContractTimers ContractTimers::defaults(uint64_t n, uint64_t delta) {
    ContractTimers t;
    t.deliver = delta * (2 * n + 6);
    t.dispute = delta * 8;
    t.reveal = delta * 8;
    t.receive = delta * (4 * n + 8);
    t.finish = t.receive + delta * 8;
    t.proof_wait = 2 * delta;
    return t;
}

Digest derive_content_id(const Digest& root, const Digest& contract_id) {
    ByteWriter w;
    w.u8(0x90);
    w.raw(root.v);
    w.raw(contract_id.v);
    Bytes b = w.take();
    return crypto::hash(b);
}

Digest derive_session_id(const Digest& root, const Digest& contract_id, const PubKey& pk_sender,
                         const PubKey& pk_receiver, uint64_t nonce) {
    ByteWriter w;
    w.u8(0x91);
    w.raw(root.v);
    w.raw(contract_id.v);
    w.raw(ByteView{pk_sender.data(), pk_sender.size()});
    w.raw(ByteView{pk_receiver.data(), pk_receiver.size()});
    w.u64(nonce);
    Bytes b = w.take();
    return crypto::hash(b);
}

HandleResult Contract::accept(std::vector<Emission> ems, const std::string& note) {
    return HandleResult{true, note, std::move(ems)};
}

HandleResult Contract::handle(PartyId from, const msg::Message& m, size_t wire_size,
                              uint64_t round, Ledger& ledger) {
    HandleResult res = std::visit(
        [&](const auto& body) -> HandleResult {
            using T = std::decay_t<decltype(body)>;
            if constexpr (std::is_same_v<T, msg::Start>) return on_start(from, body, ledger);
            else if constexpr (std::is_same_v<T, msg::Join>) return on_join(from, body);
            else if constexpr (std::is_same_v<T, msg::Prepared>) return on_prepared(from);
            else if constexpr (std::is_same_v<T, msg::Consume>)
                return on_consume(from, body, round, ledger);
            else if constexpr (std::is_same_v<T, msg::Delivered>) return on_delivered(from, round);
            else if constexpr (std::is_same_v<T, msg::VfdProofMsg>)
                return on_vfd_proof(from, body, round, ledger);
            else if constexpr (std::is_same_v<T, msg::RevealKeys>)
                return on_reveal_keys(from, body, round);
            else if constexpr (std::is_same_v<T, msg::WrongRk>)
                return on_wrong_rk(from, round, ledger);
            else if constexpr (std::is_same_v<T, msg::PomDownloadMsg>)
                return on_pom_download(from, body, round, ledger);
            else if constexpr (std::is_same_v<T, msg::Received>)
                return on_received(from, round);
            else if constexpr (std::is_same_v<T, msg::PomStreamMsg>)
                return on_pom_stream(from, body, round);
            else if constexpr (std::is_same_v<T, msg::ClaimDelivery>)
                return on_claim_delivery(from, body, round);
            else if constexpr (std::is_same_v<T, msg::ClaimRevealing>)
                return on_claim_revealing(from, body, round);
            else if constexpr (std::is_same_v<T, msg::Reset>) return on_reset(from, ledger);
            else
                return reject("not a contract entry point");
        },
        m.body);
    if (res.accepted) {
        accepted_messages_ += 1;
        accepted_bytes_ += wire_size;
    }
    return res;
}

HandleResult Contract::on_start(PartyId from, const msg::Start& m, Ledger& ledger) {
    if (from != PartyId::provider) return reject("start: only the provider");
    if (phase_ != Phase::empty) return reject("start: contract already started");
    if (m.theta < 1) return reject("start: theta must be positive");
    if (!merkle::is_power_of_two(m.n)) return reject("start: n must be a power of two");
    uint64_t deposit = m.theta * (m.n * m.prices.delivery + m.prices.penalty);
    if (!ledger.to_escrow(PartyId::provider, deposit, "start deposit"))
        return reject("start: insufficient provider balance");
    pk_p_ = m.pk_p;
    root_ = m.root;
    theta_ = m.theta;
    n_ = m.n;
    prices_ = m.prices;
    cid_ = derive_content_id(root_, contract_id_);
    phase_ = Phase::started;
    return accept({Emission{std::nullopt,
                            msg::Message{sid_, msg::EvStarted{pk_p_, root_, theta_, n_, prices_}}}});
}

HandleResult Contract::on_join(PartyId from, const msg::Join& m) {
    if (from != PartyId::deliverer) return reject("join: only the deliverer");
    if (phase_ != Phase::started) return reject("join: wrong phase");
    pk_d_ = m.pk_d;
    phase_ = Phase::joined;
    return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvJoined{pk_d_}}}});
}

HandleResult Contract::on_prepared(PartyId from) {
    if (from != PartyId::deliverer) return reject("prepared: only the deliverer");
    if (phase_ != Phase::joined) return reject("prepared: wrong phase");
    phase_ = Phase::ready;
    return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvReady{}}}});
}

HandleResult Contract::on_consume(PartyId from, const msg::Consume& m, uint64_t round,
                                  Ledger& ledger) {
    if (from != PartyId::consumer) return reject("consume: only the consumer");
    if (theta_ == 0) return reject("consume: no repeats remaining");
    if (phase_ != Phase::ready) return reject("consume: wrong phase");
    if (mode_ == Mode::download) {
        if (!m.has_vpk || !crypto::group_valid(m.vpk))
            return reject("consume: valid verifiable-decryption key required");
    } else if (m.has_vpk) {
        return reject("consume: unexpected verifiable-decryption key");
    }
    if (!ledger.to_escrow(PartyId::consumer, n_ * prices_.content, "consume deposit"))
        return reject("consume: insufficient consumer balance");
    pk_c_ = m.pk_c;
    has_vpk_ = m.has_vpk;
    vpk_c_ = m.vpk;
    nonce_ += 1;
    sid_ = derive_session_id(root_, contract_id_, pk_d_, pk_c_, nonce_);
    if (mode_ == Mode::download) {
        t_deliver_ = round + timers_.deliver;
    } else {
        t_receive_ = round + timers_.receive;
        t_finish_ = round + timers_.finish;
    }
    phase_ = Phase::initiated;
    return accept({Emission{
        std::nullopt, msg::Message{sid_, msg::EvInitiated{pk_c_, has_vpk_, vpk_c_, sid_, nonce_}}}});
}

void Contract::request_proof(uint64_t round, std::vector<Emission>& ems) {
    t_deliver_.reset();
    proof_deadline_ = round + timers_.proof_wait;
    ems.push_back(Emission{PartyId::deliverer, msg::Message{sid_, msg::EvGetVfdProof{}}});
}

HandleResult Contract::on_delivered(PartyId from, uint64_t round) {
    if (mode_ != Mode::download) return reject("delivered: downloading only");
    if (from != PartyId::consumer) return reject("delivered: only the consumer");
    if (phase_ != Phase::initiated) return reject("delivered: wrong phase");
    if (proof_deadline_) return reject("delivered: proof already requested");
    std::vector<Emission> ems;
    request_proof(round, ems);
    return accept(std::move(ems));
}

std::vector<Emission> Contract::settle_delivery(uint64_t verified_ctr, uint64_t round,
                                                Ledger& ledger) {
    proof_deadline_.reset();
    t_deliver_.reset();
    ctr_ = verified_ctr;
    ledger.from_escrow(PartyId::deliverer, ctr_ * prices_.delivery, "delivery payment");
    if (fault_ == Fault::double_pay_deliverer)
        ledger.mint(PartyId::deliverer, ctr_ * prices_.delivery, "fault: duplicate delivery payment");
    ledger.from_escrow(PartyId::provider, (n_ - ctr_) * prices_.delivery, "undelivered refund");
    phase_ = Phase::revealing;
    t_reveal_ = round + timers_.reveal;
    return {Emission{std::nullopt, msg::Message{sid_, msg::EvRevealing{ctr_}}}};
}

HandleResult Contract::on_vfd_proof(PartyId from, const msg::VfdProofMsg& m, uint64_t round,
                                    Ledger& ledger) {
    if (from != PartyId::deliverer) return reject("vfd_proof: only the deliverer");
    if (!proof_deadline_) return reject("vfd_proof: no proof requested");
    std::optional<vfd::ReceiptProof> proof;
    if (m.has_receipt) proof = vfd::ReceiptProof{m.index, m.sig};
    uint64_t verified = vfd::verify_proof(proof, sid_, pk_c_, pk_d_, n_);
    return accept(settle_delivery(verified, round, ledger));
}

HandleResult Contract::on_reveal_keys(PartyId from, const msg::RevealKeys& m, uint64_t round) {
    if (mode_ != Mode::download) return reject("reveal_keys: downloading only");
    if (from != PartyId::provider) return reject("reveal_keys: only the provider");
    if (phase_ != Phase::revealing) return reject("reveal_keys: wrong phase");
    erk_hash_ = m.erk.digest();
    erk_positions_ = m.erk.positions();
    t_reveal_.reset();
    t_dispute_ = round + timers_.dispute;
    phase_ = Phase::revealed;
    return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvRevealed{m.erk}}}});
}

HandleResult Contract::on_wrong_rk(PartyId from, uint64_t round, Ledger& ledger) {
    if (mode_ != Mode::download) return reject("wrong_rk: downloading only");
    if (from != PartyId::consumer) return reject("wrong_rk: only the consumer");
    if (phase_ != Phase::revealed) return reject("wrong_rk: wrong phase");
    if (t_dispute_ && round >= *t_dispute_) return reject("wrong_rk: dispute window closed");
    if (keytree::validate_rkeys(n_, ctr_, erk_positions_))
        return reject("wrong_rk: cover validates");
    ledger.from_escrow(PartyId::consumer, n_ * prices_.content, "consume refund");
    ledger.from_escrow(PartyId::consumer, prices_.penalty, "penalty compensation");
    t_dispute_.reset();
    phase_ = Phase::not_sold;
    return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvNotSold{}}}});
}

bool Contract::validate_pom_download(const msg::PomDownload& pom) const {
    if (!erk_hash_) return false;
    if (pom.chunk_index < 1 || pom.chunk_index > n_) return false;
    if (pom.element_index >= pom.erk.elems.size()) return false;
    if (pom.erk.digest() != *erk_hash_) return false;
    const auto& elem = pom.erk.elems[pom.element_index];
    if (pom.rk_elem.position != elem.position) return false;
    // The decrypted cover value, re-embedded, must provably come out of
    // the committed ciphertext.
    auto embedded = crypto::encode_to_group(pom.rk_elem.value.v);
    if (!embedded) return false;
    if (!crypto::verify_pke(vpk_c_, elem.ct, *embedded, pom.vd_proof)) return false;
    if (!crypto::verify(pk_p_,
                        msg::chunk_sig_payload(cid_, pom.chunk_index, pom.ciphertext),
                        pom.chunk_sig))
        return false;
    if (pom.mtp.path.size() != keytree::log2_exact(n_)) return false;
    if (!merkle::verify_mtp(root_, pom.chunk_index, pom.mtp, pom.leaf)) return false;
    keytree::RevealSet rk{pom.rk_elem};
    auto key = keytree::recover_chunk_key(pom.chunk_index, 0, n_, rk);
    if (!key) return false;
    if (pom.ciphertext.empty() || pom.ciphertext.size() % 32 != 0) return false;
    Bytes plain = crypto::sym_decrypt(*key, pom.ciphertext);
    return crypto::hash(plain) != pom.leaf;
}

HandleResult Contract::on_pom_download(PartyId from, const msg::PomDownloadMsg& m, uint64_t round,
                                       Ledger& ledger) {
    if (mode_ != Mode::download) return reject("pom: downloading only");
    if (from != PartyId::consumer) return reject("pom: only the consumer");
    if (phase_ != Phase::revealed) return reject("pom: wrong phase");
    if (t_dispute_ && round >= *t_dispute_) return reject("pom: dispute window closed");
    if (!validate_pom_download(m.pom)) return reject("pom: invalid proof of misbehavior");
    ledger.from_escrow(PartyId::consumer, n_ * prices_.content, "consume refund");
    ledger.from_escrow(PartyId::consumer, prices_.penalty, "penalty compensation");
    t_dispute_.reset();
    phase_ = Phase::not_sold;
    return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvNotSold{}}}},
                  "misbehavior proven");
}

HandleResult Contract::on_received(PartyId from, uint64_t round) {
    if (mode_ != Mode::stream) return reject("received: streaming only");
    if (from != PartyId::consumer) return reject("received: only the consumer");
    if (phase_ != Phase::initiated) return reject("received: wrong phase");
    if (t_receive_ && round >= *t_receive_) return reject("received: window closed");
    t_receive_.reset();
    phase_ = Phase::received;
    return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvReceived{}}}});
}

bool Contract::validate_pom_stream(const msg::PomStream& pom) const {
    if (pom.chunk_index < 1 || pom.chunk_index > n_) return false;
    if (!crypto::verify(pk_p_,
                        msg::chunk_sig_payload(cid_, pom.chunk_index, pom.ciphertext),
                        pom.chunk_sig))
        return false;
    if (!crypto::verify(pk_p_, msg::key_reveal_payload(sid_, pom.chunk_index, pom.key),
                        pom.key_sig))
        return false;
    if (pom.mtp.path.size() != keytree::log2_exact(n_)) return false;
    if (!merkle::verify_mtp(root_, pom.chunk_index, pom.mtp, pom.leaf)) return false;
    if (pom.ciphertext.empty() || pom.ciphertext.size() % 32 != 0) return false;
    Bytes plain = crypto::sym_decrypt(pom.key, pom.ciphertext);
    return crypto::hash(plain) != pom.leaf;
}

HandleResult Contract::on_pom_stream(PartyId from, const msg::PomStreamMsg& m, uint64_t round) {
    if (mode_ != Mode::stream) return reject("pom: streaming only");
    if (from != PartyId::consumer) return reject("pom: only the consumer");
    if (phase_ != Phase::initiated) return reject("pom: wrong phase");
    if (t_receive_ && round >= *t_receive_) return reject("pom: window closed");
    if (!validate_pom_stream(m.pom)) return reject("pom: invalid proof of misbehavior");
    plt_ = true;
    t_receive_.reset();
    phase_ = Phase::received;
    return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvReceived{}}}},
                  "misbehavior proven");
}

HandleResult Contract::on_claim_delivery(PartyId from, const msg::ClaimDelivery& m,
                                         uint64_t round) {
    if (mode_ != Mode::stream) return reject("claim_delivery: streaming only");
    if (from != PartyId::deliverer) return reject("claim_delivery: only the deliverer");
    if (!t_finish_ || round >= *t_finish_) return reject("claim_delivery: claim window closed");
    if (phase_ != Phase::initiated && phase_ != Phase::received &&
        phase_ != Phase::paying_delivery && phase_ != Phase::paying_revealing)
        return reject("claim_delivery: wrong phase");
    if (m.index != n_ && phase_ == Phase::initiated)
        return reject("claim_delivery: streaming still running");
    if (m.index < 1 || m.index > n_) return reject("claim_delivery: index out of range");
    // Re-claims must strictly raise the verified index.
    if (m.index <= ctr_d_) return reject("claim_delivery: index does not improve");
    if (!crypto::verify(pk_c_, msg::receipt_payload(sid_, m.index, pk_c_, pk_d_), m.sig))
        return reject("claim_delivery: bad receipt");
    ctr_d_ = m.index;
    phase_ = Phase::paying_delivery;
    return accept(
        {Emission{std::nullopt, msg::Message{sid_, msg::EvPayingDelivery{m.index}}}});
}

HandleResult Contract::on_claim_revealing(PartyId from, const msg::ClaimRevealing& m,
                                          uint64_t round) {
    if (mode_ != Mode::stream) return reject("claim_revealing: streaming only");
    if (from != PartyId::provider) return reject("claim_revealing: only the provider");
    if (!t_finish_ || round >= *t_finish_) return reject("claim_revealing: claim window closed");
    if (phase_ != Phase::initiated && phase_ != Phase::received &&
        phase_ != Phase::paying_delivery && phase_ != Phase::paying_revealing)
        return reject("claim_revealing: wrong phase");
    if (m.index != n_ && phase_ == Phase::initiated)
        return reject("claim_revealing: streaming still running");
    if (m.index < 1 || m.index > n_) return reject("claim_revealing: index out of range");
    if (m.index <= ctr_p_) return reject("claim_revealing: index does not improve");
    if (!crypto::verify(pk_c_, msg::receipt_payload(sid_, m.index, pk_c_, pk_p_), m.sig))
        return reject("claim_revealing: bad receipt");
    ctr_p_ = m.index;
    phase_ = Phase::paying_revealing;
    return accept(
        {Emission{std::nullopt, msg::Message{sid_, msg::EvPayingRevealing{m.index}}}});
}

std::vector<Emission> Contract::settle_stream(Ledger& ledger) {
    t_receive_.reset();
    t_finish_.reset();
    ctr_ = std::max(ctr_d_, ctr_p_);
    ledger.from_escrow(PartyId::deliverer, ctr_ * prices_.delivery, "delivery payment");
    if (fault_ == Fault::double_pay_deliverer)
        ledger.mint(PartyId::deliverer, ctr_ * prices_.delivery, "fault: duplicate delivery payment");
    ledger.from_escrow(PartyId::provider, (n_ - ctr_) * prices_.delivery, "undelivered refund");
    ledger.from_escrow(PartyId::provider, ctr_ * prices_.content, "content payment");
    ledger.from_escrow(PartyId::consumer, (n_ - ctr_) * prices_.content, "unused consume refund");
    if (plt_)
        ledger.from_escrow(PartyId::consumer, prices_.penalty, "penalty compensation");
    else
        ledger.from_escrow(PartyId::provider, prices_.penalty, "penalty deposit returned");
    if (ctr_ > 0) {
        phase_ = Phase::sold;
        return {Emission{std::nullopt, msg::Message{sid_, msg::EvSold{}}}};
    }
    phase_ = Phase::not_sold;
    return {Emission{std::nullopt, msg::Message{sid_, msg::EvNotSold{}}}};
}

HandleResult Contract::on_reset(PartyId from, Ledger& ledger) {
    if (from != PartyId::provider) return reject("reset: only the provider");
    if (phase_ == Phase::sold || phase_ == Phase::not_sold) {
        if (theta_ == 0) return reject("reset: no repeats remaining");
        theta_ -= 1;
        clear_session();
        phase_ = Phase::ready;
        return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvReady{}}}});
    }
    if (phase_ == Phase::started || phase_ == Phase::joined || phase_ == Phase::ready) {
        if (theta_ == 0) return reject("reset: no repeats remaining");
        // Winding down an offer nobody is consuming returns the untouched
        // deposit slices.
        uint64_t refund = theta_ * (n_ * prices_.delivery + prices_.penalty);
        ledger.from_escrow(PartyId::provider, refund, "offer closed refund");
        theta_ = 0;
        clear_session();
        phase_ = Phase::not_sold;
        return accept({Emission{std::nullopt, msg::Message{sid_, msg::EvNotSold{}}}});
    }
    return reject("reset: wrong phase");
}

void Contract::clear_session() {
    ctr_ = ctr_d_ = ctr_p_ = 0;
    plt_ = false;
    erk_hash_.reset();
    erk_positions_.clear();
    pk_c_ = PubKey{};
    has_vpk_ = false;
    vpk_c_ = crypto::GroupElement{};
    t_deliver_.reset();
    t_dispute_.reset();
    t_reveal_.reset();
    t_receive_.reset();
    t_finish_.reset();
    proof_deadline_.reset();
}

std::vector<Emission> Contract::tick(uint64_t round, Ledger& ledger) {
    std::vector<Emission> ems;
    if (mode_ == Mode::download) {
        if (phase_ == Phase::initiated && t_deliver_ && round >= *t_deliver_ && !proof_deadline_)
            request_proof(round, ems);
        if (proof_deadline_ && round > *proof_deadline_) {
            // No timely proof; the deliverer forfeits this session.
            auto more = settle_delivery(0, round, ledger);
            ems.insert(ems.end(), more.begin(), more.end());
        }
        if (phase_ == Phase::revealing && t_reveal_ && round >= *t_reveal_) {
            // Keys never came; the consumer exits whole, with the penalty.
            ledger.from_escrow(PartyId::consumer, n_ * prices_.content, "consume refund");
            ledger.from_escrow(PartyId::consumer, prices_.penalty, "penalty compensation");
            t_reveal_.reset();
            phase_ = Phase::not_sold;
            ems.push_back(Emission{std::nullopt, msg::Message{sid_, msg::EvNotSold{}}});
        }
        if (phase_ == Phase::revealed && t_dispute_ && round >= *t_dispute_) {
            ledger.from_escrow(PartyId::provider, ctr_ * prices_.content, "content payment");
            ledger.from_escrow(PartyId::provider, prices_.penalty, "penalty deposit returned");
            ledger.from_escrow(PartyId::consumer, (n_ - ctr_) * prices_.content,
                               "unused consume refund");
            t_dispute_.reset();
            phase_ = Phase::sold;
            ems.push_back(Emission{std::nullopt, msg::Message{sid_, msg::EvSold{}}});
        }
    } else {
        if (phase_ == Phase::initiated && t_receive_ && round >= *t_receive_) {
            t_receive_.reset();
            phase_ = Phase::received;
            ems.push_back(Emission{std::nullopt, msg::Message{sid_, msg::EvReceived{}}});
        }
        if (t_finish_ && round >= *t_finish_ &&
            (phase_ == Phase::received || phase_ == Phase::paying_delivery ||
             phase_ == Phase::paying_revealing)) {
            auto more = settle_stream(ledger);
            ems.insert(ems.end(), more.begin(), more.end());
        }
    }
    return ems;
}

bool Contract::idle() const {
    return !t_deliver_ && !t_dispute_ && !t_reveal_ && !t_receive_ && !t_finish_ &&
           !proof_deadline_;
}

}  // namespace fdl::arbiter
