#include "parties.hpp"

#include <stdexcept>

namespace fdl::proto {

PaddedContent pad_content(ByteView raw, uint64_t eta) {
    if (raw.empty()) throw std::invalid_argument("content must not be empty");
    if (eta == 0 || eta % 32 != 0)
        throw std::invalid_argument("chunk size must be a positive multiple of 32");
    PaddedContent out;
    out.original_len = raw.size();
    uint64_t count = (raw.size() + eta - 1) / eta;
    uint64_t n = 1;
    while (n < count) n *= 2;
    out.n = n;
    for (uint64_t i = 0; i < n; ++i) {
        Bytes chunk(eta, 0);
        size_t off = static_cast<size_t>(i * eta);
        if (off < raw.size()) {
            size_t take = std::min<size_t>(eta, raw.size() - off);
            std::copy(raw.begin() + off, raw.begin() + off + take, chunk.begin());
        }
        out.chunks.push_back(std::move(chunk));
    }
    return out;
}

// ---------------------------------------------------------------- Provider

Provider::Provider(const SessionConfig& cfg, const ProviderBehavior& behavior,
                   const Digest& contract_id, std::vector<Bytes> content, crypto::Rng rng)
    : cfg_(cfg),
      behavior_(behavior),
      contract_id_(contract_id),
      rng_(rng),
      plain_(std::move(content)) {
    keys_ = crypto::sig_keygen(rng_);
    mk_ = rng_.next_key();
    kt_ = keytree::gen_sub_keys(cfg_.n, mk_);
    mt_ = merkle::build_mt(plain_);
    root_ = mt_.root();
    cid_ = arbiter::derive_content_id(root_, contract_id_);
    for (uint64_t i = 1; i <= cfg_.n; ++i) {
        SymKey key = kt_.chunk_key(i);
        if (behavior_.wrong_key_chunk && *behavior_.wrong_key_chunk == i) key = rng_.next_key();
        Bytes ct = crypto::sym_encrypt(key, plain_[i - 1]);
        if (behavior_.garbage_chunk && *behavior_.garbage_chunk == i)
            ct = rng_.next_bytes(cfg_.eta);
        Signature sig = crypto::sign(keys_, msg::chunk_sig_payload(cid_, i, ct));
        encrypted_.push_back(msg::SignedChunk{i, ct, sig});
    }
}

std::vector<Outbound> Provider::on_revealing(uint64_t ctr) {
    if (behavior_.skip_reveal) return {};
    uint64_t reveal_ctr = ctr;
    if (behavior_.reveal_short_cover && reveal_ctr > 0) reveal_ctr -= 1;
    msg::EncryptedRevealSet erk;
    if (reveal_ctr > 0) {
        keytree::RevealSet rk = keytree::reveal_keys(cfg_.n, reveal_ctr, mk_);
        if (behavior_.wrong_reveal_elem && *behavior_.wrong_reveal_elem < rk.size())
            rk[*behavior_.wrong_reveal_elem].value = rng_.next_key();
        for (const auto& elem : rk) {
            auto embedded = crypto::encode_to_group(elem.value.v);
            if (!embedded) return {};  // 2^-256 per element; treated as an abort
            erk.elems.push_back(msg::EncryptedRevealElem{
                elem.position, crypto::venc_rand(vpk_c_, *embedded, rng_)});
        }
    }
    return {Outbound{PartyId::contract, msg::Message{sid_, msg::RevealKeys{std::move(erk)}}}};
}

void Provider::maybe_claim(std::vector<Outbound>& out, bool allow_partial) {
    if (cfg_.mode != Mode::stream || claimed_ || behavior_.skip_claim || !session_live_) return;
    if (!best_receipt_) return;
    if (!allow_partial && best_receipt_->index != cfg_.n) return;
    claimed_ = true;
    out.push_back(Outbound{PartyId::contract,
                           msg::Message{sid_, msg::ClaimRevealing{best_receipt_->index,
                                                                  best_receipt_->sig}}});
}

void Provider::finish_session(std::vector<Outbound>& out, uint64_t round) {
    if (!session_live_) return;
    session_live_ = false;
    sessions_done_ += 1;
    if (sessions_done_ < cfg_.sessions) {
        out.push_back(Outbound{PartyId::contract, msg::Message{sid_, msg::Reset{}}});
    } else {
        halted_ = true;
        halt_round_ = round;
    }
}

std::vector<Outbound> Provider::step(const std::vector<Inbound>& inbox, uint64_t round) {
    std::vector<Outbound> out;
    if (halted_) return out;
    if (behavior_.abort_round && round >= *behavior_.abort_round) {
        halted_ = true;
        halt_round_ = round;
        return out;
    }
    if (!started_) {
        started_ = true;
        out.push_back(Outbound{
            PartyId::contract,
            msg::Message{{}, msg::Start{keys_.pub, root_, cfg_.theta, cfg_.n, cfg_.prices}}});
    }
    for (const auto& in : inbox) {
        if (std::holds_alternative<msg::EvJoined>(in.message.body)) {
            out.push_back(Outbound{PartyId::deliverer, msg::Message{{}, msg::Sell{encrypted_}}});
        } else if (const auto* ini = std::get_if<msg::EvInitiated>(&in.message.body)) {
            session_live_ = true;
            sid_ = ini->session_id;
            pk_c_ = ini->pk_c;
            has_vpk_ = ini->has_vpk;
            vpk_c_ = ini->vpk;
            reveal_cursor_ = 1;
            best_receipt_.reset();
            claimed_ = false;
            key_receipt_deadline_.reset();
            if (!behavior_.skip_mtree) {
                Signature sig = crypto::sign(keys_, msg::mtree_sig_payload(cid_, root_));
                if (behavior_.bad_mtree_sig) sig[0] ^= 0xff;
                out.push_back(
                    Outbound{PartyId::consumer, msg::Message{sid_, msg::Mtree{mt_.levels[0], sig}}});
            }
        } else if (const auto* rev = std::get_if<msg::EvRevealing>(&in.message.body)) {
            auto more = on_revealing(rev->ctr);
            out.insert(out.end(), more.begin(), more.end());
        } else if (const auto* req = std::get_if<msg::KeyReq>(&in.message.body)) {
            if (cfg_.mode != Mode::stream || !session_live_ || in.from != PartyId::consumer)
                continue;
            bool valid = req->index == reveal_cursor_ &&
                         crypto::verify(pk_c_, msg::key_req_payload(sid_, req->index, pk_c_),
                                        req->sig);
            if (!valid) continue;
            if (behavior_.stop_stream_keys_at && req->index >= *behavior_.stop_stream_keys_at)
                continue;
            SymKey key = kt_.chunk_key(req->index);
            if (behavior_.wrong_stream_key_at && *behavior_.wrong_stream_key_at == req->index)
                key = rng_.next_key();
            Signature sig =
                crypto::sign(keys_, msg::key_reveal_payload(sid_, req->index, key));
            out.push_back(Outbound{PartyId::consumer,
                                   msg::Message{sid_, msg::KeyReveal{req->index, key, sig}}});
            key_receipt_deadline_ = round + cfg_.party_timer;
        } else if (const auto* rcpt = std::get_if<msg::Receipt>(&in.message.body)) {
            if (cfg_.mode != Mode::stream || !session_live_ || in.from != PartyId::consumer)
                continue;
            bool valid =
                rcpt->index == reveal_cursor_ &&
                crypto::verify(pk_c_, msg::receipt_payload(sid_, rcpt->index, pk_c_, keys_.pub),
                               rcpt->sig);
            if (!valid) continue;  // timer handles the silence
            best_receipt_ = *rcpt;
            reveal_cursor_ += 1;
            key_receipt_deadline_.reset();
            if (reveal_cursor_ == cfg_.n + 1) maybe_claim(out, false);
        } else if (std::holds_alternative<msg::EvReceived>(in.message.body) ||
                   std::holds_alternative<msg::EvPayingDelivery>(in.message.body)) {
            maybe_claim(out, true);
        } else if (std::holds_alternative<msg::EvSold>(in.message.body) ||
                   std::holds_alternative<msg::EvNotSold>(in.message.body)) {
            finish_session(out, round);
            if (halted_) return out;
        }
    }
    if (key_receipt_deadline_ && round >= *key_receipt_deadline_) key_receipt_deadline_.reset();
    return out;
}

// --------------------------------------------------------------- Deliverer

Deliverer::Deliverer(const SessionConfig& cfg, const DelivererBehavior& behavior,
                     const Digest& contract_id, crypto::Rng rng)
    : cfg_(cfg), behavior_(behavior), contract_id_(contract_id), rng_(rng) {
    keys_ = crypto::sig_keygen(rng_);
}

std::vector<Outbound> Deliverer::filtered_send(std::vector<msg::Message> msgs) {
    std::vector<Outbound> out;
    for (auto& m : msgs) {
        if (const auto* d = std::get_if<msg::Deliver>(&m.body)) {
            if (behavior_.abort_after_chunks && d->chunk.index > *behavior_.abort_after_chunks) {
                if (sender_) sender_->halted = true;
                continue;
            }
            delivered_count_ = std::max(delivered_count_, d->chunk.index);
        }
        out.push_back(Outbound{PartyId::consumer, std::move(m)});
    }
    return out;
}

void Deliverer::maybe_claim(std::vector<Outbound>& out, bool allow_partial) {
    if (cfg_.mode != Mode::stream || claimed_ || behavior_.skip_claim || !session_live_) return;
    if (!best_receipt_) return;
    if (!allow_partial && best_receipt_->index != cfg_.n) return;
    claimed_ = true;
    out.push_back(Outbound{PartyId::contract,
                           msg::Message{sid_, msg::ClaimDelivery{best_receipt_->index,
                                                                 best_receipt_->sig}}});
}

std::vector<Outbound> Deliverer::step(const std::vector<Inbound>& inbox, uint64_t round) {
    std::vector<Outbound> out;
    if (halted_) return out;
    if (behavior_.abort_round && round >= *behavior_.abort_round) {
        halted_ = true;
        halt_round_ = round;
        return out;
    }
    for (const auto& in : inbox) {
        if (const auto* st = std::get_if<msg::EvStarted>(&in.message.body)) {
            pk_p_ = st->pk_p;
            root_ = st->root;
            cid_ = arbiter::derive_content_id(root_, contract_id_);
            out.push_back(Outbound{PartyId::contract, msg::Message{{}, msg::Join{keys_.pub}}});
        } else if (const auto* sell = std::get_if<msg::Sell>(&in.message.body)) {
            if (have_chunks_ || in.from != PartyId::provider) continue;
            vfd::ChunkValidator psi{pk_p_, cid_};
            bool ok = sell->chunks.size() == cfg_.n;
            for (uint64_t i = 0; ok && i < sell->chunks.size(); ++i)
                ok = sell->chunks[i].index == i + 1 && sell->chunks[i].ciphertext.size() == cfg_.eta &&
                     psi(sell->chunks[i]);
            if (!ok) {  // refuse the delegation
                halted_ = true;
                halt_round_ = round;
                return out;
            }
            chunks_ = sell->chunks;
            have_chunks_ = true;
            out.push_back(Outbound{PartyId::contract, msg::Message{{}, msg::Prepared{}}});
        } else if (const auto* ini = std::get_if<msg::EvInitiated>(&in.message.body)) {
            session_live_ = true;
            sid_ = ini->session_id;
            pk_c_ = ini->pk_c;
            best_receipt_.reset();
            claimed_ = false;
            delivered_count_ = 0;
            stream_cursor_ = 0;
            sender_.reset();
            chunk_receipt_deadline_.reset();
            if (behavior_.sybil) continue;
            if (cfg_.mode == Mode::download) {
                sender_.emplace();
                sender_->sid = sid_;
                sender_->pk_receiver = pk_c_;
                sender_->pk_self = keys_.pub;
                sender_->chunks = chunks_;
                sender_->timer_rounds = cfg_.party_timer;
                auto msgs = sender_->activate(round);
                auto sent = filtered_send(std::move(msgs));
                out.insert(out.end(), sent.begin(), sent.end());
            } else if (!behavior_.abort_after_chunks || *behavior_.abort_after_chunks >= 1) {
                out.push_back(
                    Outbound{PartyId::consumer, msg::Message{sid_, msg::Deliver{chunks_[0]}}});
                delivered_count_ = 1;
                chunk_receipt_deadline_ = round + cfg_.party_timer;
            }
        } else if (const auto* rcpt = std::get_if<msg::Receipt>(&in.message.body)) {
            if (!session_live_ || in.from != PartyId::consumer) continue;
            if (behavior_.sybil) {
                bool valid = crypto::verify(
                    pk_c_, msg::receipt_payload(sid_, rcpt->index, pk_c_, keys_.pub), rcpt->sig);
                if (valid && (!best_receipt_ || rcpt->index > best_receipt_->index))
                    best_receipt_ = *rcpt;
                continue;
            }
            if (cfg_.mode == Mode::download) {
                if (!sender_) continue;
                auto msgs = sender_->on_receipt(*rcpt, round);
                if (sender_->proof &&
                    (!best_receipt_ || sender_->proof->index > best_receipt_->index))
                    best_receipt_ = msg::Receipt{sender_->proof->index, sender_->proof->sig};
                auto sent = filtered_send(std::move(msgs));
                out.insert(out.end(), sent.begin(), sent.end());
            } else {
                bool valid =
                    rcpt->index == delivered_count_ &&
                    crypto::verify(pk_c_,
                                   msg::receipt_payload(sid_, rcpt->index, pk_c_, keys_.pub),
                                   rcpt->sig);
                if (!valid) continue;
                best_receipt_ = *rcpt;
                chunk_receipt_deadline_.reset();
                if (delivered_count_ == cfg_.n) {
                    maybe_claim(out, false);
                } else if (!behavior_.abort_after_chunks ||
                           delivered_count_ < *behavior_.abort_after_chunks) {
                    out.push_back(Outbound{
                        PartyId::consumer,
                        msg::Message{sid_, msg::Deliver{chunks_[delivered_count_]}}});
                    delivered_count_ += 1;
                    chunk_receipt_deadline_ = round + cfg_.party_timer;
                }
            }
        } else if (std::holds_alternative<msg::EvGetVfdProof>(in.message.body)) {
            if (behavior_.ignore_proof_request) continue;
            msg::VfdProofMsg proof;
            if (best_receipt_) {
                proof.has_receipt = true;
                proof.index = best_receipt_->index;
                proof.sig = best_receipt_->sig;
            }
            out.push_back(Outbound{PartyId::contract, msg::Message{sid_, proof}});
        } else if (std::holds_alternative<msg::EvReceived>(in.message.body) ||
                   std::holds_alternative<msg::EvPayingRevealing>(in.message.body)) {
            maybe_claim(out, true);
        } else if (std::holds_alternative<msg::EvSold>(in.message.body) ||
                   std::holds_alternative<msg::EvNotSold>(in.message.body)) {
            session_live_ = false;
            sender_.reset();
            chunk_receipt_deadline_.reset();
            sessions_done_ += 1;
            if (sessions_done_ == cfg_.sessions) {
                halted_ = true;
                halt_round_ = round;
                return out;
            }
        }
    }
    if (sender_) sender_->on_tick(round);
    if (chunk_receipt_deadline_ && round >= *chunk_receipt_deadline_) chunk_receipt_deadline_.reset();
    return out;
}

// ---------------------------------------------------------------- Consumer

Consumer::Consumer(const SessionConfig& cfg, const ConsumerBehavior& behavior,
                   const Digest& contract_id, crypto::Rng rng)
    : cfg_(cfg), behavior_(behavior), contract_id_(contract_id), rng_(rng) {}

msg::Receipt Consumer::make_receipt(uint64_t index, const PubKey& peer) {
    return msg::Receipt{index,
                        crypto::sign(keys_.sig, msg::receipt_payload(sid_, index, keys_.sig.pub,
                                                                     peer))};
}

std::vector<Outbound> Consumer::on_ready(uint64_t) {
    if (session_live_ || sessions_done_ >= cfg_.sessions) return {};
    keys_.sig = crypto::sig_keygen(rng_);
    keys_.vpke = crypto::vpke_keygen(rng_);
    mt_.reset();
    receiver_.reset();
    ctr_ = 0;
    stream_expected_ = 1;
    stream_chunks_.clear();
    stream_stopped_ = false;
    key_response_deadline_.reset();
    delivered_sent_ = false;
    bool dl = cfg_.mode == Mode::download;
    return {Outbound{PartyId::contract,
                     msg::Message{{}, msg::Consume{keys_.sig.pub, dl, keys_.vpke.pub}}}};
}

std::vector<Outbound> Consumer::on_mtree(const msg::Mtree& m, uint64_t round) {
    if (mt_ || m.leaves.size() != cfg_.n) return {};
    merkle::MerkleTree tree = merkle::build_from_leaves(m.leaves);
    bool valid = tree.root() == root_ &&
                 crypto::verify(pk_p_, msg::mtree_sig_payload(cid_, tree.root()), m.sig);
    if (!valid) return {};  // no receipts will ever be issued
    mt_ = std::move(tree);
    if (cfg_.mode == Mode::download) {
        receiver_.emplace();
        receiver_->sid = sid_;
        receiver_->pk_sender = pk_d_;
        receiver_->keys = keys_.sig;
        receiver_->validator = vfd::ChunkValidator{pk_p_, cid_};
        receiver_->n = cfg_.n;
        receiver_->timer_rounds = cfg_.party_timer;
        receiver_->activate(round);
    }
    return {};
}

std::vector<Outbound> Consumer::on_deliver_download(const msg::Deliver& m, uint64_t round) {
    if (!receiver_ || receiver_->halted) return {};
    if (m.chunk.ciphertext.size() != cfg_.eta) {
        receiver_->halted = true;
        return {};
    }
    if (behavior_.abort_after_chunks && m.chunk.index > *behavior_.abort_after_chunks) {
        receiver_->halted = true;
        return {};
    }
    auto msgs = receiver_->on_deliver(m, round);
    std::vector<Outbound> out;
    for (auto& rm : msgs) {
        const auto* rcpt = std::get_if<msg::Receipt>(&rm.body);
        if (rcpt && behavior_.withhold_receipts_from &&
            rcpt->index >= *behavior_.withhold_receipts_from)
            continue;
        out.push_back(Outbound{PartyId::deliverer, std::move(rm)});
    }
    if (receiver_->complete && !delivered_sent_ && !behavior_.skip_delivered) {
        delivered_sent_ = true;
        out.push_back(Outbound{PartyId::contract, msg::Message{sid_, msg::Delivered{}}});
    }
    return out;
}

std::vector<Outbound> Consumer::on_deliver_stream(const msg::Deliver& m, uint64_t round) {
    if (stream_stopped_ || !mt_) return {};
    if (behavior_.abort_after_chunks && m.chunk.index > *behavior_.abort_after_chunks) {
        stream_stopped_ = true;
        return {};
    }
    vfd::ChunkValidator psi{pk_p_, cid_};
    if (m.chunk.index != stream_expected_ || m.chunk.ciphertext.size() != cfg_.eta ||
        !psi(m.chunk)) {
        stream_stopped_ = true;
        return {};
    }
    stream_chunks_.push_back(m.chunk);
    key_response_deadline_ = round + cfg_.party_timer;
    msg::KeyReq req{m.chunk.index,
                    crypto::sign(keys_.sig, msg::key_req_payload(sid_, m.chunk.index,
                                                                 keys_.sig.pub))};
    return {Outbound{PartyId::provider, msg::Message{sid_, req}}};
}

std::vector<Outbound> Consumer::on_key_reveal(const msg::KeyReveal& m, uint64_t round) {
    if (stream_stopped_ || !mt_) return {};
    if (m.index != stream_expected_ || stream_chunks_.size() < stream_expected_) return {};
    bool sig_ok =
        crypto::verify(pk_p_, msg::key_reveal_payload(sid_, m.index, m.key), m.sig);
    if (!sig_ok) {
        stream_stopped_ = true;
        return {};
    }
    key_response_deadline_.reset();
    const msg::SignedChunk& chunk = stream_chunks_[m.index - 1];
    Bytes plain = crypto::sym_decrypt(m.key, chunk.ciphertext);
    Digest digest = crypto::hash(plain);
    std::vector<Outbound> out;
    if (digest != mt_->leaf(m.index)) {
        stream_stopped_ = true;
        if (behavior_.no_complaint) return {};
        msg::PomStream pom;
        pom.chunk_index = m.index;
        pom.ciphertext = chunk.ciphertext;
        pom.chunk_sig = chunk.sig;
        pom.key = m.key;
        pom.key_sig = m.sig;
        pom.leaf = mt_->leaf(m.index);
        pom.mtp = merkle::gen_mtp(*mt_, m.index);
        out.push_back(Outbound{PartyId::contract, msg::Message{sid_, msg::PomStreamMsg{pom}}});
        return out;
    }
    output_digests_.push_back(digest);
    decrypt_rounds_.push_back(round);
    if (!behavior_.withhold_receipts_from || m.index < *behavior_.withhold_receipts_from) {
        out.push_back(Outbound{PartyId::deliverer, msg::Message{sid_, make_receipt(m.index, pk_d_)}});
        out.push_back(Outbound{PartyId::provider, msg::Message{sid_, make_receipt(m.index, pk_p_)}});
    }
    stream_expected_ += 1;
    if (stream_expected_ == cfg_.n + 1) {
        stream_stopped_ = true;
        if (!behavior_.skip_delivered)
            out.push_back(Outbound{PartyId::contract, msg::Message{sid_, msg::Received{}}});
    }
    return out;
}

std::vector<Outbound> Consumer::on_revealed(const msg::EvRevealed& m, uint64_t round) {
    std::vector<Outbound> out;
    if (!keytree::validate_rkeys(cfg_.n, ctr_, m.erk.positions())) {
        if (!behavior_.no_complaint)
            out.push_back(Outbound{PartyId::contract, msg::Message{sid_, msg::WrongRk{}}});
        return out;
    }
    if (ctr_ == 0 || !mt_ || !receiver_) return out;

    // Decrypt the cover element-wise.
    keytree::RevealSet rk;
    std::vector<bool> decodable(m.erk.elems.size(), false);
    for (size_t j = 0; j < m.erk.elems.size(); ++j) {
        SymKey value{};
        auto plain = crypto::vdec(keys_.vpke.sec, m.erk.elems[j].ct);
        if (plain) {
            if (auto decoded = crypto::decode_from_group(*plain)) {
                value = SymKey{*decoded};
                decodable[j] = true;
            }
        }
        rk.push_back(keytree::RevealElem{m.erk.elems[j].position, value});
    }

    uint64_t usable = std::min<uint64_t>(ctr_, receiver_->accepted.size());
    std::vector<Digest> digests;
    for (uint64_t i = 1; i <= usable; ++i) {
        std::optional<SymKey> key;
        size_t elem = 0;
        for (size_t j = 0; j < rk.size(); ++j) {
            if (auto k = keytree::recover_chunk_key(i, j, cfg_.n, rk)) {
                key = k;
                elem = j;
                break;
            }
        }
        if (!key) return out;  // cover validated yet unusable; nothing provable
        if (!decodable[elem]) return out;
        const msg::SignedChunk& chunk = receiver_->accepted[i - 1];
        Bytes plain = crypto::sym_decrypt(*key, chunk.ciphertext);
        Digest digest = crypto::hash(plain);
        if (digest != mt_->leaf(i)) {
            if (behavior_.no_complaint) return out;
            msg::PomDownload pom;
            pom.chunk_index = i;
            pom.element_index = elem;
            pom.ciphertext = chunk.ciphertext;
            pom.chunk_sig = chunk.sig;
            pom.leaf = mt_->leaf(i);
            pom.mtp = merkle::gen_mtp(*mt_, i);
            auto proved = crypto::prove_pke(keys_.vpke.sec, m.erk.elems[elem].ct, rng_);
            if (!proved) return out;
            pom.rk_elem = keytree::RevealElem{rk[elem].position, rk[elem].value};
            pom.erk = m.erk;
            pom.vd_proof = proved->second;
            out.push_back(Outbound{PartyId::contract, msg::Message{sid_, msg::PomDownloadMsg{pom}}});
            return out;
        }
        digests.push_back(digest);
    }
    // Everything checks out; the prefix becomes output.
    for (uint64_t i = 0; i < usable; ++i) {
        output_digests_.push_back(digests[i]);
        decrypt_rounds_.push_back(round);
    }
    return out;
}

std::vector<Outbound> Consumer::step(const std::vector<Inbound>& inbox, uint64_t round) {
    std::vector<Outbound> out;
    if (halted_) return out;
    if (behavior_.abort_round && round >= *behavior_.abort_round) {
        halted_ = true;
        halt_round_ = round;
        return out;
    }
    for (const auto& in : inbox) {
        if (const auto* st = std::get_if<msg::EvStarted>(&in.message.body)) {
            pk_p_ = st->pk_p;
            root_ = st->root;
            cid_ = arbiter::derive_content_id(root_, contract_id_);
        } else if (const auto* j = std::get_if<msg::EvJoined>(&in.message.body)) {
            pk_d_ = j->pk_d;
        } else if (std::holds_alternative<msg::EvReady>(in.message.body)) {
            auto more = on_ready(round);
            out.insert(out.end(), more.begin(), more.end());
        } else if (const auto* ini = std::get_if<msg::EvInitiated>(&in.message.body)) {
            if (ini->pk_c != keys_.sig.pub) continue;
            session_live_ = true;
            sid_ = ini->session_id;
            if (behavior_.gift_receipt_index) {
                out.push_back(Outbound{
                    PartyId::deliverer,
                    msg::Message{sid_, make_receipt(*behavior_.gift_receipt_index, pk_d_)}});
                if (behavior_.gift_to_provider)
                    out.push_back(Outbound{
                        PartyId::provider,
                        msg::Message{sid_, make_receipt(*behavior_.gift_receipt_index, pk_p_)}});
            }
            if (behavior_.early_delivered) {
                msg::Body body = cfg_.mode == Mode::download ? msg::Body{msg::Delivered{}}
                                                             : msg::Body{msg::Received{}};
                out.push_back(Outbound{PartyId::contract, msg::Message{sid_, std::move(body)}});
                delivered_sent_ = true;
            }
        } else if (const auto* mt = std::get_if<msg::Mtree>(&in.message.body)) {
            if (in.from != PartyId::provider || !session_live_) continue;
            auto more = on_mtree(*mt, round);
            out.insert(out.end(), more.begin(), more.end());
        } else if (const auto* d = std::get_if<msg::Deliver>(&in.message.body)) {
            if (in.from != PartyId::deliverer || !session_live_) continue;
            auto more = cfg_.mode == Mode::download ? on_deliver_download(*d, round)
                                                    : on_deliver_stream(*d, round);
            out.insert(out.end(), more.begin(), more.end());
        } else if (const auto* kr = std::get_if<msg::KeyReveal>(&in.message.body)) {
            if (in.from != PartyId::provider || !session_live_ || cfg_.mode != Mode::stream)
                continue;
            auto more = on_key_reveal(*kr, round);
            out.insert(out.end(), more.begin(), more.end());
        } else if (const auto* rv = std::get_if<msg::EvRevealing>(&in.message.body)) {
            ctr_ = rv->ctr;
        } else if (const auto* rd = std::get_if<msg::EvRevealed>(&in.message.body)) {
            if (!session_live_ || cfg_.mode != Mode::download) continue;
            auto more = on_revealed(*rd, round);
            out.insert(out.end(), more.begin(), more.end());
        } else if (std::holds_alternative<msg::EvReceived>(in.message.body)) {
            stream_stopped_ = true;
        } else if (std::holds_alternative<msg::EvSold>(in.message.body) ||
                   std::holds_alternative<msg::EvNotSold>(in.message.body)) {
            if (!session_live_) continue;
            session_live_ = false;
            sessions_done_ += 1;
            if (sessions_done_ == cfg_.sessions) {
                halted_ = true;
                halt_round_ = round;
                return out;
            }
        }
    }
    if (receiver_) receiver_->on_tick(round);
    if (key_response_deadline_ && round >= *key_response_deadline_) {
        key_response_deadline_.reset();
        stream_stopped_ = true;
    }
    return out;
}

}  // namespace fdl::proto
