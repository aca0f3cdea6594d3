#include "messages.hpp"

namespace fdl::msg {

const Kind kAllKinds[32] = {
    Kind::start,        Kind::join,          Kind::prepared,
    Kind::consume,      Kind::delivered,     Kind::vfd_proof,
    Kind::reveal_keys,  Kind::wrong_rk,      Kind::pom_download,
    Kind::pom_stream,   Kind::claim_delivery, Kind::claim_revealing,
    Kind::reset,        Kind::received,      Kind::ev_started,
    Kind::ev_joined,
    Kind::ev_ready,     Kind::ev_initiated,  Kind::ev_get_vfd_proof,
    Kind::ev_revealing, Kind::ev_revealed,   Kind::ev_received,
    Kind::ev_paying_delivery, Kind::ev_paying_revealing, Kind::ev_sold,
    Kind::ev_not_sold,  Kind::sell,          Kind::mtree,
    Kind::deliver,      Kind::receipt,       Kind::key_req,
    Kind::key_reveal,
};

const char* kind_name(Kind k) {
    switch (k) {
        case Kind::start: return "start";
        case Kind::join: return "join";
        case Kind::prepared: return "prepared";
        case Kind::consume: return "consume";
        case Kind::delivered: return "delivered";
        case Kind::vfd_proof: return "vfd_proof";
        case Kind::reveal_keys: return "reveal_keys";
        case Kind::wrong_rk: return "wrong_rk";
        case Kind::pom_download: return "pom_download";
        case Kind::pom_stream: return "pom_stream";
        case Kind::claim_delivery: return "claim_delivery";
        case Kind::claim_revealing: return "claim_revealing";
        case Kind::reset: return "reset";
        case Kind::received: return "received";
        case Kind::ev_started: return "ev_started";
        case Kind::ev_joined: return "ev_joined";
        case Kind::ev_ready: return "ev_ready";
        case Kind::ev_initiated: return "ev_initiated";
        case Kind::ev_get_vfd_proof: return "ev_get_vfd_proof";
        case Kind::ev_revealing: return "ev_revealing";
        case Kind::ev_revealed: return "ev_revealed";
        case Kind::ev_received: return "ev_received";
        case Kind::ev_paying_delivery: return "ev_paying_delivery";
        case Kind::ev_paying_revealing: return "ev_paying_revealing";
        case Kind::ev_sold: return "ev_sold";
        case Kind::ev_not_sold: return "ev_not_sold";
        case Kind::sell: return "sell";
        case Kind::mtree: return "mtree";
        case Kind::deliver: return "deliver";
        case Kind::receipt: return "receipt";
        case Kind::key_req: return "key_req";
        case Kind::key_reveal: return "key_reveal";
    }
    return "unknown";
}

Kind kind_of(const Body& body) {
    return std::visit([](const auto& b) { return std::decay_t<decltype(b)>::kKind; }, body);
}

// --- field helpers ---

namespace {

void write_group(ByteWriter& w, const crypto::GroupElement& e) {
    if (e.enc.size() == crypto::kGroupElementSize) {
        w.raw(e.enc);
    } else {
        // Non-wire-representable values (e.g. the identity) encode as an
        // all-zero placeholder that no validator accepts.
        Bytes zero(crypto::kGroupElementSize, 0);
        w.raw(zero);
    }
}

std::optional<crypto::GroupElement> read_group(ByteReader& r) {
    auto b = r.raw(crypto::kGroupElementSize);
    if (!b) return std::nullopt;
    return crypto::GroupElement{std::move(*b)};
}

void write_ct(ByteWriter& w, const crypto::VpkeCiphertext& ct) {
    write_group(w, ct.c1);
    write_group(w, ct.c2);
}

std::optional<crypto::VpkeCiphertext> read_ct(ByteReader& r) {
    auto c1 = read_group(r);
    auto c2 = read_group(r);
    if (!c1 || !c2) return std::nullopt;
    return crypto::VpkeCiphertext{std::move(*c1), std::move(*c2)};
}

void write_vpke_proof(ByteWriter& w, const crypto::VpkeProof& p) {
    write_group(w, p.big_a);
    write_group(w, p.big_b);
    w.raw(ByteView{p.z.data(), p.z.size()});
}

std::optional<crypto::VpkeProof> read_vpke_proof(ByteReader& r) {
    auto a = read_group(r);
    auto b = read_group(r);
    auto z = r.arr<crypto::kScalarSize>();
    if (!a || !b || !z) return std::nullopt;
    return crypto::VpkeProof{std::move(*a), std::move(*b), *z};
}

void write_signed_chunk(ByteWriter& w, const SignedChunk& c) {
    w.u64(c.index);
    w.blob(c.ciphertext);
    w.raw(c.sig);
}

std::optional<SignedChunk> read_signed_chunk(ByteReader& r) {
    SignedChunk c;
    auto index = r.u64();
    auto ct = r.blob();
    auto sig = r.arr<64>();
    if (!index || !ct || !sig) return std::nullopt;
    c.index = *index;
    c.ciphertext = std::move(*ct);
    c.sig = *sig;
    return c;
}

void write_erk(ByteWriter& w, const EncryptedRevealSet& erk) {
    w.u8(static_cast<uint8_t>(erk.elems.size()));
    for (const auto& e : erk.elems) {
        w.u64(e.position);
        write_ct(w, e.ct);
    }
}

std::optional<EncryptedRevealSet> read_erk(ByteReader& r) {
    auto count = r.u8();
    if (!count) return std::nullopt;
    EncryptedRevealSet erk;
    for (unsigned i = 0; i < *count; ++i) {
        auto pos = r.u64();
        auto ct = read_ct(r);
        if (!pos || !ct) return std::nullopt;
        erk.elems.push_back(EncryptedRevealElem{*pos, std::move(*ct)});
    }
    return erk;
}

void write_pom_download(ByteWriter& w, const PomDownload& p) {
    w.u64(p.chunk_index);
    w.u64(p.element_index);
    w.blob(p.ciphertext);
    w.raw(p.chunk_sig);
    w.raw(p.leaf.v);
    merkle::write_proof(w, p.mtp);
    w.u64(p.rk_elem.position);
    w.raw(p.rk_elem.value.v);
    write_erk(w, p.erk);
    write_vpke_proof(w, p.vd_proof);
}

std::optional<PomDownload> read_pom_download(ByteReader& r) {
    PomDownload p;
    auto i = r.u64();
    auto j = r.u64();
    auto ct = r.blob();
    auto sig = r.arr<64>();
    auto leaf = r.arr<32>();
    if (!i || !j || !ct || !sig || !leaf) return std::nullopt;
    auto mtp = merkle::read_proof(r);
    auto pos = r.u64();
    auto val = r.arr<32>();
    if (!mtp || !pos || !val) return std::nullopt;
    auto erk = read_erk(r);
    auto vd = read_vpke_proof(r);
    if (!erk || !vd) return std::nullopt;
    p.chunk_index = *i;
    p.element_index = *j;
    p.ciphertext = std::move(*ct);
    p.chunk_sig = *sig;
    p.leaf = Digest{*leaf};
    p.mtp = std::move(*mtp);
    p.rk_elem = keytree::RevealElem{*pos, SymKey{*val}};
    p.erk = std::move(*erk);
    p.vd_proof = std::move(*vd);
    return p;
}

void write_pom_stream(ByteWriter& w, const PomStream& p) {
    w.u64(p.chunk_index);
    w.blob(p.ciphertext);
    w.raw(p.chunk_sig);
    w.raw(p.key.v);
    w.raw(p.key_sig);
    w.raw(p.leaf.v);
    merkle::write_proof(w, p.mtp);
}

std::optional<PomStream> read_pom_stream(ByteReader& r) {
    PomStream p;
    auto i = r.u64();
    auto ct = r.blob();
    auto csig = r.arr<64>();
    auto key = r.arr<32>();
    auto ksig = r.arr<64>();
    auto leaf = r.arr<32>();
    if (!i || !ct || !csig || !key || !ksig || !leaf) return std::nullopt;
    auto mtp = merkle::read_proof(r);
    if (!mtp) return std::nullopt;
    p.chunk_index = *i;
    p.ciphertext = std::move(*ct);
    p.chunk_sig = *csig;
    p.key = SymKey{*key};
    p.key_sig = *ksig;
    p.leaf = Digest{*leaf};
    p.mtp = std::move(*mtp);
    return p;
}

void write_prices(ByteWriter& w, const Prices& p) {
    w.u64(p.delivery);
    w.u64(p.content);
    w.u64(p.penalty);
}

std::optional<Prices> read_prices(ByteReader& r) {
    auto d = r.u64();
    auto c = r.u64();
    auto f = r.u64();
    if (!d || !c || !f) return std::nullopt;
    return Prices{*d, *c, *f};
}

struct BodyEncoder {
    ByteWriter& w;

    void operator()(const Start& m) {
        w.raw(ByteView{m.pk_p.data(), m.pk_p.size()});
        w.raw(m.root.v);
        w.u64(m.theta);
        w.u64(m.n);
        write_prices(w, m.prices);
    }
    void operator()(const Join& m) { w.raw(ByteView{m.pk_d.data(), m.pk_d.size()}); }
    void operator()(const Prepared&) {}
    void operator()(const Consume& m) {
        w.raw(ByteView{m.pk_c.data(), m.pk_c.size()});
        w.u8(m.has_vpk ? 1 : 0);
        if (m.has_vpk) write_group(w, m.vpk);
    }
    void operator()(const Delivered&) {}
    void operator()(const VfdProofMsg& m) {
        w.u8(m.has_receipt ? 1 : 0);
        if (m.has_receipt) {
            w.u64(m.index);
            w.raw(m.sig);
        }
    }
    void operator()(const RevealKeys& m) { write_erk(w, m.erk); }
    void operator()(const WrongRk&) {}
    void operator()(const PomDownloadMsg& m) { write_pom_download(w, m.pom); }
    void operator()(const PomStreamMsg& m) { write_pom_stream(w, m.pom); }
    void operator()(const ClaimDelivery& m) {
        w.u64(m.index);
        w.raw(m.sig);
    }
    void operator()(const ClaimRevealing& m) {
        w.u64(m.index);
        w.raw(m.sig);
    }
    void operator()(const Reset&) {}
    void operator()(const Received&) {}
    void operator()(const EvStarted& m) {
        w.raw(ByteView{m.pk_p.data(), m.pk_p.size()});
        w.raw(m.root.v);
        w.u64(m.theta);
        w.u64(m.n);
        write_prices(w, m.prices);
    }
    void operator()(const EvJoined& m) { w.raw(ByteView{m.pk_d.data(), m.pk_d.size()}); }
    void operator()(const EvReady&) {}
    void operator()(const EvInitiated& m) {
        w.raw(ByteView{m.pk_c.data(), m.pk_c.size()});
        w.u8(m.has_vpk ? 1 : 0);
        if (m.has_vpk) write_group(w, m.vpk);
        w.raw(m.session_id.v);
        w.u64(m.nonce);
    }
    void operator()(const EvGetVfdProof&) {}
    void operator()(const EvRevealing& m) { w.u64(m.ctr); }
    void operator()(const EvRevealed& m) { write_erk(w, m.erk); }
    void operator()(const EvReceived&) {}
    void operator()(const EvPayingDelivery& m) { w.u64(m.index); }
    void operator()(const EvPayingRevealing& m) { w.u64(m.index); }
    void operator()(const EvSold&) {}
    void operator()(const EvNotSold&) {}
    void operator()(const Sell& m) {
        w.u64(m.chunks.size());
        for (const auto& c : m.chunks) write_signed_chunk(w, c);
    }
    void operator()(const Mtree& m) {
        w.u64(m.leaves.size());
        for (const auto& leaf : m.leaves) w.raw(leaf.v);
        w.raw(m.sig);
    }
    void operator()(const Deliver& m) { write_signed_chunk(w, m.chunk); }
    void operator()(const Receipt& m) {
        w.u64(m.index);
        w.raw(m.sig);
    }
    void operator()(const KeyReq& m) {
        w.u64(m.index);
        w.raw(m.sig);
    }
    void operator()(const KeyReveal& m) {
        w.u64(m.index);
        w.raw(m.key.v);
        w.raw(m.sig);
    }
};

template <typename T>
std::optional<Body> decode_indexed_sig(ByteReader& r) {
    T m;
    auto index = r.u64();
    auto sig = r.arr<64>();
    if (!index || !sig) return std::nullopt;
    m.index = *index;
    m.sig = *sig;
    return Body{std::move(m)};
}

std::optional<Body> decode_body(Kind kind, ByteReader& r) {
    switch (kind) {
        case Kind::start: {
            Start m;
            auto pk = r.arr<32>();
            auto root = r.arr<32>();
            auto theta = r.u64();
            auto n = r.u64();
            auto prices = read_prices(r);
            if (!pk || !root || !theta || !n || !prices) return std::nullopt;
            m.pk_p = *pk;
            m.root = Digest{*root};
            m.theta = *theta;
            m.n = *n;
            m.prices = *prices;
            return Body{std::move(m)};
        }
        case Kind::join: {
            Join m;
            auto pk = r.arr<32>();
            if (!pk) return std::nullopt;
            m.pk_d = *pk;
            return Body{std::move(m)};
        }
        case Kind::prepared: return Body{Prepared{}};
        case Kind::consume: {
            Consume m;
            auto pk = r.arr<32>();
            auto has = r.u8();
            if (!pk || !has || *has > 1) return std::nullopt;
            m.pk_c = *pk;
            m.has_vpk = *has == 1;
            if (m.has_vpk) {
                auto vpk = read_group(r);
                if (!vpk) return std::nullopt;
                m.vpk = std::move(*vpk);
            }
            return Body{std::move(m)};
        }
        case Kind::delivered: return Body{Delivered{}};
        case Kind::vfd_proof: {
            VfdProofMsg m;
            auto has = r.u8();
            if (!has || *has > 1) return std::nullopt;
            m.has_receipt = *has == 1;
            if (m.has_receipt) {
                auto index = r.u64();
                auto sig = r.arr<64>();
                if (!index || !sig) return std::nullopt;
                m.index = *index;
                m.sig = *sig;
            }
            return Body{std::move(m)};
        }
        case Kind::reveal_keys: {
            auto erk = read_erk(r);
            if (!erk) return std::nullopt;
            return Body{RevealKeys{std::move(*erk)}};
        }
        case Kind::wrong_rk: return Body{WrongRk{}};
        case Kind::pom_download: {
            auto pom = read_pom_download(r);
            if (!pom) return std::nullopt;
            return Body{PomDownloadMsg{std::move(*pom)}};
        }
        case Kind::pom_stream: {
            auto pom = read_pom_stream(r);
            if (!pom) return std::nullopt;
            return Body{PomStreamMsg{std::move(*pom)}};
        }
        case Kind::claim_delivery: return decode_indexed_sig<ClaimDelivery>(r);
        case Kind::claim_revealing: return decode_indexed_sig<ClaimRevealing>(r);
        case Kind::reset: return Body{Reset{}};
        case Kind::received: return Body{Received{}};
        case Kind::ev_started: {
            EvStarted m;
            auto pk = r.arr<32>();
            auto root = r.arr<32>();
            auto theta = r.u64();
            auto n = r.u64();
            auto prices = read_prices(r);
            if (!pk || !root || !theta || !n || !prices) return std::nullopt;
            m.pk_p = *pk;
            m.root = Digest{*root};
            m.theta = *theta;
            m.n = *n;
            m.prices = *prices;
            return Body{std::move(m)};
        }
        case Kind::ev_joined: {
            EvJoined m;
            auto pk = r.arr<32>();
            if (!pk) return std::nullopt;
            m.pk_d = *pk;
            return Body{std::move(m)};
        }
        case Kind::ev_ready: return Body{EvReady{}};
        case Kind::ev_initiated: {
            EvInitiated m;
            auto pk = r.arr<32>();
            auto has = r.u8();
            if (!pk || !has || *has > 1) return std::nullopt;
            m.pk_c = *pk;
            m.has_vpk = *has == 1;
            if (m.has_vpk) {
                auto vpk = read_group(r);
                if (!vpk) return std::nullopt;
                m.vpk = std::move(*vpk);
            }
            auto sid = r.arr<32>();
            auto nonce = r.u64();
            if (!sid || !nonce) return std::nullopt;
            m.session_id = Digest{*sid};
            m.nonce = *nonce;
            return Body{std::move(m)};
        }
        case Kind::ev_get_vfd_proof: return Body{EvGetVfdProof{}};
        case Kind::ev_revealing: {
            auto ctr = r.u64();
            if (!ctr) return std::nullopt;
            return Body{EvRevealing{*ctr}};
        }
        case Kind::ev_revealed: {
            auto erk = read_erk(r);
            if (!erk) return std::nullopt;
            return Body{EvRevealed{std::move(*erk)}};
        }
        case Kind::ev_received: return Body{EvReceived{}};
        case Kind::ev_paying_delivery: {
            auto index = r.u64();
            if (!index) return std::nullopt;
            return Body{EvPayingDelivery{*index}};
        }
        case Kind::ev_paying_revealing: {
            auto index = r.u64();
            if (!index) return std::nullopt;
            return Body{EvPayingRevealing{*index}};
        }
        case Kind::ev_sold: return Body{EvSold{}};
        case Kind::ev_not_sold: return Body{EvNotSold{}};
        case Kind::sell: {
            auto count = r.u64();
            if (!count || *count > (1ull << 20)) return std::nullopt;
            Sell m;
            for (uint64_t i = 0; i < *count; ++i) {
                auto chunk = read_signed_chunk(r);
                if (!chunk) return std::nullopt;
                m.chunks.push_back(std::move(*chunk));
            }
            return Body{std::move(m)};
        }
        case Kind::mtree: {
            auto count = r.u64();
            if (!count || *count > (1ull << 20)) return std::nullopt;
            Mtree m;
            for (uint64_t i = 0; i < *count; ++i) {
                auto leaf = r.arr<32>();
                if (!leaf) return std::nullopt;
                m.leaves.push_back(Digest{*leaf});
            }
            auto sig = r.arr<64>();
            if (!sig) return std::nullopt;
            m.sig = *sig;
            return Body{std::move(m)};
        }
        case Kind::deliver: {
            auto chunk = read_signed_chunk(r);
            if (!chunk) return std::nullopt;
            return Body{Deliver{std::move(*chunk)}};
        }
        case Kind::receipt: return decode_indexed_sig<Receipt>(r);
        case Kind::key_req: return decode_indexed_sig<KeyReq>(r);
        case Kind::key_reveal: {
            KeyReveal m;
            auto index = r.u64();
            auto key = r.arr<32>();
            auto sig = r.arr<64>();
            if (!index || !key || !sig) return std::nullopt;
            m.index = *index;
            m.key = SymKey{*key};
            m.sig = *sig;
            return Body{std::move(m)};
        }
    }
    return std::nullopt;
}

}  // namespace

Bytes EncryptedRevealSet::canonical_bytes() const {
    ByteWriter w;
    write_erk(w, *this);
    return w.take();
}

Digest EncryptedRevealSet::digest() const { return crypto::hash(canonical_bytes()); }

std::vector<uint64_t> EncryptedRevealSet::positions() const {
    std::vector<uint64_t> out;
    out.reserve(elems.size());
    for (const auto& e : elems) out.push_back(e.position);
    return out;
}

Bytes encode_message(const Message& m) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(kind_of(m.body)));
    w.raw(m.sid.v);
    std::visit(BodyEncoder{w}, m.body);
    return w.take();
}

std::optional<Message> decode_message(ByteView data) {
    ByteReader r(data);
    auto kind_byte = r.u8();
    auto sid = r.arr<32>();
    if (!kind_byte || !sid) return std::nullopt;
    bool known = false;
    for (Kind k : kAllKinds) known = known || static_cast<uint8_t>(k) == *kind_byte;
    if (!known) return std::nullopt;
    auto body = decode_body(static_cast<Kind>(*kind_byte), r);
    if (!body || !r.done()) return std::nullopt;
    return Message{Digest{*sid}, std::move(*body)};
}

Bytes chunk_sig_payload(const Digest& cid, uint64_t index, ByteView ciphertext) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(SigTag::chunk));
    w.raw(cid.v);
    w.u64(index);
    w.raw(ciphertext);
    return w.take();
}

Bytes mtree_sig_payload(const Digest& cid, const Digest& root) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(SigTag::mtree));
    w.raw(cid.v);
    w.raw(root.v);
    return w.take();
}

Bytes receipt_payload(const Digest& sid, uint64_t index, const PubKey& pk_signer,
                      const PubKey& pk_peer) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(SigTag::receipt));
    w.raw(sid.v);
    w.u64(index);
    w.raw(ByteView{pk_signer.data(), pk_signer.size()});
    w.raw(ByteView{pk_peer.data(), pk_peer.size()});
    return w.take();
}

Bytes key_req_payload(const Digest& sid, uint64_t index, const PubKey& pk_consumer) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(SigTag::key_req));
    w.raw(sid.v);
    w.u64(index);
    w.raw(ByteView{pk_consumer.data(), pk_consumer.size()});
    return w.take();
}

Bytes key_reveal_payload(const Digest& sid, uint64_t index, const SymKey& key) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(SigTag::key_reveal));
    w.raw(sid.v);
    w.u64(index);
    w.raw(key.v);
    return w.take();
}

}  // namespace fdl::msg
