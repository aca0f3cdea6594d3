#include "crypto.hpp"

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/err.h>
#include <openssl/evp.h>
#include <openssl/obj_mac.h>

#include <memory>
#include <mutex>
#include <stdexcept>

namespace fdl::crypto {

namespace {

struct BnDeleter {
    void operator()(BIGNUM* p) const { BN_free(p); }
};
struct PointDeleter {
    void operator()(EC_POINT* p) const { EC_POINT_free(p); }
};
struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};

using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;
using PointPtr = std::unique_ptr<EC_POINT, PointDeleter>;
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;

struct Curve {
    EC_GROUP* group = nullptr;
    BIGNUM* order = nullptr;
    EVP_MD* sha256 = nullptr;
};

const Curve& curve() {
    static Curve c = [] {
        Curve cv;
        cv.group = EC_GROUP_new_by_curve_name(NID_secp384r1);
        if (!cv.group) throw std::runtime_error("P-384 unavailable");
        BN_CTX* ctx = BN_CTX_new();
        cv.order = BN_new();
        EC_GROUP_get_order(cv.group, cv.order, ctx);
        BN_CTX_free(ctx);
        cv.sha256 = EVP_MD_fetch(nullptr, "SHA-256", nullptr);
        if (!cv.sha256) throw std::runtime_error("SHA-256 unavailable");
        return cv;
    }();
    return c;
}

BN_CTX* bn_ctx() {
    thread_local BN_CTX* ctx = BN_CTX_new();
    return ctx;
}

PointPtr parse_point(const GroupElement& e) {
    if (e.enc.empty()) return nullptr;
    PointPtr p(EC_POINT_new(curve().group));
    if (EC_POINT_oct2point(curve().group, p.get(), e.enc.data(), e.enc.size(), bn_ctx()) != 1) {
        ERR_clear_error();
        return nullptr;
    }
    return p;
}

GroupElement encode_point(const EC_POINT* p) {
    GroupElement e;
    size_t len = EC_POINT_point2oct(curve().group, p, POINT_CONVERSION_COMPRESSED, nullptr, 0,
                                    bn_ctx());
    e.enc.resize(len);
    EC_POINT_point2oct(curve().group, p, POINT_CONVERSION_COMPRESSED, e.enc.data(), len, bn_ctx());
    return e;
}

BnPtr scalar_to_bn(const Scalar& s) { return BnPtr(BN_bin2bn(s.data(), s.size(), nullptr)); }

Scalar bn_to_scalar(const BIGNUM* b) {
    Scalar s{};
    BN_bn2binpad(b, s.data(), static_cast<int>(s.size()));
    return s;
}

// Scalar valid as an exponent/secret: 1 <= s < q.
bool scalar_in_range(const BIGNUM* b) {
    return !BN_is_zero(b) && BN_cmp(b, curve().order) < 0 && !BN_is_negative(b);
}

std::optional<GroupElement> exp_point(const EC_POINT* base, const BIGNUM* s) {
    PointPtr r(EC_POINT_new(curve().group));
    int ok = base == nullptr
                 ? EC_POINT_mul(curve().group, r.get(), s, nullptr, nullptr, bn_ctx())
                 : EC_POINT_mul(curve().group, r.get(), nullptr, base, s, bn_ctx());
    if (ok != 1) {
        ERR_clear_error();
        return std::nullopt;
    }
    return encode_point(r.get());
}

// Fiat-Shamir challenge: hash(g || A || B || h || c1 || c2 || m), read as a
// 256-bit integer (always below the group order).
BnPtr fs_challenge(const GroupElement& big_a, const GroupElement& big_b, const GroupElement& pub,
                   const VpkeCiphertext& ct, const GroupElement& m) {
    ByteWriter w;
    w.raw(group_generator().enc);
    w.raw(big_a.enc);
    w.raw(big_b.enc);
    w.raw(pub.enc);
    w.raw(ct.c1.enc);
    w.raw(ct.c2.enc);
    w.raw(m.enc);
    Bytes preimage = w.take();
    Digest d = hash(preimage);
    return BnPtr(BN_bin2bn(d.v.data(), d.v.size(), nullptr));
}

}  // namespace

Digest hash(ByteView data) {
    thread_local MdCtxPtr ctx(EVP_MD_CTX_new());
    Digest d;
    unsigned int len = 0;
    EVP_DigestInit_ex2(ctx.get(), curve().sha256, nullptr);
    EVP_DigestUpdate(ctx.get(), data.data(), data.size());
    EVP_DigestFinal_ex(ctx.get(), d.v.data(), &len);
    return d;
}

Rng::Rng(uint64_t seed) {
    ByteWriter w;
    w.raw(ByteView{reinterpret_cast<const uint8_t*>("rng-seed"), 8});
    w.u64(seed);
    Bytes b = w.take();
    state_ = hash(b);
}

void Rng::fill(uint8_t* out, size_t n) {
    size_t off = 0;
    while (off < n) {
        ByteWriter w;
        w.raw(state_.v);
        w.u64(counter_++);
        Bytes b = w.take();
        Digest block = hash(b);
        size_t take = std::min<size_t>(32, n - off);
        std::memcpy(out + off, block.v.data(), take);
        off += take;
    }
}

uint64_t Rng::next_u64() {
    uint8_t buf[8];
    fill(buf, 8);
    return get_u64_be(buf);
}

Digest Rng::next_digest() {
    Digest d;
    fill(d.v.data(), d.v.size());
    return d;
}

SymKey Rng::next_key() {
    SymKey k;
    fill(k.v.data(), k.v.size());
    return k;
}

Bytes Rng::next_bytes(size_t n) {
    Bytes b(n);
    fill(b.data(), n);
    return b;
}

Rng Rng::fork(std::string_view label) const {
    ByteWriter w;
    w.raw(state_.v);
    w.raw(ByteView{reinterpret_cast<const uint8_t*>("fork"), 4});
    w.raw(ByteView{reinterpret_cast<const uint8_t*>(label.data()), label.size()});
    Bytes b = w.take();
    return Rng(hash(b));
}

SigKeyPair sig_keygen(Rng& rng) {
    SigKeyPair kp;
    rng.fill(kp.seed.data(), kp.seed.size());
    PkeyPtr sk(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, kp.seed.data(),
                                            kp.seed.size()));
    size_t len = kp.pub.size();
    EVP_PKEY_get_raw_public_key(sk.get(), kp.pub.data(), &len);
    return kp;
}

Signature sign(const SigKeyPair& kp, ByteView msg) {
    PkeyPtr sk(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, kp.seed.data(),
                                            kp.seed.size()));
    MdCtxPtr ctx(EVP_MD_CTX_new());
    EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, sk.get());
    Signature sig{};
    size_t len = sig.size();
    EVP_DigestSign(ctx.get(), sig.data(), &len, msg.data(), msg.size());
    return sig;
}

bool verify(const PubKey& pub, ByteView msg, const Signature& sig) {
    PkeyPtr pk(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size()));
    if (!pk) {
        ERR_clear_error();
        return false;
    }
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pk.get()) != 1) {
        ERR_clear_error();
        return false;
    }
    int r = EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size());
    if (r != 1) ERR_clear_error();
    return r == 1;
}

Bytes sym_encrypt(const SymKey& key, ByteView chunk) {
    if (chunk.empty() || chunk.size() % 32 != 0)
        throw std::invalid_argument("chunk length must be a positive multiple of 32");
    Bytes out(chunk.size());
    size_t blocks = chunk.size() / 32;
    for (size_t j = 0; j < blocks; ++j) {
        ByteWriter w;
        w.raw(key.v);
        w.u64(j + 1);
        Bytes b = w.take();
        Digest pad = hash(b);
        for (size_t k = 0; k < 32; ++k) out[j * 32 + k] = chunk[j * 32 + k] ^ pad.v[k];
    }
    return out;
}

Bytes sym_decrypt(const SymKey& key, ByteView chunk) { return sym_encrypt(key, chunk); }

GroupElement group_generator() {
    static GroupElement g = encode_point(EC_GROUP_get0_generator(curve().group));
    return g;
}

GroupElement group_identity() {
    static GroupElement e = [] {
        PointPtr p(EC_POINT_new(curve().group));
        EC_POINT_set_to_infinity(curve().group, p.get());
        return encode_point(p.get());
    }();
    return e;
}

bool group_valid(const GroupElement& e) { return parse_point(e) != nullptr; }

std::optional<GroupElement> group_op(const GroupElement& a, const GroupElement& b) {
    PointPtr pa = parse_point(a), pb = parse_point(b);
    if (!pa || !pb) return std::nullopt;
    PointPtr r(EC_POINT_new(curve().group));
    EC_POINT_add(curve().group, r.get(), pa.get(), pb.get(), bn_ctx());
    return encode_point(r.get());
}

std::optional<GroupElement> group_exp(const GroupElement& base, const Scalar& s) {
    PointPtr p = parse_point(base);
    if (!p) return std::nullopt;
    BnPtr b = scalar_to_bn(s);
    return exp_point(p.get(), b.get());
}

Scalar scalar_from_u64(uint64_t v) {
    Scalar s{};
    for (int i = 0; i < 8; ++i) s[kScalarSize - 1 - i] = static_cast<uint8_t>(v >> (8 * i));
    return s;
}

Scalar random_scalar(Rng& rng) {
    // Rejection sampling over 48-byte strings keeps the draw uniform.
    for (;;) {
        Scalar s{};
        rng.fill(s.data(), s.size());
        BnPtr b = scalar_to_bn(s);
        if (scalar_in_range(b.get())) return s;
    }
}

VpkeKeyPair vpke_keygen(Rng& rng) {
    Scalar k = random_scalar(rng);
    auto kp = vpke_keypair_from_scalar(k);
    return *kp;
}

std::optional<VpkeKeyPair> vpke_keypair_from_scalar(const Scalar& k) {
    BnPtr b = scalar_to_bn(k);
    if (!scalar_in_range(b.get())) return std::nullopt;
    auto pub = exp_point(nullptr, b.get());
    if (!pub) return std::nullopt;
    return VpkeKeyPair{*pub, k};
}

std::optional<GroupElement> encode_to_group(const std::array<uint8_t, 32>& m) {
    uint8_t xbytes[48] = {0};
    std::memcpy(xbytes + 15, m.data(), 32);
    PointPtr p(EC_POINT_new(curve().group));
    for (int c = 0; c < 256; ++c) {
        xbytes[47] = static_cast<uint8_t>(c);
        BnPtr x(BN_bin2bn(xbytes, 48, nullptr));
        if (EC_POINT_set_compressed_coordinates(curve().group, p.get(), x.get(), 0, bn_ctx()) ==
            1) {
            return encode_point(p.get());
        }
        ERR_clear_error();
    }
    return std::nullopt;
}

std::optional<std::array<uint8_t, 32>> decode_from_group(const GroupElement& e) {
    PointPtr p = parse_point(e);
    if (!p || EC_POINT_is_at_infinity(curve().group, p.get())) return std::nullopt;
    BnPtr x(BN_new()), y(BN_new());
    EC_POINT_get_affine_coordinates(curve().group, p.get(), x.get(), y.get(), bn_ctx());
    uint8_t xbytes[48];
    BN_bn2binpad(x.get(), xbytes, 48);
    for (int i = 0; i < 15; ++i)
        if (xbytes[i] != 0) return std::nullopt;
    std::array<uint8_t, 32> m;
    std::memcpy(m.data(), xbytes + 15, 32);
    return m;
}

std::optional<VpkeCiphertext> venc(const GroupElement& pub, const GroupElement& m,
                                   const Scalar& r) {
    BnPtr rb = scalar_to_bn(r);
    if (!scalar_in_range(rb.get())) return std::nullopt;
    PointPtr h = parse_point(pub);
    PointPtr mp = parse_point(m);
    if (!h || !mp) return std::nullopt;
    auto c1 = exp_point(nullptr, rb.get());
    PointPtr hr(EC_POINT_new(curve().group));
    EC_POINT_mul(curve().group, hr.get(), nullptr, h.get(), rb.get(), bn_ctx());
    PointPtr c2(EC_POINT_new(curve().group));
    EC_POINT_add(curve().group, c2.get(), mp.get(), hr.get(), bn_ctx());
    return VpkeCiphertext{*c1, encode_point(c2.get())};
}

VpkeCiphertext venc_rand(const GroupElement& pub, const GroupElement& m, Rng& rng) {
    Scalar r = random_scalar(rng);
    auto ct = venc(pub, m, r);
    return *ct;
}

std::optional<GroupElement> vdec(const Scalar& sec, const VpkeCiphertext& ct) {
    PointPtr c1 = parse_point(ct.c1), c2 = parse_point(ct.c2);
    if (!c1 || !c2) return std::nullopt;
    BnPtr k = scalar_to_bn(sec);
    // c2 / c1^k == c2 + (-k)*c1
    BnPtr nk(BN_new());
    BN_sub(nk.get(), curve().order, k.get());
    BN_mod(nk.get(), nk.get(), curve().order, bn_ctx());
    PointPtr c1k(EC_POINT_new(curve().group));
    EC_POINT_mul(curve().group, c1k.get(), nullptr, c1.get(), nk.get(), bn_ctx());
    PointPtr m(EC_POINT_new(curve().group));
    EC_POINT_add(curve().group, m.get(), c2.get(), c1k.get(), bn_ctx());
    return encode_point(m.get());
}

std::optional<std::pair<GroupElement, VpkeProof>> prove_pke(const Scalar& sec,
                                                            const VpkeCiphertext& ct, Rng& rng) {
    auto m = vdec(sec, ct);
    if (!m) return std::nullopt;
    PointPtr c1 = parse_point(ct.c1);
    Scalar x = random_scalar(rng);
    BnPtr xb = scalar_to_bn(x);
    auto big_a = exp_point(nullptr, xb.get());
    auto big_b = exp_point(c1.get(), xb.get());
    if (!big_a || !big_b) return std::nullopt;
    BnPtr kb = scalar_to_bn(sec);
    auto pub = exp_point(nullptr, kb.get());
    BnPtr c = fs_challenge(*big_a, *big_b, *pub, ct, *m);
    BnPtr z(BN_new());
    BN_mod_mul(z.get(), kb.get(), c.get(), curve().order, bn_ctx());
    BN_mod_add(z.get(), z.get(), xb.get(), curve().order, bn_ctx());
    return std::make_pair(*m, VpkeProof{*big_a, *big_b, bn_to_scalar(z.get())});
}

bool verify_pke(const GroupElement& pub, const VpkeCiphertext& ct, const GroupElement& m,
                const VpkeProof& proof) {
    PointPtr h = parse_point(pub);
    PointPtr c1 = parse_point(ct.c1), c2 = parse_point(ct.c2);
    PointPtr mp = parse_point(m);
    PointPtr pa = parse_point(proof.big_a), pb = parse_point(proof.big_b);
    if (!h || !c1 || !c2 || !mp || !pa || !pb) return false;
    BnPtr z = scalar_to_bn(proof.z);
    if (BN_is_negative(z.get()) || BN_cmp(z.get(), curve().order) >= 0) return false;
    BnPtr c = fs_challenge(proof.big_a, proof.big_b, pub, ct, m);

    // g^Z == A * h^C
    auto gz = exp_point(nullptr, z.get());
    PointPtr hc(EC_POINT_new(curve().group));
    EC_POINT_mul(curve().group, hc.get(), nullptr, h.get(), c.get(), bn_ctx());
    PointPtr rhs1(EC_POINT_new(curve().group));
    EC_POINT_add(curve().group, rhs1.get(), pa.get(), hc.get(), bn_ctx());
    if (!gz || *gz != encode_point(rhs1.get())) return false;

    // m^C * c1^Z == B * c2^C
    PointPtr mc(EC_POINT_new(curve().group));
    EC_POINT_mul(curve().group, mc.get(), nullptr, mp.get(), c.get(), bn_ctx());
    PointPtr c1z(EC_POINT_new(curve().group));
    EC_POINT_mul(curve().group, c1z.get(), nullptr, c1.get(), z.get(), bn_ctx());
    PointPtr lhs(EC_POINT_new(curve().group));
    EC_POINT_add(curve().group, lhs.get(), mc.get(), c1z.get(), bn_ctx());
    PointPtr c2c(EC_POINT_new(curve().group));
    EC_POINT_mul(curve().group, c2c.get(), nullptr, c2.get(), c.get(), bn_ctx());
    PointPtr rhs2(EC_POINT_new(curve().group));
    EC_POINT_add(curve().group, rhs2.get(), pb.get(), c2c.get(), bn_ctx());
    return encode_point(lhs.get()) == encode_point(rhs2.get());
}

}  // namespace fdl::crypto
