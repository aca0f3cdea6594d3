#ifndef FDL_CRYPTO_HPP
#define FDL_CRYPTO_HPP

#include <optional>
#include <string_view>
#include <utility>

#include "bytes.hpp"

// Primitive suite used throughout: SHA-256 for hashing, Ed25519 for
// signatures, and ElGamal over NIST P-384 with a Fiat-Shamir Schnorr proof
// for verifiable decryption. All identifiers are reported by build_info().

namespace fdl::crypto {

Digest hash(ByteView data);

// Deterministic hash-counter generator. Every random choice in a run is
// drawn from one of these, seeded from the scenario, so whole simulations
// replay bit-for-bit.
class Rng {
public:
    explicit Rng(uint64_t seed);
    explicit Rng(const Digest& state) : state_(state) {}

    void fill(uint8_t* out, size_t n);
    uint64_t next_u64();
    Digest next_digest();
    SymKey next_key();
    Bytes next_bytes(size_t n);

    // Independent child generator; children with distinct labels never
    // share output with each other or the parent.
    Rng fork(std::string_view label) const;

private:
    Digest state_{};
    uint64_t counter_ = 0;
};

// --- signatures (Ed25519) ---

struct SigKeyPair {
    PubKey pub{};
    std::array<uint8_t, 32> seed{};  // raw private seed
};

SigKeyPair sig_keygen(Rng& rng);
Signature sign(const SigKeyPair& kp, ByteView msg);
bool verify(const PubKey& pub, ByteView msg, const Signature& sig);

// --- hash-stream symmetric cipher ---
// Block j of the output is block j of the input XORed with hash(key || j),
// j counted from 1 as an 8-byte big-endian integer. Encryption and
// decryption are the same map.
// Throws std::invalid_argument when the input is empty or not a multiple
// of 32 bytes.
Bytes sym_encrypt(const SymKey& key, ByteView chunk);
Bytes sym_decrypt(const SymKey& key, ByteView chunk);

// --- verifiable public-key encryption (ElGamal + Schnorr/Fiat-Shamir) ---

constexpr size_t kGroupElementSize = 49;  // SEC1 compressed point
constexpr size_t kScalarSize = 48;

using Scalar = std::array<uint8_t, kScalarSize>;

struct GroupElement {
    Bytes enc;  // SEC1 encoding; 49 bytes for proper points
    auto operator<=>(const GroupElement&) const = default;
};

struct VpkeKeyPair {
    GroupElement pub;  // h = g^k
    Scalar sec{};      // k
};

struct VpkeCiphertext {
    GroupElement c1, c2;  // (g^r, m * h^r)
    auto operator<=>(const VpkeCiphertext&) const = default;
};

struct VpkeProof {
    GroupElement big_a, big_b;  // A = g^x, B = c1^x
    Scalar z{};                 // Z = x + k*C mod q
    auto operator<=>(const VpkeProof&) const = default;
};

GroupElement group_generator();
GroupElement group_identity();
bool group_valid(const GroupElement& e);
// Group operation and exponentiation, exposed for test oracles.
std::optional<GroupElement> group_op(const GroupElement& a, const GroupElement& b);
std::optional<GroupElement> group_exp(const GroupElement& base, const Scalar& s);

Scalar scalar_from_u64(uint64_t v);
// Uniform scalar in [1, q-1].
Scalar random_scalar(Rng& rng);

VpkeKeyPair vpke_keygen(Rng& rng);
std::optional<VpkeKeyPair> vpke_keypair_from_scalar(const Scalar& k);

// Deterministic, invertible embedding of 32-byte values into the group:
// the x-coordinate is laid out as 15 zero bytes || value || counter, the
// counter scanned 0..255 until the x-coordinate lands on the curve (even-y
// point taken). Fails only if all 256 candidates miss the curve.
std::optional<GroupElement> encode_to_group(const std::array<uint8_t, 32>& m);
std::optional<std::array<uint8_t, 32>> decode_from_group(const GroupElement& e);

// r must lie in [1, q-1]; returns nullopt otherwise or on malformed inputs.
std::optional<VpkeCiphertext> venc(const GroupElement& pub, const GroupElement& m,
                                   const Scalar& r);
VpkeCiphertext venc_rand(const GroupElement& pub, const GroupElement& m, Rng& rng);
std::optional<GroupElement> vdec(const Scalar& sec, const VpkeCiphertext& ct);

// Decrypts and proves the decryption correct. The commitment randomness x
// is drawn from rng.
std::optional<std::pair<GroupElement, VpkeProof>> prove_pke(const Scalar& sec,
                                                            const VpkeCiphertext& ct,
                                                            Rng& rng);
bool verify_pke(const GroupElement& pub, const VpkeCiphertext& ct,
                const GroupElement& m, const VpkeProof& proof);

}  // namespace fdl::crypto

#endif
