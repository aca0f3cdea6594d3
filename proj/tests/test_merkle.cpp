#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "crypto.hpp"
#include "merkle.hpp"

using namespace fdl;
using namespace fdl::merkle;

static std::vector<Bytes> random_chunks(crypto::Rng& rng, size_t n, size_t len = 64) {
    std::vector<Bytes> out;
    for (size_t i = 0; i < n; ++i) out.push_back(rng.next_bytes(len));
    return out;
}

TEST_CASE("build: small trees") {
    crypto::Rng rng(1);

    SUBCASE("single chunk root is its hash") {
        Bytes c = rng.next_bytes(48);
        MerkleTree mt = build_mt({c});
        CHECK(mt.root() == crypto::hash(c));
        MerkleProof p = gen_mtp(mt, 1);
        CHECK(p.path.empty());
        CHECK(verify_mtp(mt.root(), 1, p, crypto::hash(c)));
    }

    SUBCASE("two equal chunks") {
        Bytes c = rng.next_bytes(48);
        MerkleTree mt = build_mt({c, c});
        Digest h = crypto::hash(c);
        ByteWriter w;
        w.raw(h.v);
        w.raw(h.v);
        Bytes pre = w.take();
        CHECK(mt.root() == crypto::hash(pre));
    }

    SUBCASE("non-power-of-two count rejected") {
        auto chunks = random_chunks(rng, 3);
        CHECK_THROWS_AS(build_mt(chunks), std::invalid_argument);
        CHECK_THROWS_AS(build_mt({}), std::invalid_argument);
    }

    SUBCASE("index bounds enforced") {
        auto chunks = random_chunks(rng, 4);
        MerkleTree mt = build_mt(chunks);
        CHECK_THROWS_AS(gen_mtp(mt, 0), std::out_of_range);
        CHECK_THROWS_AS(gen_mtp(mt, 5), std::out_of_range);
        CHECK(verify_mtp(mt.root(), 4, gen_mtp(mt, 4), crypto::hash(chunks[3])));
    }
}

TEST_CASE("proofs verify at every index and reject mutations") {
    crypto::Rng rng(2);
    for (size_t n : {1, 2, 4, 8, 16, 32, 64, 128, 256}) {
        auto chunks = random_chunks(rng, n, 32);
        MerkleTree mt = build_mt(chunks);
        for (uint64_t i = 1; i <= n; ++i) {
            MerkleProof p = gen_mtp(mt, i);
            Digest leaf = crypto::hash(chunks[i - 1]);
            CHECK(verify_mtp(mt.root(), i, p, leaf));

            // Mutated leaf.
            Digest bad = leaf;
            bad.v[0] ^= 1;
            CHECK_FALSE(verify_mtp(mt.root(), i, p, bad));

            // Wrong position.
            uint64_t other = i == n ? i - 1 : i + 1;
            if (other >= 1) CHECK_FALSE(verify_mtp(mt.root(), other, p, leaf));

            // Mutated path digest.
            if (!p.path.empty()) {
                MerkleProof q = p;
                q.path[rng.next_u64() % q.path.size()].digest.v[5] ^= 0x10;
                CHECK_FALSE(verify_mtp(mt.root(), i, q, leaf));
            }
        }
    }
}

TEST_CASE("position binding across an n=8 tree") {
    crypto::Rng rng(3);
    auto chunks = random_chunks(rng, 8);
    MerkleTree mt = build_mt(chunks);
    for (uint64_t i = 1; i <= 8; ++i) {
        MerkleProof p = gen_mtp(mt, i);
        for (uint64_t claim = 1; claim <= 8; ++claim) {
            bool ok = verify_mtp(mt.root(), claim, p, crypto::hash(chunks[i - 1]));
            CHECK(ok == (claim == i));
        }
    }
}

TEST_CASE("second preimage search comes up empty") {
    crypto::Rng rng(4);
    auto chunks = random_chunks(rng, 8);
    MerkleTree mt = build_mt(chunks);
    uint64_t i = 3;
    MerkleProof p = gen_mtp(mt, i);
    for (int trial = 0; trial < 500; ++trial) {
        Bytes other = rng.next_bytes(64);
        if (other == chunks[i - 1]) continue;
        CHECK_FALSE(verify_mtp(mt.root(), i, p, crypto::hash(other)));
    }
}

TEST_CASE("proof serialization round-trip") {
    crypto::Rng rng(5);
    auto chunks = random_chunks(rng, 16);
    MerkleTree mt = build_mt(chunks);
    for (uint64_t i : {1, 7, 16}) {
        MerkleProof p = gen_mtp(mt, i);
        Bytes enc = encode_proof(p);
        CHECK(enc.size() == 8 + 1 + p.path.size() * 33);
        auto back = decode_proof(enc);
        REQUIRE(back);
        CHECK(*back == p);
    }
    // Truncated and trailing-garbage encodings fail.
    Bytes enc = encode_proof(gen_mtp(mt, 2));
    CHECK_FALSE(decode_proof(ByteView(enc.data(), enc.size() - 1)));
    enc.push_back(0);
    CHECK_FALSE(decode_proof(enc));
}
