#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "crypto.hpp"

using namespace fdl;
using namespace fdl::crypto;

static Bytes sv(const char* s) {
    return Bytes(reinterpret_cast<const uint8_t*>(s), reinterpret_cast<const uint8_t*>(s) + strlen(s));
}

TEST_CASE("hash: standard vectors and determinism") {
    // Published SHA-256 vectors.
    CHECK(hex(hash(Bytes{})) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(hex(hash(sv("abc"))) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");

    Rng rng(1);
    for (int i = 0; i < 16; ++i) {
        Bytes x = rng.next_bytes(32);
        CHECK(hash(x) == hash(x));
        Bytes y = x;
        y.push_back(0x00);
        CHECK(hash(x) != hash(y));
    }
}

TEST_CASE("rng: deterministic, fork-independent") {
    Rng a(42), b(42), c(43);
    CHECK(a.next_u64() == b.next_u64());
    CHECK(a.next_digest() == b.next_digest());
    CHECK(a.next_u64() != c.next_u64());
    Rng f1 = a.fork("x"), f2 = a.fork("y");
    CHECK(f1.next_digest() != f2.next_digest());
}

TEST_CASE("signatures: round-trip and mutation rejection") {
    Rng rng(7);
    SigKeyPair kp = sig_keygen(rng);
    Bytes msg = rng.next_bytes(100);
    Signature sig = sign(kp, msg);
    CHECK(verify(kp.pub, msg, sig));

    Bytes bad = msg;
    bad[3] ^= 0x01;
    CHECK_FALSE(verify(kp.pub, bad, sig));

    Signature badsig = sig;
    badsig[10] ^= 0x80;
    CHECK_FALSE(verify(kp.pub, msg, badsig));

    SigKeyPair other = sig_keygen(rng);
    CHECK_FALSE(verify(other.pub, msg, sig));
}

TEST_CASE("symmetric cipher: block semantics") {
    Rng rng(9);
    SymKey k = rng.next_key();

    SUBCASE("single block equals XOR with hash(key || 1)") {
        Bytes m = rng.next_bytes(32);
        Bytes c = sym_encrypt(k, m);
        ByteWriter w;
        w.raw(k.v);
        w.u64(1);
        Bytes pre = w.take();
        Digest pad = hash(pre);
        for (int i = 0; i < 32; ++i) CHECK(c[i] == (m[i] ^ pad.v[i]));
    }

    SUBCASE("involution over random lengths up to the 2^16-block cap") {
        for (size_t t : {1, 2, 4, 7, 64, 1000, 65536}) {
            Bytes m = rng.next_bytes(32 * t);
            CHECK(sym_decrypt(k, sym_encrypt(k, m)) == m);
        }
    }

    SUBCASE("zero plaintext exposes the pad stream") {
        size_t t = 3;
        Bytes zeros(32 * t, 0);
        Bytes c = sym_encrypt(k, zeros);
        for (size_t j = 0; j < t; ++j) {
            ByteWriter w;
            w.raw(k.v);
            w.u64(j + 1);
            Bytes pre = w.take();
            Digest pad = hash(pre);
            for (int i = 0; i < 32; ++i) CHECK(c[j * 32 + i] == pad.v[i]);
        }
    }

    SUBCASE("malformed length rejected") {
        CHECK_THROWS_AS(sym_encrypt(k, Bytes(33, 0)), std::invalid_argument);
        CHECK_THROWS_AS(sym_encrypt(k, Bytes{}), std::invalid_argument);
    }
}

TEST_CASE("vpke: keygen basics") {
    Rng rng(11);
    auto kp1 = vpke_keygen(rng);
    auto kp2 = vpke_keygen(rng);
    CHECK(kp1.sec != kp2.sec);
    CHECK(kp1.pub != kp2.pub);
    CHECK(group_valid(kp1.pub));

    // k = 1 gives h = g.
    auto unit = vpke_keypair_from_scalar(scalar_from_u64(1));
    REQUIRE(unit);
    CHECK(unit->pub == group_generator());

    // k = 0 is out of range.
    CHECK_FALSE(vpke_keypair_from_scalar(scalar_from_u64(0)));
}

TEST_CASE("encode/decode group embedding") {
    Rng rng(13);
    SUBCASE("round-trip on 100 random values") {
        for (int i = 0; i < 100; ++i) {
            auto m = rng.next_key().v;
            auto e = encode_to_group(m);
            REQUIRE(e);
            CHECK(group_valid(*e));
            auto back = decode_from_group(*e);
            REQUIRE(back);
            CHECK(*back == m);
        }
    }
    SUBCASE("injective on distinct inputs") {
        auto m1 = rng.next_key().v;
        auto m2 = rng.next_key().v;
        REQUIRE(m1 != m2);
        CHECK(*encode_to_group(m1) != *encode_to_group(m2));
    }
    SUBCASE("group elements outside the embedding fail decode") {
        // A random exponent lands on an x-coordinate without the zero
        // prefix with overwhelming probability.
        auto kp = vpke_keygen(rng);
        CHECK_FALSE(decode_from_group(kp.pub));
    }
}

TEST_CASE("vpke: encrypt/decrypt") {
    Rng rng(17);
    auto kp = vpke_keygen(rng);

    SUBCASE("round-trip") {
        for (int i = 0; i < 10; ++i) {
            auto m = *encode_to_group(rng.next_key().v);
            auto ct = venc_rand(kp.pub, m, rng);
            auto back = vdec(kp.sec, ct);
            REQUIRE(back);
            CHECK(*back == m);
        }
    }
    SUBCASE("identity plaintext: c2 = h^r") {
        Scalar r = random_scalar(rng);
        auto ct = venc(kp.pub, group_identity(), r);
        REQUIRE(ct);
        auto hr = group_exp(kp.pub, r);
        REQUIRE(hr);
        CHECK(ct->c2 == *hr);
        CHECK(*vdec(kp.sec, *ct) == group_identity());
    }
    SUBCASE("r = 0 rejected") {
        auto m = *encode_to_group(rng.next_key().v);
        CHECK_FALSE(venc(kp.pub, m, scalar_from_u64(0)));
    }
}

TEST_CASE("vpke: prove/verify decryption") {
    Rng rng(19);
    auto kp = vpke_keygen(rng);

    SUBCASE("completeness over 100 instances") {
        for (int i = 0; i < 100; ++i) {
            auto m = *encode_to_group(rng.next_key().v);
            auto ct = venc_rand(kp.pub, m, rng);
            auto proved = prove_pke(kp.sec, ct, rng);
            REQUIRE(proved);
            CHECK(proved->first == m);
            CHECK(verify_pke(kp.pub, ct, proved->first, proved->second));
        }
    }

    SUBCASE("wrong plaintext rejected") {
        auto m = *encode_to_group(rng.next_key().v);
        auto ct = venc_rand(kp.pub, m, rng);
        auto proved = prove_pke(kp.sec, ct, rng);
        REQUIRE(proved);
        auto wrong = *group_op(m, group_generator());
        CHECK_FALSE(verify_pke(kp.pub, ct, wrong, proved->second));
    }

    SUBCASE("any mutated proof field rejected") {
        auto m = *encode_to_group(rng.next_key().v);
        auto ct = venc_rand(kp.pub, m, rng);
        auto proved = prove_pke(kp.sec, ct, rng);
        REQUIRE(proved);
        auto g = group_generator();

        VpkeProof p = proved->second;
        p.big_a = *group_op(p.big_a, g);
        CHECK_FALSE(verify_pke(kp.pub, ct, m, p));

        p = proved->second;
        p.big_b = *group_op(p.big_b, g);
        CHECK_FALSE(verify_pke(kp.pub, ct, m, p));

        p = proved->second;
        p.z[47] ^= 0x01;
        CHECK_FALSE(verify_pke(kp.pub, ct, m, p));
    }

    SUBCASE("proof does not transfer to another ciphertext") {
        auto m = *encode_to_group(rng.next_key().v);
        auto ct1 = venc_rand(kp.pub, m, rng);
        auto ct2 = venc_rand(kp.pub, m, rng);
        REQUIRE(ct1 != ct2);
        auto p1 = prove_pke(kp.sec, ct1, rng);
        auto p2 = prove_pke(kp.sec, ct2, rng);
        REQUIRE(p1);
        REQUIRE(p2);
        // Cross-applying either proof to the other ciphertext fails.
        CHECK_FALSE(verify_pke(kp.pub, ct2, m, p1->second));
        CHECK_FALSE(verify_pke(kp.pub, ct1, m, p2->second));
        CHECK(verify_pke(kp.pub, ct2, m, p2->second));
    }

    SUBCASE("proof bound to the keyholder") {
        auto m = *encode_to_group(rng.next_key().v);
        auto ct = venc_rand(kp.pub, m, rng);
        auto proved = prove_pke(kp.sec, ct, rng);
        REQUIRE(proved);
        auto other = vpke_keygen(rng);
        CHECK_FALSE(verify_pke(other.pub, ct, m, proved->second));
    }

    SUBCASE("malformed group element rejected") {
        auto m = *encode_to_group(rng.next_key().v);
        auto ct = venc_rand(kp.pub, m, rng);
        auto proved = prove_pke(kp.sec, ct, rng);
        REQUIRE(proved);
        VpkeCiphertext bad = ct;
        bad.c1.enc.assign(49, 0xff);
        CHECK_FALSE(verify_pke(kp.pub, bad, m, proved->second));
    }
}
