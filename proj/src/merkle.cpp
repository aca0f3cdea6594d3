#include "merkle.hpp"

#include <stdexcept>

#include "crypto.hpp"

namespace fdl::merkle {

bool is_power_of_two(uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

static Digest parent(const Digest& left, const Digest& right) {
    ByteWriter w;
    w.raw(left.v);
    w.raw(right.v);
    Bytes b = w.take();
    return crypto::hash(b);
}

MerkleTree build_from_leaves(std::vector<Digest> leaves) {
    if (!is_power_of_two(leaves.size()))
        throw std::invalid_argument("leaf count must be a power of two >= 1");
    MerkleTree mt;
    mt.levels.push_back(std::move(leaves));
    while (mt.levels.back().size() > 1) {
        const auto& prev = mt.levels.back();
        std::vector<Digest> next(prev.size() / 2);
        for (size_t i = 0; i < next.size(); ++i) next[i] = parent(prev[2 * i], prev[2 * i + 1]);
        mt.levels.push_back(std::move(next));
    }
    return mt;
}

MerkleTree build_mt(const std::vector<Bytes>& chunks) {
    if (!is_power_of_two(chunks.size()))
        throw std::invalid_argument("chunk count must be a power of two >= 1");
    std::vector<Digest> leaves(chunks.size());
    for (size_t i = 0; i < chunks.size(); ++i) leaves[i] = crypto::hash(chunks[i]);
    return build_from_leaves(std::move(leaves));
}

MerkleProof gen_mtp(const MerkleTree& mt, uint64_t index) {
    if (index < 1 || index > mt.leaf_count()) throw std::out_of_range("leaf index out of range");
    MerkleProof proof;
    proof.index = index;
    size_t pos = index - 1;
    for (size_t level = 0; level + 1 < mt.levels.size(); ++level) {
        size_t sibling = pos ^ 1;
        proof.path.push_back(ProofNode{sibling < pos, mt.levels[level][sibling]});
        pos >>= 1;
    }
    return proof;
}

bool verify_mtp(const Digest& root, uint64_t index, const MerkleProof& proof, const Digest& leaf) {
    if (proof.index != index || index < 1) return false;
    if (proof.path.size() >= 64) return false;
    uint64_t n = 1ull << proof.path.size();
    if (index > n) return false;
    // The side bits encode the leaf position; they must agree with index.
    uint64_t implied = 0;
    for (size_t level = 0; level < proof.path.size(); ++level)
        if (proof.path[level].sibling_on_left) implied |= 1ull << level;
    if (implied != index - 1) return false;
    Digest cur = leaf;
    for (const auto& node : proof.path)
        cur = node.sibling_on_left ? parent(node.digest, cur) : parent(cur, node.digest);
    return cur == root;
}

void write_proof(ByteWriter& w, const MerkleProof& proof) {
    w.u64(proof.index);
    w.u8(static_cast<uint8_t>(proof.path.size()));
    for (const auto& node : proof.path) {
        w.u8(node.sibling_on_left ? 1 : 0);
        w.raw(node.digest.v);
    }
}

std::optional<MerkleProof> read_proof(ByteReader& r) {
    MerkleProof proof;
    auto index = r.u64();
    auto len = r.u8();
    if (!index || !len) return std::nullopt;
    proof.index = *index;
    for (unsigned i = 0; i < *len; ++i) {
        auto side = r.u8();
        auto digest = r.arr<32>();
        if (!side || !digest || *side > 1) return std::nullopt;
        proof.path.push_back(ProofNode{*side == 1, Digest{*digest}});
    }
    return proof;
}

Bytes encode_proof(const MerkleProof& proof) {
    ByteWriter w;
    write_proof(w, proof);
    return w.take();
}

std::optional<MerkleProof> decode_proof(ByteView data) {
    ByteReader r(data);
    auto proof = read_proof(r);
    if (!proof || !r.done()) return std::nullopt;
    return proof;
}

}  // namespace fdl::merkle
