#ifndef FDL_MERKLE_HPP
#define FDL_MERKLE_HPP

#include <vector>

#include "bytes.hpp"

namespace fdl::merkle {

// Binary commitment tree over content chunks. Leaves are hash(chunk),
// internal nodes hash(left || right), leaf count a power of two.
// Chunk indices are 1-based at the interface.
struct MerkleTree {
    std::vector<std::vector<Digest>> levels;  // levels[0] = leaves, back() = {root}

    size_t leaf_count() const { return levels.empty() ? 0 : levels[0].size(); }
    const Digest& root() const { return levels.back()[0]; }
    const Digest& leaf(uint64_t index) const { return levels[0][index - 1]; }
};

struct ProofNode {
    bool sibling_on_left = false;
    Digest digest;
    auto operator<=>(const ProofNode&) const = default;
};

struct MerkleProof {
    uint64_t index = 0;  // 1-based leaf position
    std::vector<ProofNode> path;
    auto operator<=>(const MerkleProof&) const = default;
};

// Throws std::invalid_argument unless the count is a power of two >= 1.
MerkleTree build_mt(const std::vector<Bytes>& chunks);
MerkleTree build_from_leaves(std::vector<Digest> leaves);

// Throws std::out_of_range when the index is not in [1, n].
MerkleProof gen_mtp(const MerkleTree& mt, uint64_t index);

// Accepts iff folding `leaf` up the sibling path reproduces `root` and the
// path's implied position matches `index`. Malformed proofs reject.
bool verify_mtp(const Digest& root, uint64_t index, const MerkleProof& proof, const Digest& leaf);

// Proof wire layout: index (8 BE) || path length (1) || (side byte, digest)*.
Bytes encode_proof(const MerkleProof& proof);
std::optional<MerkleProof> decode_proof(ByteView data);
void write_proof(ByteWriter& w, const MerkleProof& proof);
std::optional<MerkleProof> read_proof(ByteReader& r);

bool is_power_of_two(uint64_t n);

}  // namespace fdl::merkle

#endif
