#ifndef FDL_KEYTREE_HPP
#define FDL_KEYTREE_HPP

#include <optional>
#include <vector>

#include "bytes.hpp"
#include "crypto.hpp"

namespace fdl::keytree {

// Heap-indexed (2n-1)-node key derivation tree: node 0 is the root,
// children of i sit at 2i+1 / 2i+2, chunk i (1-based) is keyed by the leaf
// at index n-2+i. Left children derive as hash(parent || 0x00), right as
// hash(parent || 0x01).
struct KeyTree {
    uint64_t leaf_count = 0;
    std::vector<SymKey> nodes;

    const SymKey& chunk_key(uint64_t chunk_index) const {
        return nodes[leaf_count - 2 + chunk_index];
    }
};

struct RevealElem {
    uint64_t position = 0;  // index into the key tree
    SymKey value;
    auto operator<=>(const RevealElem&) const = default;
};
using RevealSet = std::vector<RevealElem>;

// Full tree from a master key (root node = hash(mk)).
// Throws std::invalid_argument unless n is a power of two >= 1.
KeyTree gen_sub_keys(uint64_t n, const SymKey& mk);

// Subtree regeneration used during recovery: the given value becomes the
// root node as-is (recovered covers carry raw node values, not preimages).
KeyTree gen_sub_keys_from_node(uint64_t n, const SymKey& node_value);

// Minimal cover revealing exactly the keys of chunks 1..ctr.
// Throws std::invalid_argument when ctr is outside [1, n].
RevealSet reveal_keys(uint64_t n, uint64_t ctr, const SymKey& mk);

// Position-only check that the cover recovers exactly ctr keys; malformed
// inputs (positions outside the tree) yield false.
bool validate_rkeys(uint64_t n, uint64_t ctr, const std::vector<uint64_t>& positions);

// Expands every cover element into its subtree leaves, concatenated in
// cover order. Returns nullopt when a position is malformed. Callers check
// the result holds exactly ctr keys.
std::optional<std::vector<SymKey>> recover_keys(uint64_t n, const RevealSet& rk);

// Derives the key of chunk `chunk_index` from cover element j alone;
// nullopt when the chunk's leaf is not in that element's subtree.
std::optional<SymKey> recover_chunk_key(uint64_t chunk_index, size_t j, uint64_t n,
                                        const RevealSet& rk);

// Leaf index span [lo, hi] of the subtree rooted at `position`, or nullopt
// for positions outside a (2n-1)-node tree.
std::optional<std::pair<uint64_t, uint64_t>> subtree_leaf_span(uint64_t n, uint64_t position);

// Cover wire layout: count (1) || (position 8 BE, 32-byte value)*.
Bytes encode_reveal_set(const RevealSet& rk);
std::optional<RevealSet> decode_reveal_set(ByteView data);

uint64_t log2_exact(uint64_t n);

}  // namespace fdl::keytree

#endif
