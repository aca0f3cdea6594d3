#include "keytree.hpp"

#include <stdexcept>

#include "merkle.hpp"

namespace fdl::keytree {

uint64_t log2_exact(uint64_t n) {
    uint64_t k = 0;
    while ((1ull << k) < n) ++k;
    return k;
}

static uint64_t floor_log2(uint64_t v) {
    uint64_t k = 0;
    while (v >> (k + 1)) ++k;
    return k;
}

static SymKey derive_child(const SymKey& parent, uint8_t side) {
    ByteWriter w;
    w.raw(parent.v);
    w.u8(side);
    Bytes b = w.take();
    return to_key(crypto::hash(b));
}

static KeyTree expand(uint64_t n, SymKey root) {
    KeyTree kt;
    kt.leaf_count = n;
    kt.nodes.resize(2 * n - 1);
    kt.nodes[0] = root;
    for (uint64_t i = 0; i + 1 < n; ++i) {
        kt.nodes[2 * i + 1] = derive_child(kt.nodes[i], 0);
        kt.nodes[2 * i + 2] = derive_child(kt.nodes[i], 1);
    }
    return kt;
}

KeyTree gen_sub_keys(uint64_t n, const SymKey& mk) {
    if (!merkle::is_power_of_two(n)) throw std::invalid_argument("n must be a power of two");
    return expand(n, to_key(crypto::hash(mk.v)));
}

KeyTree gen_sub_keys_from_node(uint64_t n, const SymKey& node_value) {
    if (!merkle::is_power_of_two(n)) throw std::invalid_argument("n must be a power of two");
    return expand(n, node_value);
}

RevealSet reveal_keys(uint64_t n, uint64_t ctr, const SymKey& mk) {
    if (ctr < 1 || ctr > n) throw std::invalid_argument("ctr must be in [1, n]");
    KeyTree kt = gen_sub_keys(n, mk);
    if (ctr == 1) return {RevealElem{n - 1, kt.nodes[n - 1]}};

    std::vector<uint64_t> ind(ctr);
    for (uint64_t i = 0; i < ctr; ++i) ind[i] = n - 1 + i;

    for (;;) {
        std::vector<uint64_t> t;
        t.reserve(ind.size());
        for (size_t j = 0; 2 * j + 1 < ind.size(); ++j) {
            uint64_t a = ind[2 * j], b = ind[2 * j + 1];
            // Merge only genuine sibling pairs: a a left child (odd index)
            // and b its right sibling, so both parent divisions are exact.
            if (a % 2 == 1 && b == a + 1) {
                t.push_back((a - 1) / 2);
            } else {
                t.push_back(a);
                t.push_back(b);
            }
        }
        if (ind.size() % 2 == 1) t.push_back(ind.back());
        if (t.size() == ind.size()) break;
        ind = std::move(t);
    }

    RevealSet rk;
    rk.reserve(ind.size());
    for (uint64_t x : ind) rk.push_back(RevealElem{x, kt.nodes[x]});
    return rk;
}

std::optional<std::pair<uint64_t, uint64_t>> subtree_leaf_span(uint64_t n, uint64_t position) {
    if (!merkle::is_power_of_two(n) || position > 2 * n - 2) return std::nullopt;
    uint64_t depth = log2_exact(n) - floor_log2(position + 1);
    uint64_t lo = position, hi = position;
    for (uint64_t d = 0; d < depth; ++d) {
        lo = 2 * lo + 1;
        hi = 2 * hi + 2;
    }
    return std::make_pair(lo, hi);
}

bool validate_rkeys(uint64_t n, uint64_t ctr, const std::vector<uint64_t>& positions) {
    if (!merkle::is_power_of_two(n) || ctr > n) return false;
    if (n == ctr && positions.size() == 1 && positions[0] == 0) return true;
    // Tracks which of the leaves n-1 .. n+ctr-2 are covered.
    std::vector<bool> covered(ctr, false);
    for (uint64_t p : positions) {
        auto span = subtree_leaf_span(n, p);
        if (!span) return false;
        uint64_t lo = std::max(span->first, n - 1);
        uint64_t hi = std::min(span->second, n + ctr - 2);
        for (uint64_t leaf = lo; leaf <= hi && ctr > 0; ++leaf) covered[leaf - (n - 1)] = true;
    }
    for (bool c : covered)
        if (!c) return false;
    return true;
}

std::optional<std::vector<SymKey>> recover_keys(uint64_t n, const RevealSet& rk) {
    if (!merkle::is_power_of_two(n)) return std::nullopt;
    std::vector<SymKey> ks;
    for (const auto& elem : rk) {
        if (elem.position > 2 * n - 2) return std::nullopt;
        uint64_t depth = log2_exact(n) - floor_log2(elem.position + 1);
        uint64_t sub_n = 1ull << depth;
        KeyTree sub = gen_sub_keys_from_node(sub_n, elem.value);
        for (uint64_t i = sub_n - 1; i <= 2 * sub_n - 2; ++i) ks.push_back(sub.nodes[i]);
    }
    return ks;
}

std::optional<SymKey> recover_chunk_key(uint64_t chunk_index, size_t j, uint64_t n,
                                        const RevealSet& rk) {
    if (j >= rk.size() || chunk_index < 1 || chunk_index > n) return std::nullopt;
    uint64_t x = rk[j].position;
    SymKey y = rk[j].value;
    uint64_t ind = n + chunk_index - 2;
    if (ind < x) return std::nullopt;
    if (ind == x) return y;
    std::vector<uint8_t> path;  // child-side bits from the leaf upward
    while (ind > x) {
        path.push_back(ind % 2 == 1 ? 0 : 1);
        ind = (ind - 1) / 2;
    }
    // The walk must land exactly on the revealed position; overshooting
    // means the leaf lies outside this subtree.
    if (ind != x) return std::nullopt;
    for (auto it = path.rbegin(); it != path.rend(); ++it) y = derive_child(y, *it);
    return y;
}

Bytes encode_reveal_set(const RevealSet& rk) {
    ByteWriter w;
    w.u8(static_cast<uint8_t>(rk.size()));
    for (const auto& elem : rk) {
        w.u64(elem.position);
        w.raw(elem.value.v);
    }
    return w.take();
}

std::optional<RevealSet> decode_reveal_set(ByteView data) {
    ByteReader r(data);
    auto count = r.u8();
    if (!count) return std::nullopt;
    RevealSet rk;
    for (unsigned i = 0; i < *count; ++i) {
        auto pos = r.u64();
        auto val = r.arr<32>();
        if (!pos || !val) return std::nullopt;
        rk.push_back(RevealElem{*pos, SymKey{*val}});
    }
    if (!r.done()) return std::nullopt;
    return rk;
}

}  // namespace fdl::keytree
