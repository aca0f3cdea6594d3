#ifndef FDL_BYTES_HPP
#define FDL_BYTES_HPP

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fdl {

using Bytes = std::vector<uint8_t>;
using ByteView = std::span<const uint8_t>;

// 32-byte hash output.
struct Digest {
    std::array<uint8_t, 32> v{};
    auto operator<=>(const Digest&) const = default;
};

// 32-byte symmetric key (key-tree node / chunk key).
struct SymKey {
    std::array<uint8_t, 32> v{};
    auto operator<=>(const SymKey&) const = default;
};

inline SymKey to_key(const Digest& d) { return SymKey{d.v}; }
inline Digest to_digest(const SymKey& k) { return Digest{k.v}; }

using Signature = std::array<uint8_t, 64>;
using PubKey = std::array<uint8_t, 32>;  // Ed25519 verification key

std::string hex(ByteView data);
std::string hex(const Digest& d);
std::optional<Bytes> from_hex(const std::string& s);

// Short fingerprint used in transcripts (first 8 bytes of the value, hex).
std::string fingerprint(ByteView data);

// Canonical integer layout: 8-byte big-endian.
void put_u64_be(Bytes& out, uint64_t v);
uint64_t get_u64_be(const uint8_t* p);

// Sequential writer for the canonical byte layouts.
class ByteWriter {
public:
    void u8(uint8_t v) { out_.push_back(v); }
    void u64(uint64_t v) { put_u64_be(out_, v); }
    void raw(ByteView data) { out_.insert(out_.end(), data.begin(), data.end()); }
    void raw(const std::array<uint8_t, 32>& a) { raw(ByteView{a.data(), a.size()}); }
    void raw(const Signature& s) { raw(ByteView{s.data(), s.size()}); }
    // Length-prefixed byte string (8-byte BE length).
    void blob(ByteView data) {
        u64(data.size());
        raw(data);
    }
    Bytes take() { return std::move(out_); }
    const Bytes& peek() const { return out_; }

private:
    Bytes out_;
};

// Strict reader: any out-of-range read or trailing data makes the decode fail.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::optional<uint8_t> u8() {
        if (pos_ + 1 > data_.size()) return fail();
        return data_[pos_++];
    }
    std::optional<uint64_t> u64() {
        if (pos_ + 8 > data_.size()) return fail();
        uint64_t v = get_u64_be(data_.data() + pos_);
        pos_ += 8;
        return v;
    }
    std::optional<Bytes> raw(size_t n) {
        if (pos_ + n > data_.size()) return fail();
        Bytes b(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return b;
    }
    template <size_t N>
    std::optional<std::array<uint8_t, N>> arr() {
        if (pos_ + N > data_.size()) return fail();
        std::array<uint8_t, N> a;
        std::memcpy(a.data(), data_.data() + pos_, N);
        pos_ += N;
        return a;
    }
    std::optional<Bytes> blob() {
        auto n = u64();
        if (!n) return std::nullopt;
        if (*n > data_.size() - pos_) return fail();
        return raw(static_cast<size_t>(*n));
    }
    bool done() const { return ok_ && pos_ == data_.size(); }
    bool ok() const { return ok_; }

private:
    std::nullopt_t fail() {
        ok_ = false;
        return std::nullopt;
    }
    ByteView data_;
    size_t pos_ = 0;
    bool ok_ = true;
};

}  // namespace fdl

#endif
