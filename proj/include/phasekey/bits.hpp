#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasekey {

/// Ordered binary sequence with value semantics. Sized for key material
/// (hundreds to tens of thousands of bits), so one byte per bit keeps the
/// code simple.
class BitVector {
public:
    BitVector() = default;

    explicit BitVector(std::size_t n, int fill = 0) : bits_(n, fill ? 1 : 0) {}

    static BitVector from_string(const std::string& s) {
        BitVector v;
        v.bits_.reserve(s.size());
        for (char c : s) {
            if (c == '0')
                v.bits_.push_back(0);
            else if (c == '1')
                v.bits_.push_back(1);
            else
                throw std::invalid_argument("BitVector: string must contain only 0/1");
        }
        return v;
    }

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }

    int operator[](std::size_t i) const { return bits_[i]; }

    void set(std::size_t i, int v) { bits_.at(i) = v ? 1 : 0; }

    void push_back(int v) { bits_.push_back(v ? 1 : 0); }

    void append(const BitVector& other) {
        bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
    }

    BitVector slice(std::size_t pos, std::size_t len) const {
        if (pos + len > bits_.size()) throw std::out_of_range("BitVector::slice");
        BitVector v;
        v.bits_.assign(bits_.begin() + static_cast<std::ptrdiff_t>(pos),
                       bits_.begin() + static_cast<std::ptrdiff_t>(pos + len));
        return v;
    }

    std::size_t popcount() const {
        std::size_t c = 0;
        for (auto b : bits_) c += b;
        return c;
    }

    friend BitVector operator^(const BitVector& a, const BitVector& b) {
        if (a.size() != b.size())
            throw std::invalid_argument("BitVector: xor length mismatch");
        BitVector out;
        out.bits_.resize(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) out.bits_[i] = a.bits_[i] ^ b.bits_[i];
        return out;
    }

    friend bool operator==(const BitVector& a, const BitVector& b) {
        return a.bits_ == b.bits_;
    }

    std::string to_string() const {
        std::string s;
        s.reserve(bits_.size());
        for (auto b : bits_) s.push_back(b ? '1' : '0');
        return s;
    }

    /// Hex encoding, MSB-first, zero-padded to whole nibbles.
    std::string to_hex() const {
        static const char digits[] = "0123456789abcdef";
        std::string s;
        const std::size_t n = bits_.size();
        const std::size_t nibbles = (n + 3) / 4;
        s.reserve(nibbles);
        for (std::size_t nb = 0; nb < nibbles; ++nb) {
            int v = 0;
            for (std::size_t j = 0; j < 4; ++j) {
                const std::size_t idx = nb * 4 + j;
                v = (v << 1) | (idx < n ? bits_[idx] : 0);
            }
            s.push_back(digits[v]);
        }
        return s;
    }

    static BitVector from_hex(const std::string& hex, std::size_t n_bits) {
        if ((n_bits + 3) / 4 != hex.size())
            throw std::invalid_argument("BitVector::from_hex: length mismatch");
        BitVector v;
        v.bits_.reserve(n_bits);
        for (std::size_t i = 0; i < n_bits; ++i) {
            const char c = hex[i / 4];
            int nib;
            if (c >= '0' && c <= '9')
                nib = c - '0';
            else if (c >= 'a' && c <= 'f')
                nib = c - 'a' + 10;
            else if (c >= 'A' && c <= 'F')
                nib = c - 'A' + 10;
            else
                throw std::invalid_argument("BitVector::from_hex: bad hex digit");
            v.bits_.push_back((nib >> (3 - i % 4)) & 1);
        }
        return v;
    }

private:
    std::vector<std::uint8_t> bits_;
};

inline std::size_t hamming_distance(const BitVector& a, const BitVector& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("hamming_distance: length mismatch");
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
    return d;
}

} // namespace phasekey
