#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "phasekey/bits.hpp"
#include "phasekey/rng.hpp"

namespace phasekey {

/// Binary [n, k, 2t+1] block code with a bounded-distance decoder: any
/// error pattern of weight <= t is corrected, heavier detectable patterns
/// are flagged.
class LinearBlockCode {
public:
    virtual ~LinearBlockCode() = default;
    virtual int n() const = 0;
    virtual int k() const = 0;
    virtual int t() const = 0;
    virtual std::string name() const = 0;

    virtual BitVector encode(const BitVector& message) const = 0;

    struct DecodeResult {
        BitVector codeword;
        bool ok = false;
    };
    virtual DecodeResult decode(const BitVector& word) const = 0;

    BitVector random_codeword(Rng& rng) const {
        BitVector message;
        for (int i = 0; i < k(); ++i) message.push_back(static_cast<int>(rng.next_u64() & 1u));
        return encode(message);
    }
};

namespace detail {

/// GF(2) polynomials packed into words, bit i = coefficient of x^i.
inline int poly_degree(std::uint64_t p) {
    int d = -1;
    while (p) {
        ++d;
        p >>= 1;
    }
    return d;
}

inline std::uint64_t poly_mod(std::uint64_t a, std::uint64_t m) {
    const int dm = poly_degree(m);
    for (int d = poly_degree(a); d >= dm; d = poly_degree(a)) a ^= m << (d - dm);
    return a;
}

} // namespace detail

/// Cyclic code defined by its generator polynomial, encoded systematically
/// and decoded by an exhaustive syndrome table over all patterns of weight
/// <= t. Exact bounded-distance decoding for every code small enough to
/// enumerate, which covers the key-reconciliation block sizes used here.
class CyclicSyndromeCode : public LinearBlockCode {
public:
    CyclicSyndromeCode(int n, int t, std::uint64_t generator, std::string name)
        : n_(n), t_(t), generator_(generator), name_(std::move(name)) {
        const int deg = detail::poly_degree(generator_);
        k_ = n_ - deg;
        if (n_ < 3 || n_ > 63 || k_ < 1 || t_ < 1)
            throw std::invalid_argument("CyclicSyndromeCode: bad parameters");

        position_syndromes_.resize(static_cast<std::size_t>(n_));
        for (int i = 0; i < n_; ++i)
            position_syndromes_[static_cast<std::size_t>(i)] =
                detail::poly_mod(1ull << i, generator_);

        // enumerate error patterns of weight 1..t; weight 0 maps to syndrome 0
        std::vector<int> positions;
        build_table(0, 0, 0ull, 0ull);
        if (table_.size() !=
            count_patterns(static_cast<unsigned>(n_), static_cast<unsigned>(t_)))
            throw std::logic_error("CyclicSyndromeCode: syndrome collision; t too large "
                                   "for this generator");
    }

    int n() const override { return n_; }
    int k() const override { return k_; }
    int t() const override { return t_; }
    std::string name() const override { return name_; }

    BitVector encode(const BitVector& message) const override {
        if (static_cast<int>(message.size()) != k_)
            throw std::invalid_argument(name_ + ": message must be " + std::to_string(k_) +
                                        " bits");
        const int parity = n_ - k_;
        std::uint64_t m = 0;
        for (int i = 0; i < k_; ++i)
            if (message[static_cast<std::size_t>(i)]) m |= 1ull << i;
        const std::uint64_t shifted = m << parity;
        const std::uint64_t rem = detail::poly_mod(shifted, generator_);
        return to_bits(shifted ^ rem);
    }

    DecodeResult decode(const BitVector& word) const override {
        if (static_cast<int>(word.size()) != n_)
            throw std::invalid_argument(name_ + ": word must be " + std::to_string(n_) +
                                        " bits");
        std::uint64_t w = 0;
        for (int i = 0; i < n_; ++i)
            if (word[static_cast<std::size_t>(i)]) w |= 1ull << i;

        std::uint64_t syndrome = 0;
        for (int i = 0; i < n_; ++i)
            if ((w >> i) & 1ull) syndrome ^= position_syndromes_[static_cast<std::size_t>(i)];

        DecodeResult result;
        if (syndrome == 0) {
            result.codeword = word;
            result.ok = true;
            return result;
        }
        const auto it = table_.find(syndrome);
        if (it == table_.end()) return result; // beyond the packing radius, flagged
        result.codeword = to_bits(w ^ it->second);
        result.ok = true;
        return result;
    }

private:
    static std::size_t count_patterns(unsigned n, unsigned t) {
        std::size_t total = 0;
        for (unsigned w = 1; w <= t; ++w) {
            std::size_t c = 1;
            for (unsigned i = 0; i < w; ++i) c = c * (n - i) / (i + 1);
            total += c;
        }
        return total;
    }

    void build_table(int start, int weight, std::uint64_t pattern, std::uint64_t syndrome) {
        if (weight > 0) table_.emplace(syndrome, pattern);
        if (weight == t_) return;
        for (int i = start; i < n_; ++i)
            build_table(i + 1, weight + 1, pattern | (1ull << i),
                        syndrome ^ position_syndromes_[static_cast<std::size_t>(i)]);
    }

    BitVector to_bits(std::uint64_t word) const {
        BitVector out;
        for (int i = 0; i < n_; ++i) out.push_back(static_cast<int>((word >> i) & 1ull));
        return out;
    }

    int n_, k_, t_;
    std::uint64_t generator_;
    std::string name_;
    std::vector<std::uint64_t> position_syndromes_;
    std::unordered_map<std::uint64_t, std::uint64_t> table_;
};

namespace detail {

/// Generator polynomial of the narrow-sense triple-error-correcting code of
/// length 31: lcm of the minimal polynomials of alpha, alpha^3, alpha^5
/// over GF(2), with GF(32) built on x^5 + x^2 + 1.
inline std::uint64_t bch31_generator() {
    constexpr int field_poly = 0x25; // x^5 + x^2 + 1
    int exp_table[62];
    int v = 1;
    for (int i = 0; i < 62; ++i) {
        exp_table[i] = v;
        v <<= 1;
        if (v & 0x20) v ^= field_poly;
    }
    const auto gf_mul = [&](int a, int b) {
        if (a == 0 || b == 0) return 0;
        int log_a = 0, log_b = 0;
        for (int i = 0; i < 31; ++i) {
            if (exp_table[i] == a) log_a = i;
            if (exp_table[i] == b) log_b = i;
        }
        return exp_table[(log_a + log_b) % 31];
    };

    // product over the conjugacy classes of alpha^1, alpha^3, alpha^5 of
    // (x - alpha^c); coefficients land in GF(2)
    std::vector<int> g{1};
    for (int root : {1, 3, 5}) {
        bool seen[31] = {};
        int c = root;
        while (!seen[c]) {
            seen[c] = true;
            std::vector<int> next(g.size() + 1, 0);
            for (std::size_t i = 0; i < g.size(); ++i) {
                next[i + 1] ^= g[i];                        // x * g
                next[i] ^= gf_mul(g[i], exp_table[c]);      // alpha^c * g
            }
            g = std::move(next);
            c = (2 * c) % 31;
        }
    }
    std::uint64_t packed = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (g[i] != 0 && g[i] != 1)
            throw std::logic_error("bch31_generator: coefficient outside GF(2)");
        if (g[i]) packed |= 1ull << i;
    }
    return packed;
}

} // namespace detail

/// Default reconciliation code: corrects up to 3 errors per 31-bit block
/// and is small enough for exhaustive correctness tests.
class Bch31Code : public CyclicSyndromeCode {
public:
    Bch31Code() : CyclicSyndromeCode(31, 3, detail::bch31_generator(), "bch(31,16,3)") {}
};

class Hamming74Code : public CyclicSyndromeCode {
public:
    Hamming74Code() : CyclicSyndromeCode(7, 1, 0b1011, "hamming(7,4,1)") {}
};

/// Odd-length repetition code, generator 1 + x + ... + x^(n-1).
class RepetitionCode : public CyclicSyndromeCode {
public:
    explicit RepetitionCode(int n)
        : CyclicSyndromeCode(n, (n - 1) / 2, (n > 0 && n < 64) ? ((1ull << n) - 1) : 0,
                             "repetition(" + std::to_string(n) + ")") {
        if (n % 2 == 0 || n < 3 || n > 15)
            throw std::invalid_argument("RepetitionCode: odd n in [3, 15] required");
    }
};

inline std::unique_ptr<LinearBlockCode> make_code(const std::string& id) {
    if (id == "bch(31,16,3)") return std::make_unique<Bch31Code>();
    if (id == "hamming(7,4,1)") return std::make_unique<Hamming74Code>();
    if (id.rfind("repetition(", 0) == 0) {
        const int n = std::stoi(id.substr(11));
        return std::make_unique<RepetitionCode>(n);
    }
    throw std::invalid_argument("make_code: unknown code id '" + id + "'");
}

/// Public helper value s = K xor c for a uniformly random codeword c.
struct SecureSketch {
    BitVector s;
    std::string code_id;

    std::string to_hex_line() const {
        return code_id + " " + std::to_string(s.size()) + " " + s.to_hex();
    }
};

inline SecureSketch sketch(const BitVector& key, const LinearBlockCode& code, Rng& rng) {
    if (static_cast<int>(key.size()) != code.n())
        throw std::invalid_argument("sketch: key must match the code block length");
    SecureSketch out;
    out.s = key ^ code.random_codeword(rng);
    out.code_id = code.name();
    return out;
}

struct RecoverResult {
    BitVector key;
    bool ok = false;
};

/// Rec(K', s): shift by s, decode, shift back. Exact whenever
/// dist(K, K') <= t; heavier errors fail or miscorrect (callers confirm).
inline RecoverResult recover(const BitVector& key_prime, const SecureSketch& sk,
                             const LinearBlockCode& code) {
    if (sk.code_id != code.name())
        throw std::invalid_argument("recover: sketch was made with code " + sk.code_id);
    if (static_cast<int>(key_prime.size()) != code.n())
        throw std::invalid_argument("recover: key must match the code block length");
    const BitVector shifted = key_prime ^ sk.s;
    const auto decoded = code.decode(shifted);
    RecoverResult result;
    if (!decoded.ok) return result;
    result.key = decoded.codeword ^ sk.s;
    result.ok = true;
    return result;
}

/// Block-wise sketch of an arbitrary-length key; the final partial block is
/// zero-padded (padding positions are public and error-free).
struct BlockSketch {
    std::vector<SecureSketch> blocks;
    std::size_t key_bits = 0;
};

inline BlockSketch sketch_blocks(const BitVector& key, const LinearBlockCode& code,
                                 Rng& rng) {
    if (key.empty()) throw std::invalid_argument("sketch_blocks: empty key");
    BlockSketch out;
    out.key_bits = key.size();
    const std::size_t n = static_cast<std::size_t>(code.n());
    for (std::size_t pos = 0; pos < key.size(); pos += n) {
        const std::size_t len = std::min(n, key.size() - pos);
        BitVector block = key.slice(pos, len);
        for (std::size_t i = len; i < n; ++i) block.push_back(0);
        out.blocks.push_back(sketch(block, code, rng));
    }
    return out;
}

inline RecoverResult recover_blocks(const BitVector& key_prime, const BlockSketch& sk,
                                    const LinearBlockCode& code) {
    if (key_prime.size() != sk.key_bits)
        throw std::invalid_argument("recover_blocks: key length mismatch");
    const std::size_t n = static_cast<std::size_t>(code.n());
    RecoverResult result;
    result.ok = true;
    for (std::size_t b = 0; b < sk.blocks.size(); ++b) {
        const std::size_t pos = b * n;
        const std::size_t len = std::min(n, key_prime.size() - pos);
        BitVector block = key_prime.slice(pos, len);
        for (std::size_t i = len; i < n; ++i) block.push_back(0);
        const auto rec = recover(block, sk.blocks[b], code);
        if (!rec.ok) {
            result.ok = false;
            return result;
        }
        for (std::size_t i = 0; i < len; ++i) result.key.push_back(rec.key[i]);
    }
    return result;
}

/// Short public digest for key confirmation. Not part of the secret output;
/// its length is charged against the entropy budget.
inline std::uint64_t confirm_hash(const BitVector& key) {
    std::uint64_t h = 0x6a09e667f3bcc908ULL ^ (static_cast<std::uint64_t>(key.size()) << 1);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < key.size(); ++i) {
        word = (word << 1) | static_cast<std::uint64_t>(key[i]);
        if ((i + 1) % 64 == 0 || i + 1 == key.size()) {
            h = detail::mix_word(h, word);
            word = 0;
        }
    }
    return detail::splitmix64(h);
}

inline constexpr std::size_t kConfirmHashBits = 64;
inline constexpr std::size_t kAmplificationMarginBits = 40; // 2*log2(1/delta), delta=2^-20

/// Secret bits extractable after reconciliation: the sketch leaks n-k per
/// block, the confirmation digest is public, and a fixed leftover-hash
/// margin is reserved.
inline std::ptrdiff_t amplification_budget(std::size_t key_bits, const LinearBlockCode& code,
                                           std::size_t confirm_bits = kConfirmHashBits,
                                           std::size_t margin_bits = kAmplificationMarginBits) {
    const std::size_t n = static_cast<std::size_t>(code.n());
    const std::size_t blocks = (key_bits + n - 1) / n;
    const std::size_t leaked = blocks * static_cast<std::size_t>(code.n() - code.k());
    return static_cast<std::ptrdiff_t>(key_bits) - static_cast<std::ptrdiff_t>(leaked) -
           static_cast<std::ptrdiff_t>(confirm_bits) - static_cast<std::ptrdiff_t>(margin_bits);
}

/// Two-universal compression: output bit i is the parity of the key masked
/// by row i of a binary Toeplitz matrix drawn from the public seed.
inline BitVector privacy_amplify(const BitVector& key, std::uint64_t public_seed,
                                 std::size_t out_len) {
    if (out_len > key.size())
        throw std::invalid_argument("privacy_amplify: output exceeds input length");
    BitVector out;
    if (out_len == 0) return out;

    Rng rng(derive_seed(public_seed, "toeplitz"));
    const std::size_t diag_len = key.size() + out_len - 1;
    std::vector<std::uint8_t> diag(diag_len);
    for (auto& b : diag) b = static_cast<std::uint8_t>(rng.next_u64() & 1u);

    for (std::size_t i = 0; i < out_len; ++i) {
        int parity = 0;
        for (std::size_t j = 0; j < key.size(); ++j)
            parity ^= key[j] & diag[i + key.size() - 1 - j];
        out.push_back(parity);
    }
    return out;
}

/// Full second-phase pipeline: A sketches, B recovers, both confirm with a
/// public digest, then both compress with a shared public seed.
struct ReconciliationOutcome {
    bool recovered = false;
    bool confirmed = false;
    BitVector corrected_key_b;
    BitVector secret_a, secret_b;
    std::size_t leaked_bits = 0;
    BlockSketch sketch;
    std::uint64_t amplification_seed = 0;
};

inline ReconciliationOutcome reconcile_and_amplify(const BitVector& key_a,
                                                   const BitVector& key_b,
                                                   const LinearBlockCode& code, Rng& rng) {
    ReconciliationOutcome outcome;
    outcome.sketch = sketch_blocks(key_a, code, rng);
    outcome.leaked_bits = outcome.sketch.blocks.size() *
                          static_cast<std::size_t>(code.n() - code.k());

    const auto rec = recover_blocks(key_b, outcome.sketch, code);
    outcome.recovered = rec.ok;
    if (!rec.ok) return outcome;
    outcome.corrected_key_b = rec.key;
    outcome.confirmed = confirm_hash(key_a) == confirm_hash(rec.key);
    if (!outcome.confirmed) return outcome;

    const std::ptrdiff_t budget = amplification_budget(key_a.size(), code);
    const std::size_t out_len = budget > 0 ? static_cast<std::size_t>(budget) : 0;
    outcome.amplification_seed = rng.next_u64(); // public coin
    outcome.secret_a = privacy_amplify(key_a, outcome.amplification_seed, out_len);
    outcome.secret_b = privacy_amplify(rec.key, outcome.amplification_seed, out_len);
    return outcome;
}

} // namespace phasekey
