#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "phasekey/beacon.hpp"
#include "phasekey/bits.hpp"
#include "phasekey/fading_channel.hpp"
#include "phasekey/mle_estimator.hpp"
#include "phasekey/quantizer.hpp"
#include "phasekey/rng.hpp"

namespace phasekey {

struct NodeId {
    enum class Kind { KeyingA, KeyingB, Relay, Eavesdropper };
    Kind kind = Kind::KeyingA;
    int relay_index = 0; // 1-based, meaningful for relays only

    static NodeId a() { return {Kind::KeyingA, 0}; }
    static NodeId b() { return {Kind::KeyingB, 0}; }
    static NodeId relay(int j) { return {Kind::Relay, j}; }
    static NodeId eve() { return {Kind::Eavesdropper, 0}; }

    std::string to_string() const {
        switch (kind) {
            case Kind::KeyingA: return "A";
            case Kind::KeyingB: return "B";
            case Kind::Relay: return "R" + std::to_string(relay_index);
            case Kind::Eavesdropper: return "E";
        }
        return "?";
    }

    /// Total order A < B < R1 < R2 < ... < E, used for canonical link names.
    int rank() const {
        switch (kind) {
            case Kind::KeyingA: return 0;
            case Kind::KeyingB: return 1;
            case Kind::Relay: return 1 + relay_index;
            case Kind::Eavesdropper: return 1 << 20;
        }
        return -1;
    }

    friend bool operator==(const NodeId& x, const NodeId& y) {
        return x.kind == y.kind && x.relay_index == y.relay_index;
    }
};

inline std::string canonical_link_name(const NodeId& x, const NodeId& y) {
    if (x.rank() <= y.rank()) return x.to_string() + "-" + y.to_string();
    return y.to_string() + "-" + x.to_string();
}

/// How the eavesdropper's channels relate to the legitimate ones.
/// `mirror_keying_link` is a diagnostic mode that deliberately violates
/// spatial decorrelation: E reuses the realization of the link whose phase
/// keys that slot, so its estimates track the key symbols.
enum class EveChannelMode { independent, mirror_keying_link };

enum class RelayKeyPolicy { prefer_kj1, prefer_kj2 };

struct SessionConfig {
    int relays = 1;            // N
    int q = 16;
    int target_key_bits = 128; // |K|
    BeaconSpec beacon;         // per-slot observation window (duration = T_i)
    ChannelParams channel;
    double sigma2 = 0.0;       // per-link noise variance, sigma2 = 0 is noiseless
    std::map<std::string, double> sigma2_overrides; // keyed by canonical link name
    std::optional<int> rounds_override;
    double guard_time_s = 0.0; // transient guard (delay spread + propagation)
    bool simulate_eavesdropper = true;
    EveChannelMode eve_mode = EveChannelMode::independent;
    bool record_slots = false;

    SessionConfig(const BeaconSpec& beacon_spec, const ChannelParams& channel_params)
        : beacon(beacon_spec), channel(channel_params) {}

    int timeslots_per_round() const { return relays + 2; }

    double slot_duration_s() const {
        return channel.coherence_time_s / static_cast<double>(relays + 2);
    }

    int bits_per_index() const { return bits_for_q(q); }

    /// ceil(|K| / ((N+1) log2 q)) unless overridden.
    int rounds() const {
        if (rounds_override) return *rounds_override;
        const int per_round = (relays + 1) * bits_per_index();
        return (target_key_bits + per_round - 1) / per_round;
    }

    double link_sigma2(const NodeId& x, const NodeId& y) const {
        const auto it = sigma2_overrides.find(canonical_link_name(x, y));
        return it == sigma2_overrides.end() ? sigma2 : it->second;
    }

    void validate() const {
        if (relays < 0) throw std::invalid_argument("SessionConfig: relays must be >= 0");
        bits_for_q(q); // q power of two, >= 2
        if (target_key_bits < 1)
            throw std::invalid_argument("SessionConfig: target key size must be >= 1");
        if (!(sigma2 >= 0.0)) throw std::invalid_argument("SessionConfig: sigma2 must be >= 0");
        if (!(guard_time_s >= 0.0))
            throw std::invalid_argument("SessionConfig: guard time must be >= 0");
        beacon.validate();
        if (guard_time_s + beacon.duration_s > slot_duration_s())
            throw std::invalid_argument(
                "SessionConfig: guard plus observation window exceeds the timeslot "
                "budget Tc/(N+2)");
        if (rounds() < 1) throw std::invalid_argument("SessionConfig: no rounds to run");
    }
};

struct Reception {
    NodeId receiver;
    double theta_true = 0.0;
    double amplitude_true = 0.0;
    PhaseEstimate estimate;
    int index = 0;
};

struct SlotRecord {
    int round_index = 0; // 0-based
    int slot_index = 0;  // 1-based, TS_1 .. TS_{N+2}
    NodeId transmitter;
    std::vector<Reception> receptions;
    std::optional<Reception> eavesdropper;
};

struct RoundResult {
    std::vector<SlotRecord> slots;
};

namespace detail {

inline std::uint64_t link_stream_code(int relay_j, bool toward_b) {
    // 0 = A-B, odd = A-Rj, even = B-Rj
    if (relay_j == 0) return 0;
    return static_cast<std::uint64_t>(2 * relay_j - (toward_b ? 0 : 1));
}

inline std::uint64_t receiver_stream_code(const NodeId& node) {
    switch (node.kind) {
        case NodeId::Kind::KeyingA: return 0;
        case NodeId::Kind::KeyingB: return 1;
        case NodeId::Kind::Relay: return 1 + static_cast<std::uint64_t>(node.relay_index);
        case NodeId::Kind::Eavesdropper: return 0xeeee;
    }
    return 0xffff;
}

} // namespace detail

/// Executes the N+2 timeslots of one round inside a fresh coherence
/// interval. Every pairwise link is drawn once and reused for both
/// directions; each receiver estimates from its own noisy observation with
/// the estimate referenced to the shared clock through the nominal carrier.
inline RoundResult run_round(const SessionConfig& config, int round_index, const Rng& root) {
    config.validate();
    const int n_relays = config.relays;
    const std::uint64_t round_u = static_cast<std::uint64_t>(round_index);

    // one realization per link per round (reciprocity inside the interval)
    Rng link_rng = root.substream("channel", round_u);
    ChannelRealization h_ab;
    std::vector<ChannelRealization> h_ar(n_relays), h_br(n_relays);
    {
        Rng s = link_rng.substream("link", detail::link_stream_code(0, false));
        h_ab = sample_channel(s, config.channel);
    }
    for (int j = 1; j <= n_relays; ++j) {
        Rng sa = link_rng.substream("link", detail::link_stream_code(j, false));
        h_ar[j - 1] = sample_channel(sa, config.channel);
        Rng sb = link_rng.substream("link", detail::link_stream_code(j, true));
        h_br[j - 1] = sample_channel(sb, config.channel);
    }

    const double omega_ref = config.beacon.omega_c();
    const double slot_dur = config.slot_duration_s();
    const double round_t0 = static_cast<double>(round_index) * config.channel.coherence_time_s;

    RoundResult result;
    for (int slot = 1; slot <= config.timeslots_per_round(); ++slot) {
        SlotRecord record;
        record.round_index = round_index;
        record.slot_index = slot;
        const double t0 = round_t0 + static_cast<double>(slot - 1) * slot_dur +
                          config.guard_time_s;

        NodeId tx;
        std::vector<std::pair<NodeId, const ChannelRealization*>> receivers;
        if (slot == 1) {
            tx = NodeId::a();
            receivers.emplace_back(NodeId::b(), &h_ab);
            for (int j = 1; j <= n_relays; ++j)
                receivers.emplace_back(NodeId::relay(j), &h_ar[j - 1]);
        } else if (slot == 2) {
            tx = NodeId::b();
            receivers.emplace_back(NodeId::a(), &h_ab);
            for (int j = 1; j <= n_relays; ++j)
                receivers.emplace_back(NodeId::relay(j), &h_br[j - 1]);
        } else {
            const int j = slot - 2;
            tx = NodeId::relay(j);
            receivers.emplace_back(NodeId::a(), &h_ar[j - 1]);
            receivers.emplace_back(NodeId::b(), &h_br[j - 1]);
        }
        record.transmitter = tx;

        for (const auto& [rx, h] : receivers) {
            Rng noise = root.substream("noise", round_u, static_cast<std::uint64_t>(slot),
                                       detail::receiver_stream_code(rx));
            const auto obs = received_tone(config.beacon.with_start_time(t0), *h,
                                           config.link_sigma2(tx, rx), noise);
            Reception r;
            r.receiver = rx;
            r.theta_true = h->phase;
            r.amplitude_true = h->amplitude;
            r.estimate = estimate_tone(obs, 0, omega_ref);
            r.index = quantize_phase(r.estimate.theta_hat, config.q);
            record.receptions.push_back(std::move(r));
        }

        if (config.simulate_eavesdropper) {
            ChannelRealization h_e;
            if (config.eve_mode == EveChannelMode::mirror_keying_link) {
                h_e = (slot <= 2) ? h_ab : h_ar[slot - 3];
            } else {
                Rng es = root.substream("eve-channel", round_u,
                                        static_cast<std::uint64_t>(slot));
                h_e = eavesdropper_channel(es, config.channel);
            }
            Rng noise = root.substream("noise", round_u, static_cast<std::uint64_t>(slot),
                                       detail::receiver_stream_code(NodeId::eve()));
            const auto obs = received_tone(config.beacon.with_start_time(t0), h_e,
                                           config.link_sigma2(tx, NodeId::eve()), noise);
            Reception r;
            r.receiver = NodeId::eve();
            r.theta_true = h_e.phase;
            r.amplitude_true = h_e.amplitude;
            r.estimate = estimate_tone(obs, 0, omega_ref);
            r.index = quantize_phase(r.estimate.theta_hat, config.q);
            record.eavesdropper = std::move(r);
        }
        result.slots.push_back(std::move(record));
    }
    return result;
}

struct IndexedShare {
    std::vector<int> indices;
    BitVector bits;

    void append(int index, int q) {
        indices.push_back(index);
        bits.append(gray_encode(index, q));
    }
};

/// Both ends' copies of every pairwise key component. Copies may differ
/// before reconciliation.
struct KeyShares {
    IndexedShare k1_at_a, k1_at_b;
    std::vector<IndexedShare> kj1_at_a, kj1_at_relay;
    std::vector<IndexedShare> kj2_at_b, kj2_at_relay;
};

namespace detail {

inline const Reception& reception_by(const SlotRecord& slot, const NodeId& node) {
    for (const auto& r : slot.receptions)
        if (r.receiver == node) return r;
    throw std::logic_error("protocol: expected reception missing from slot record");
}

} // namespace detail

/// Concatenates Gray-coded indices round by round into per-link bit
/// vectors, keeping each node's own copy.
inline KeyShares accumulate_shares(const SessionConfig& config,
                                   const std::vector<RoundResult>& rounds) {
    KeyShares shares;
    shares.kj1_at_a.resize(config.relays);
    shares.kj1_at_relay.resize(config.relays);
    shares.kj2_at_b.resize(config.relays);
    shares.kj2_at_relay.resize(config.relays);

    for (const auto& round : rounds) {
        const auto& ts1 = round.slots.at(0);
        const auto& ts2 = round.slots.at(1);
        shares.k1_at_b.append(detail::reception_by(ts1, NodeId::b()).index, config.q);
        shares.k1_at_a.append(detail::reception_by(ts2, NodeId::a()).index, config.q);
        for (int j = 1; j <= config.relays; ++j) {
            const auto& tsr = round.slots.at(static_cast<std::size_t>(1 + j));
            shares.kj1_at_relay[j - 1].append(
                detail::reception_by(ts1, NodeId::relay(j)).index, config.q);
            shares.kj2_at_relay[j - 1].append(
                detail::reception_by(ts2, NodeId::relay(j)).index, config.q);
            shares.kj1_at_a[j - 1].append(detail::reception_by(tsr, NodeId::a()).index,
                                          config.q);
            shares.kj2_at_b[j - 1].append(detail::reception_by(tsr, NodeId::b()).index,
                                          config.q);
        }
    }
    return shares;
}

struct EveObservation {
    int round_index = 0;
    int slot_index = 0;
    double theta_hat = 0.0;
    int index = 0;
};

/// Everything the public channel carries: the relays' XOR messages are the
/// only key-bearing public data; the eavesdropper's per-slot estimates ride
/// along for leakage analysis.
struct PublicTranscript {
    std::vector<BitVector> xor_messages;
    std::vector<EveObservation> eve_observations;
};

/// Each relay publishes Kj1 xor Kj2 computed from its own copies.
inline PublicTranscript relay_publish(const KeyShares& shares) {
    PublicTranscript transcript;
    for (std::size_t j = 0; j < shares.kj1_at_relay.size(); ++j)
        transcript.xor_messages.push_back(shares.kj1_at_relay[j].bits ^
                                          shares.kj2_at_relay[j].bits);
    return transcript;
}

struct KeyComponents {
    BitVector k1;
    std::vector<BitVector> kj1, kj2;
};

/// A recovers every Kj2 from its Kj1 copy and the public XOR; B recovers
/// every Kj1 symmetrically. Both keying nodes end up holding all 2N+1
/// components.
inline KeyComponents recover_components(const KeyShares& shares,
                                        const PublicTranscript& transcript,
                                        const NodeId& role) {
    const std::size_t n_relays = transcript.xor_messages.size();
    if (shares.kj1_at_a.size() != n_relays || shares.kj2_at_b.size() != n_relays)
        throw std::invalid_argument("recover_components: share/transcript relay mismatch");

    KeyComponents out;
    if (role == NodeId::a()) {
        out.k1 = shares.k1_at_a.bits;
        for (std::size_t j = 0; j < n_relays; ++j) {
            if (shares.kj1_at_a[j].bits.size() != transcript.xor_messages[j].size())
                throw std::invalid_argument("recover_components: XOR length mismatch");
            out.kj1.push_back(shares.kj1_at_a[j].bits);
            out.kj2.push_back(shares.kj1_at_a[j].bits ^ transcript.xor_messages[j]);
        }
    } else if (role == NodeId::b()) {
        out.k1 = shares.k1_at_b.bits;
        for (std::size_t j = 0; j < n_relays; ++j) {
            if (shares.kj2_at_b[j].bits.size() != transcript.xor_messages[j].size())
                throw std::invalid_argument("recover_components: XOR length mismatch");
            out.kj1.push_back(shares.kj2_at_b[j].bits ^ transcript.xor_messages[j]);
            out.kj2.push_back(shares.kj2_at_b[j].bits);
        }
    } else {
        throw std::invalid_argument("recover_components: role must be a keying node");
    }
    return out;
}

struct FinalKey {
    BitVector bits;
    std::vector<std::string> composition;
};

/// K1 followed by exactly one member of each relay pair; using both would
/// let the public XOR reveal the second.
inline FinalKey assemble_final_key(const KeyComponents& components,
                                   RelayKeyPolicy policy = RelayKeyPolicy::prefer_kj1) {
    if (components.kj1.size() != components.kj2.size())
        throw std::invalid_argument("assemble_final_key: incomplete relay components");
    FinalKey key;
    key.bits = components.k1;
    key.composition.push_back("K1");
    for (std::size_t j = 0; j < components.kj1.size(); ++j) {
        const bool use_kj1 = policy == RelayKeyPolicy::prefer_kj1;
        key.bits.append(use_kj1 ? components.kj1[j] : components.kj2[j]);
        key.composition.push_back("K" + std::to_string(j + 1) + (use_kj1 ? "1" : "2"));
    }
    return key;
}

/// Per-round symbol view used by the leakage estimator: the key-component
/// indices (as held by A), E's per-slot indices, and the per-round XOR block
/// of each relay read as a symbol.
struct RoundSymbols {
    std::vector<int> legit;     // [0] = K1, [j] = Kj1
    std::vector<int> eve_slots; // size N+2, or empty when E is disabled
    std::vector<int> eve_xor;   // size N
};

struct SessionResult {
    KeyShares shares;
    PublicTranscript transcript;
    FinalKey key_a, key_b;
    std::vector<RoundSymbols> round_symbols;
    std::vector<SlotRecord> slot_records; // populated when config.record_slots
};

inline SessionResult run_session(const SessionConfig& config, const Rng& root) {
    config.validate();
    const int rounds = config.rounds();
    std::vector<RoundResult> round_results;
    round_results.reserve(static_cast<std::size_t>(rounds));
    for (int r = 0; r < rounds; ++r) round_results.push_back(run_round(config, r, root));

    SessionResult result;
    result.shares = accumulate_shares(config, round_results);
    result.transcript = relay_publish(result.shares);
    for (const auto& round : round_results)
        for (const auto& slot : round.slots)
            if (slot.eavesdropper)
                result.transcript.eve_observations.push_back(
                    {slot.round_index, slot.slot_index, slot.eavesdropper->estimate.theta_hat,
                     slot.eavesdropper->index});

    result.key_a = assemble_final_key(recover_components(result.shares, result.transcript,
                                                         NodeId::a()));
    result.key_b = assemble_final_key(recover_components(result.shares, result.transcript,
                                                         NodeId::b()));

    const int bits = config.bits_per_index();
    for (int r = 0; r < rounds; ++r) {
        RoundSymbols symbols;
        symbols.legit.push_back(result.shares.k1_at_a.indices.at(static_cast<std::size_t>(r)));
        for (int j = 1; j <= config.relays; ++j)
            symbols.legit.push_back(
                result.shares.kj1_at_a[j - 1].indices.at(static_cast<std::size_t>(r)));
        if (config.simulate_eavesdropper) {
            for (int slot = 1; slot <= config.timeslots_per_round(); ++slot) {
                const auto& obs = result.transcript.eve_observations.at(
                    static_cast<std::size_t>(r * config.timeslots_per_round() + slot - 1));
                symbols.eve_slots.push_back(obs.index);
            }
        }
        for (int j = 0; j < config.relays; ++j) {
            const auto block = result.transcript.xor_messages[static_cast<std::size_t>(j)]
                                   .slice(static_cast<std::size_t>(r * bits),
                                          static_cast<std::size_t>(bits));
            int sym = 0;
            for (std::size_t i = 0; i < block.size(); ++i) sym = (sym << 1) | block[i];
            symbols.eve_xor.push_back(sym);
        }
        result.round_symbols.push_back(std::move(symbols));
    }

    if (config.record_slots)
        for (auto& round : round_results)
            for (auto& slot : round.slots) result.slot_records.push_back(std::move(slot));
    return result;
}

/// One line per timeslot: round, slot, transmitter, then each receiver with
/// its true phase, estimate and quantization index.
inline void write_trace(std::ostream& os, const SessionResult& session) {
    const auto fmt = [](double v) {
        std::ostringstream s;
        s << std::fixed << std::setprecision(9) << v;
        return s.str();
    };
    for (const auto& slot : session.slot_records) {
        os << "round=" << slot.round_index << " slot=" << slot.slot_index
           << " tx=" << slot.transmitter.to_string();
        for (const auto& r : slot.receptions) {
            os << " rx=" << r.receiver.to_string() << ":theta=" << fmt(r.theta_true)
               << ":est=" << fmt(r.estimate.theta_hat) << ":idx=" << r.index;
        }
        if (slot.eavesdropper) {
            const auto& e = *slot.eavesdropper;
            os << " eve:theta=" << fmt(e.theta_true) << ":est=" << fmt(e.estimate.theta_hat)
               << ":idx=" << e.index;
        }
        os << "\n";
    }
    for (std::size_t j = 0; j < session.transcript.xor_messages.size(); ++j)
        os << "xor R" << (j + 1) << " " << session.transcript.xor_messages[j].to_hex()
           << "\n";
}

struct PairLeakage {
    std::string eve_source;
    std::string key_component;
    double mi_bits = 0.0;
};

struct LeakageReport {
    double max_mi_bits_per_symbol = 0.0;
    std::vector<PairLeakage> pairs;
    std::size_t samples = 0;
};

/// Plug-in mutual information between every public observable available to
/// the eavesdropper and every key-component symbol, per round. The plug-in
/// bias bound (q-1)^2 / (2 n ln 2) is subtracted from each estimate.
class LeakageEstimator {
public:
    LeakageEstimator(int q, int relays, bool with_eve_slots = true)
        : q_(q), relays_(relays), with_eve_slots_(with_eve_slots) {
        bits_for_q(q);
        const std::size_t sources = static_cast<std::size_t>(
            (with_eve_slots_ ? relays + 2 : 0) + relays);
        const std::size_t components = static_cast<std::size_t>(relays + 1);
        tables_.assign(sources * components,
                       std::vector<std::uint32_t>(static_cast<std::size_t>(q) *
                                                      static_cast<std::size_t>(q),
                                                  0));
    }

    void add_session(const SessionResult& session) {
        for (const auto& round : session.round_symbols) add_round(round);
    }

    void add_round(const RoundSymbols& round) {
        std::vector<int> sources;
        if (with_eve_slots_) {
            if (static_cast<int>(round.eve_slots.size()) != relays_ + 2)
                throw std::invalid_argument(
                    "LeakageEstimator: session has no eavesdropper observations");
            for (int v : round.eve_slots) sources.push_back(v - 1);
        }
        for (int v : round.eve_xor) sources.push_back(v);
        if (static_cast<int>(round.legit.size()) != relays_ + 1)
            throw std::invalid_argument("LeakageEstimator: component count mismatch");

        for (std::size_t s = 0; s < sources.size(); ++s) {
            for (std::size_t c = 0; c < round.legit.size(); ++c) {
                auto& table = tables_[s * static_cast<std::size_t>(relays_ + 1) + c];
                const int x = sources[s];
                const int y = round.legit[c] - 1;
                table[static_cast<std::size_t>(x) * static_cast<std::size_t>(q_) +
                      static_cast<std::size_t>(y)] += 1;
            }
        }
        ++samples_;
    }

    std::size_t samples() const { return samples_; }

    LeakageReport estimate() const {
        const std::size_t needed =
            100 * static_cast<std::size_t>(q_) * static_cast<std::size_t>(q_);
        if (samples_ < needed)
            throw std::invalid_argument(
                "LeakageEstimator: need at least 100*q^2 = " + std::to_string(needed) +
                " rounds, have " + std::to_string(samples_));

        LeakageReport report;
        report.samples = samples_;
        for (std::size_t t = 0; t < tables_.size(); ++t) {
            const std::size_t comp = t % static_cast<std::size_t>(relays_ + 1);
            PairLeakage pair;
            pair.eve_source = source_name(t / static_cast<std::size_t>(relays_ + 1));
            pair.key_component = component_name(comp);
            pair.mi_bits = debiased_mi(tables_[t]);
            report.max_mi_bits_per_symbol =
                std::max(report.max_mi_bits_per_symbol, pair.mi_bits);
            report.pairs.push_back(std::move(pair));
        }
        return report;
    }

private:
    std::string source_name(std::size_t s) const {
        if (with_eve_slots_) {
            if (s < static_cast<std::size_t>(relays_ + 2))
                return "E:slot" + std::to_string(s + 1);
            s -= static_cast<std::size_t>(relays_ + 2);
        }
        return "XOR:R" + std::to_string(s + 1);
    }

    std::string component_name(std::size_t c) const {
        return c == 0 ? "K1" : "K" + std::to_string(c) + "1";
    }

    double debiased_mi(const std::vector<std::uint32_t>& table) const {
        const std::size_t q = static_cast<std::size_t>(q_);
        std::vector<double> row(q, 0.0), col(q, 0.0);
        double n = 0.0;
        for (std::size_t x = 0; x < q; ++x)
            for (std::size_t y = 0; y < q; ++y) {
                const double c = table[x * q + y];
                row[x] += c;
                col[y] += c;
                n += c;
            }
        if (n == 0.0) return 0.0;
        double mi = 0.0;
        for (std::size_t x = 0; x < q; ++x)
            for (std::size_t y = 0; y < q; ++y) {
                const double c = table[x * q + y];
                if (c > 0.0) mi += (c / n) * std::log2(c * n / (row[x] * col[y]));
            }
        const double bias = static_cast<double>((q_ - 1)) * static_cast<double>((q_ - 1)) /
                            (2.0 * n * std::log(2.0));
        return std::max(0.0, mi - bias);
    }

    int q_;
    int relays_;
    bool with_eve_slots_;
    std::vector<std::vector<std::uint32_t>> tables_;
    std::size_t samples_ = 0;
};

/// Runs independent sessions and reports the worst pairwise plug-in mutual
/// information between the public view and the key symbols.
inline LeakageReport eavesdropper_leakage(const SessionConfig& config, std::size_t sessions,
                                          const Rng& root) {
    LeakageEstimator estimator(config.q, config.relays, config.simulate_eavesdropper);
    for (std::size_t s = 0; s < sessions; ++s) {
        const auto session = run_session(config, root.substream("session", s));
        estimator.add_session(session);
    }
    return estimator.estimate();
}

} // namespace phasekey
