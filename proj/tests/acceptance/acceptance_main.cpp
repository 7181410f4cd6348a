// Acceptance suite: one criterion per function, one PASS/FAIL line each.
// Exit status is the number of failed criteria.

#include <chrono>
#include <cstdio>
#include <string>
#include <vector>

#include "phasekey/phasekey.hpp"

using namespace phasekey;

namespace {

constexpr double kFc = 0.9e6;  // desk-scale carrier, fs/fc = 3 preserved
constexpr double kFs = 2.7e6;
constexpr double kTc = 0.014;
constexpr double kSigmaH2 = 0.5;
constexpr double kPower = 1.0;
constexpr double kSnr25 = 316.22776601683793; // 25 dB

int failures = 0;

void report(int criterion, bool pass, const std::string& detail, double seconds) {
    std::printf("[%s] criterion %2d: %s (%.1fs)\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

ExperimentConfig benchmark_config(std::size_t n_samples) {
    ExperimentConfig cfg = default_config(ExperimentId::ber_vs_q);
    cfg.fc_hz = kFc;
    cfg.fs_hz = kFs;
    cfg.tc_s = kTc;
    cfg.sigma_h2 = kSigmaH2;
    cfg.power_p = kPower;
    cfg.snr_db = 25.0;
    cfg.n_samples = n_samples;
    cfg.fading = false; // received amplitude pinned at RMS: SNR holds per trial
    return cfg;
}

SessionConfig protocol_config(int relays, int q, int key_bits, double sigma2,
                              std::size_t n_samples) {
    const BeaconSpec beacon(std::sqrt(2.0 * kPower), kFc,
                            static_cast<double>(n_samples) / kFs, kFs);
    const ChannelParams channel(kSigmaH2, kTc);
    SessionConfig cfg(beacon, channel);
    cfg.relays = relays;
    cfg.q = q;
    cfg.target_key_bits = key_bits;
    cfg.sigma2 = sigma2;
    cfg.guard_time_s = 1.2333e-6;
    cfg.simulate_eavesdropper = false;
    return cfg;
}

// 1. Phase-error variance of the full estimator against the CRB at
//    SNR 25 dB, N_s = 20250, >= 1e4 trials. The estimator is
//    asymptotically efficient, so the ratio concentrates at 1; the lower
//    edge carries the one-sided 1 percent Monte Carlo allowance.
void criterion_1() {
    Timer timer;
    const std::size_t n_samples = 20250;
    const std::size_t trials = 10000;
    auto cfg = benchmark_config(n_samples);
    const auto beacon = cfg.beacon();
    const double sigma2 = cfg.sigma2();
    const double crb = crb_phase_variance(kSnr25, n_samples).var_theta_lower_bound;

    std::vector<double> errors(2 * trials);
    const Rng root(20250101);
    parallel_for(trials, cfg.threads, [&](std::size_t t) {
        const auto s = detail::pairwise_trial(cfg, beacon, sigma2,
                                              static_cast<std::uint64_t>(t), root);
        errors[2 * t] = wrapped_phase_error(s.theta_a, s.theta_true);
        errors[2 * t + 1] = wrapped_phase_error(s.theta_b, s.theta_true);
    });
    const auto mv = mean_and_variance(errors);
    const double ratio = mv.variance / crb;
    const double se = ratio * std::sqrt(2.0 / static_cast<double>(errors.size()));
    const double lower = 1.0 - 2.326 * se;
    const bool pass = ratio >= lower && ratio <= 1.25;
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "variance/CRB = %.4f in [%.4f, 1.25] (var %.4e, CRB %.4e, %zu estimates)",
                  ratio, lower, mv.variance, crb, errors.size());
    report(1, pass, detail, timer.seconds());
}

// 2. Noiseless end-to-end: sigma2 = 0, N = 1, q = 256, |K| = 256 bits;
//    both keying nodes derive identical keys in 100 of 100 sessions.
void criterion_2() {
    Timer timer;
    auto cfg = protocol_config(1, 256, 256, 0.0, 64);
    int identical = 0;
    const Rng root(2);
    for (int s = 0; s < 100; ++s) {
        const auto session = run_session(cfg, root.substream("session",
                                                             static_cast<std::uint64_t>(s)));
        identical += session.key_a.bits == session.key_b.bits &&
                     session.key_a.bits.size() == 256;
    }
    char detail[120];
    std::snprintf(detail, sizeof detail, "identical final keys in %d/100 noiseless sessions",
                  identical);
    report(2, identical == 100, detail, timer.seconds());
}

// 3. Index-disagreement rate at SNR 25 dB for q in {4, 16, 64}: within
//    20 percent of the analytic 1 - P_QIA and within three combined
//    standard errors of the wrap-aware Monte Carlo oracle.
void criterion_3() {
    Timer timer;
    const std::size_t n_samples = 64;
    const std::size_t trials = 400000;
    auto cfg = benchmark_config(n_samples);
    const auto beacon = cfg.beacon();
    const double sigma2 = cfg.sigma2();
    const double var = crb_phase_variance(kSnr25, n_samples).var_theta_lower_bound;

    std::vector<double> theta_a(trials), theta_b(trials);
    const Rng root(3);
    parallel_for(trials, cfg.threads, [&](std::size_t t) {
        const auto s = detail::pairwise_trial(cfg, beacon, sigma2,
                                              static_cast<std::uint64_t>(t), root);
        theta_a[t] = s.theta_a;
        theta_b[t] = s.theta_b;
    });

    bool pass = true;
    std::string detail;
    for (int q : {4, 16, 64}) {
        std::size_t slips = 0;
        for (std::size_t t = 0; t < trials; ++t)
            slips += quantize_phase(theta_a[t], q) != quantize_phase(theta_b[t], q);
        const double d_sim = static_cast<double>(slips) / static_cast<double>(trials);
        const double d_analytic = 1.0 - p_qia(var, q);

        Rng oracle_rng(300 + static_cast<std::uint64_t>(q));
        const std::size_t oracle_trials = 10000000;
        const double p_oracle = p_qia_monte_carlo(var, q, oracle_trials, oracle_rng);
        const double d_oracle = 1.0 - p_oracle;

        const double se_sim = std::sqrt(d_sim * (1.0 - d_sim) / static_cast<double>(trials));
        const double se_orc =
            std::sqrt(d_oracle * (1.0 - d_oracle) / static_cast<double>(oracle_trials));
        const double band = 3.0 * std::sqrt(se_sim * se_sim + se_orc * se_orc);

        const bool in_analytic = d_sim > 0.8 * d_analytic && d_sim < 1.2 * d_analytic;
        const bool in_oracle = std::fabs(d_sim - d_oracle) < band;
        pass = pass && in_analytic && in_oracle;
        char buf[120];
        std::snprintf(buf, sizeof buf, "q=%d sim %.5f / analytic %.5f / oracle %.5f%s ", q,
                      d_sim, d_analytic, d_oracle,
                      (in_analytic && in_oracle) ? "" : " <-out-of-band");
        detail += buf;
    }
    report(3, pass, detail, timer.seconds());
}

// 4. Rate versus q: the analytic curve over q = 2..2^16 rises to an
//    interior maximum and falls; the simulated rate tracks it within
//    20 percent for q <= 64.
void criterion_4() {
    Timer timer;
    const std::size_t n_samples = 20250;
    BoundConfig bc;
    bc.sigma_h2 = kSigmaH2;
    bc.sigma2 = 2.0 * kSigmaH2 * kPower / kSnr25;
    bc.power_p = kPower;
    bc.n_samples = static_cast<double>(n_samples);
    bc.coherence_time_s = kTc;
    bc.relays = 0;

    std::vector<double> rates;
    for (int e = 1; e <= 16; ++e) {
        bc.q = 1 << e;
        rates.push_back(rate_crb(bc));
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < rates.size(); ++i)
        if (rates[i] > rates[peak]) peak = i;
    bool unimodal = peak > 0 && peak + 1 < rates.size();
    for (std::size_t i = 0; i < peak; ++i) unimodal = unimodal && rates[i] < rates[i + 1];
    for (std::size_t i = peak; i + 1 < rates.size(); ++i)
        unimodal = unimodal && rates[i] > rates[i + 1];

    auto cfg = benchmark_config(n_samples);
    const std::size_t trials = 600;
    const auto beacon = cfg.beacon();
    const double sigma2 = cfg.sigma2();
    std::vector<double> theta_a(trials), theta_b(trials);
    const Rng root(4);
    parallel_for(trials, cfg.threads, [&](std::size_t t) {
        const auto s = detail::pairwise_trial(cfg, beacon, sigma2,
                                              static_cast<std::uint64_t>(t), root);
        theta_a[t] = s.theta_a;
        theta_b[t] = s.theta_b;
    });
    bool sim_tracks = true;
    double worst = 0.0;
    for (int e = 1; e <= 6; ++e) {
        const int q = 1 << e;
        bc.q = q;
        std::size_t agree = 0;
        for (std::size_t t = 0; t < trials; ++t)
            agree += quantize_phase(theta_a[t], q) == quantize_phase(theta_b[t], q);
        const double rate_sim = static_cast<double>(agree) / static_cast<double>(trials) *
                                std::log2(static_cast<double>(q)) / kTc;
        const double rel = std::fabs(rate_sim - rate_crb(bc)) / rate_crb(bc);
        worst = std::max(worst, rel);
        sim_tracks = sim_tracks && rel < 0.2;
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "analytic peak interior at q=2^%zu %s; sim/analytic worst deviation %.1f%% "
                  "for q<=64",
                  peak + 1, unimodal ? "(unimodal)" : "(NOT unimodal)", 100.0 * worst);
    report(4, unimodal && sim_tracks, detail, timer.seconds());
}

// 5. Cooperative gain: the extrapolated high-power limit reaches N + 1
//    within one percent for N in {1, 2, 4, 8}.
void criterion_5() {
    Timer timer;
    BoundConfig bc;
    bc.sigma_h2 = kSigmaH2;
    bc.sigma2 = 2.0 * kSigmaH2 * kPower / kSnr25;
    bc.power_p = kPower;
    bc.n_samples = 18900;
    bc.coherence_time_s = kTc;
    bc.q = 16;

    bool pass = true;
    std::string detail;
    for (int relays : {1, 2, 4, 8}) {
        bc.relays = relays;
        const double limit = coop_gain(bc, GainLimit::power, 1e9).limit;
        const double target = static_cast<double>(relays + 1);
        const bool ok = std::fabs(limit - target) <= 0.01 * target;
        pass = pass && ok;
        char buf[48];
        std::snprintf(buf, sizeof buf, "N=%d: %.4f%s ", relays, limit, ok ? "" : "(!)");
        detail += buf;
    }
    report(5, pass, detail + "targets N+1 within 1%", timer.seconds());
}

// 6. Bound ordering: the estimation-theoretic rate never exceeds the
//    information-theoretic rate over a 3 SNR x 10 T_o x 5 N grid.
void criterion_6() {
    Timer timer;
    BoundConfig bc;
    bc.sigma_h2 = kSigmaH2;
    bc.power_p = kPower;
    bc.coherence_time_s = kTc;
    bc.q = 16;

    int points = 0, ordered = 0;
    for (double snr_db : {15.0, 20.0, 25.0}) {
        bc.sigma2 = 2.0 * kSigmaH2 * kPower / db_to_linear(snr_db);
        for (int i = 0; i < 10; ++i) {
            const double to = 0.0005 + 0.0006 * static_cast<double>(i); // 0.5 .. 5.9 ms
            bc.n_samples = std::floor(to * kFs);
            for (int relays : {0, 1, 2, 4, 8}) {
                bc.relays = relays;
                ++points;
                ordered += rate_crb_coop(bc) <= rate_mi_coop(bc);
            }
        }
    }
    char detail[96];
    std::snprintf(detail, sizeof detail, "rate_crb <= rate_mi at %d/%d grid points", ordered,
                  points);
    report(6, ordered == points, detail, timer.seconds());
}

// 7. Linear scaling: simulated key rate at q = 16, SNR 25 dB, fixed
//    per-slot window, N = 1..8; linear fit R^2 >= 0.99.
void criterion_7() {
    Timer timer;
    const std::size_t n_samples = 2025;
    const int q = 16;
    const int rounds = 600;
    std::vector<double> ns, rates;
    const Rng root(7);
    for (int relays = 1; relays <= 8; ++relays) {
        auto cfg = protocol_config(relays, q, 64, 0.0, n_samples);
        cfg.sigma2 = snr_to_sigma2(cfg.beacon, kSigmaH2, kSnr25);
        cfg.rounds_override = rounds;
        const auto session = run_session(cfg, root.substream("session",
                                                             static_cast<std::uint64_t>(relays)));
        const int bits = bits_for_q(q);
        const std::size_t blocks = session.key_a.bits.size() / static_cast<std::size_t>(bits);
        std::size_t agree = 0;
        for (std::size_t b = 0; b < blocks; ++b) {
            agree += session.key_a.bits.slice(b * static_cast<std::size_t>(bits),
                                              static_cast<std::size_t>(bits)) ==
                     session.key_b.bits.slice(b * static_cast<std::size_t>(bits),
                                              static_cast<std::size_t>(bits));
        }
        const double p_agree = static_cast<double>(agree) / static_cast<double>(blocks);
        ns.push_back(static_cast<double>(relays));
        rates.push_back(p_agree * static_cast<double>(relays + 1) *
                        static_cast<double>(bits) / kTc);
    }
    const auto fit = linear_fit(ns, rates);
    char detail[120];
    std::snprintf(detail, sizeof detail,
                  "rate vs N linear fit R^2 = %.5f (slope %.1f bits/s per relay)",
                  fit.r_squared, fit.slope);
    report(7, fit.r_squared >= 0.99, detail, timer.seconds());
}

// 8. Reconciliation: exhaustive exactness for every pattern of weight <= 3
//    on 100 random keys; weight-4 bursts are flagged or caught by the
//    confirmation digest in all of 1e4 sampled cases.
void criterion_8() {
    Timer timer;
    const Bch31Code code;
    Rng rng(8);

    bool exact = true;
    for (int key_idx = 0; key_idx < 100 && exact; ++key_idx) {
        BitVector key;
        for (int i = 0; i < 31; ++i) key.push_back(static_cast<int>(rng.next_u64() & 1u));
        const auto sk = sketch(key, code, rng);
        // weight 0
        {
            const auto rec = recover(key, sk, code);
            exact = exact && rec.ok && rec.key == key;
        }
        for (int i = 0; i < 31 && exact; ++i) {
            for (int j = i; j < 31 && exact; ++j) {
                for (int k = j; k < 31 && exact; ++k) {
                    BitVector noisy = key;
                    noisy.set(static_cast<std::size_t>(i), 1 - noisy[static_cast<std::size_t>(i)]);
                    if (j != i) noisy.set(static_cast<std::size_t>(j), 1 - noisy[static_cast<std::size_t>(j)]);
                    if (k != j && k != i) noisy.set(static_cast<std::size_t>(k), 1 - noisy[static_cast<std::size_t>(k)]);
                    const auto rec = recover(noisy, sk, code);
                    exact = exact && rec.ok && rec.key == key;
                }
            }
        }
    }

    int caught = 0;
    const int heavy_trials = 10000;
    for (int trial = 0; trial < heavy_trials; ++trial) {
        BitVector key;
        for (int i = 0; i < 31; ++i) key.push_back(static_cast<int>(rng.next_u64() & 1u));
        const auto sk = sketch(key, code, rng);
        BitVector noisy = key;
        std::size_t start = rng.next_u64() % 28;
        for (std::size_t i = start; i < start + 4; ++i) noisy.set(i, 1 - noisy[i]);
        const auto rec = recover(noisy, sk, code);
        if (!rec.ok || confirm_hash(rec.key) != confirm_hash(key)) ++caught;
    }
    char detail[140];
    std::snprintf(detail, sizeof detail,
                  "weight<=3 exhaustive on 100 keys %s; weight-4 bursts caught %d/%d",
                  exact ? "exact" : "BROKEN", caught, heavy_trials);
    report(8, exact && caught == heavy_trials, detail, timer.seconds());
}

// 9. Randomness: 10 sequences x 1e4 key bits from simulated sessions pass
//    the battery at p > 0.01 for at least 9 of 10 sequences per test.
void criterion_9() {
    Timer timer;
    auto cfg = protocol_config(1, 256, 10000, 0.0, 128);
    cfg.sigma2 = snr_to_sigma2(cfg.beacon, kSigmaH2, kSnr25);

    std::vector<BitVector> sequences(10);
    const Rng root(9);
    parallel_for(sequences.size(), 0, [&](std::size_t s) {
        const auto session = run_session(cfg, root.substream("session", s));
        sequences[s] = session.key_a.bits.slice(0, 10000);
    });

    std::map<std::string, int> passes;
    for (const auto& bits : sequences) {
        for (const auto& rep : run_all_tests(bits)) passes[rep.test] += rep.pass;
    }
    bool pass = true;
    std::string detail;
    for (const auto& [name, count] : passes) {
        pass = pass && count >= 9;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%s %d/10 ", name.c_str(), count);
        detail += buf;
    }
    report(9, pass, detail, timer.seconds());
}

// 10. Eavesdropper leakage: worst pairwise plug-in mutual information
//     between the public view and the key symbols, 1e5 sessions at q = 8,
//     stays at or below 0.01 bits per symbol.
void criterion_10() {
    Timer timer;
    auto cfg = protocol_config(1, 8, 6, 0.0, 128);
    cfg.sigma2 = snr_to_sigma2(cfg.beacon, kSigmaH2, kSnr25);
    cfg.simulate_eavesdropper = true;
    cfg.rounds_override = 1;

    const std::size_t sessions = 100000;
    std::vector<RoundSymbols> symbols(sessions);
    const Rng root(10);
    parallel_for(sessions, 0, [&](std::size_t s) {
        const auto session = run_session(cfg, root.substream("session", s));
        symbols[s] = session.round_symbols.front();
    });
    LeakageEstimator estimator(cfg.q, cfg.relays);
    for (const auto& round : symbols) estimator.add_round(round);
    const auto leakage = estimator.estimate();

    char detail[120];
    std::snprintf(detail, sizeof detail,
                  "max plug-in MI %.5f bits/symbol over %zu sessions (threshold 0.01)",
                  leakage.max_mi_bits_per_symbol, sessions);
    report(10, leakage.max_mi_bits_per_symbol <= 0.01, detail, timer.seconds());
}

} // namespace

int main() {
    const Timer total;
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    criterion_10();
    std::printf("%d/10 criteria passed (total %.1fs)\n", 10 - failures, total.seconds());
    return failures;
}
