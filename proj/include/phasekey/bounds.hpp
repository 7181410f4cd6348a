#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "phasekey/mle_estimator.hpp"
#include "phasekey/numeric.hpp"
#include "phasekey/quantizer.hpp"

namespace phasekey {

struct BoundConfig {
    double sigma_h2;
    double sigma2;
    double power_p;          // P = a^2 / 2
    double n_samples;        // per-node samples in the no-relay schedule
    double coherence_time_s;
    int relays = 0;
    int q = 16;

    void validate() const {
        if (!(sigma_h2 > 0.0) || !(sigma2 > 0.0) || !(power_p > 0.0) ||
            !(n_samples > 0.0) || !(coherence_time_s > 0.0))
            throw std::invalid_argument("BoundConfig: parameters must be positive");
        if (relays < 0) throw std::invalid_argument("BoundConfig: relays must be >= 0");
        if (q < 2) throw std::invalid_argument("BoundConfig: q must be >= 2");
    }

    double snr_linear() const { return 2.0 * sigma_h2 * power_p / sigma2; }

    /// Per-node sample budget when N relays share the coherence interval.
    double coop_samples() const {
        return 2.0 * n_samples / (static_cast<double>(relays) + 2.0);
    }
};

struct BoundReport {
    double r_mi = 0.0;
    double r_mi_coop = 0.0;
    double r_crb = 0.0;
    double r_crb_coop = 0.0;
    double p_qia = 0.0;     // agreement probability at the cooperative budget
    double coop_gain = 0.0; // high-power limit of r_mi_coop / r_mi
};

/// Mutual information (nats) between the two ends' sufficient statistics
/// for one reciprocal channel draw observed over n_samples samples.
inline double pairwise_mutual_information_nats(double sigma_h2, double sigma2, double power_p,
                                               double n_samples) {
    const double num = sigma_h2 * sigma_h2 * n_samples * n_samples * power_p * power_p;
    const double den = sigma2 * sigma2 + 2.0 * sigma2 * sigma_h2 * n_samples * power_p;
    return std::log(1.0 + num / den);
}

/// Information-theoretic key-rate upper bound (bits/s, no relay):
///   (ln 2 / T_c) * log2(1 + sigma_h^4 N^2 P^2 / (sigma^4 + 2 sigma^2 sigma_h^2 N P)).
inline double rate_mi(const BoundConfig& cfg) {
    cfg.validate();
    return pairwise_mutual_information_nats(cfg.sigma_h2, cfg.sigma2, cfg.power_p,
                                            cfg.n_samples) /
           cfg.coherence_time_s;
}

/// Cooperative MI bound: N+1 pairwise components, each observed over the
/// shared per-node budget 2 N_s / (N + 2).
inline double rate_mi_coop(const BoundConfig& cfg) {
    cfg.validate();
    const double n_coop = cfg.coop_samples();
    return (static_cast<double>(cfg.relays) + 1.0) *
           pairwise_mutual_information_nats(cfg.sigma_h2, cfg.sigma2, cfg.power_p, n_coop) /
           cfg.coherence_time_s;
}

enum class GainLimit { power, samples };

struct CoopGainResult {
    double limit = 0.0;                // extrapolated ratio
    std::vector<double> sweep_ratios;  // raw ratios along the geometric sweep
};

namespace detail {

/// The ratio behaves as A (L + c2) / (L + c1) in L = ln(parameter) for a
/// geometric sweep; three samples pin the Moebius form and A is the limit.
inline double extrapolate_moebius(double l1, double f1, double l2, double f2, double l3,
                                  double f3) {
    // Solve f_i L_i = A L_i + B - c1 f_i for (A, B, c1), limit = A.
    const double a11 = l1, a12 = 1.0, a13 = -f1, b1 = f1 * l1;
    const double a21 = l2, a22 = 1.0, a23 = -f2, b2 = f2 * l2;
    const double a31 = l3, a32 = 1.0, a33 = -f3, b3 = f3 * l3;
    const double det = a11 * (a22 * a33 - a23 * a32) - a12 * (a21 * a33 - a23 * a31) +
                       a13 * (a21 * a32 - a22 * a31);
    if (det == 0.0) return f3;
    const double detA = b1 * (a22 * a33 - a23 * a32) - a12 * (b2 * a33 - a23 * b3) +
                        a13 * (b2 * a32 - a22 * b3);
    return detA / det;
}

} // namespace detail

/// Cooperative gain limit lim R_co/R_s as transmit power (or the sample
/// count) grows without bound, evaluated by a geometric sweep with
/// rational extrapolation in the log of the swept parameter.
inline CoopGainResult coop_gain(const BoundConfig& cfg, GainLimit which,
                                double sweep_max = 1e9) {
    cfg.validate();
    if (!(sweep_max > 1.0)) throw std::invalid_argument("coop_gain: sweep_max must exceed 1");

    CoopGainResult result;
    if (cfg.relays == 0) {
        result.limit = 1.0;
        return result;
    }

    std::vector<double> logs;
    BoundConfig probe = cfg;
    constexpr int points = 7;
    const double sweep_min = 1e3;
    for (int i = 0; i < points; ++i) {
        const double value = sweep_min * std::pow(sweep_max / sweep_min,
                                                  static_cast<double>(i) /
                                                      static_cast<double>(points - 1));
        if (which == GainLimit::power)
            probe.power_p = value;
        else
            probe.n_samples = value;
        const double ratio = rate_mi_coop(probe) / rate_mi(probe);
        result.sweep_ratios.push_back(ratio);
        logs.push_back(std::log(value));
    }
    const std::size_t n = logs.size();
    result.limit = detail::extrapolate_moebius(logs[n - 5], result.sweep_ratios[n - 5],
                                               logs[n - 3], result.sweep_ratios[n - 3],
                                               logs[n - 1], result.sweep_ratios[n - 1]);
    return result;
}

/// Estimation-theoretic key-rate bound: P_QIA(q, CRB) * log2(q) / T_c.
inline double rate_crb(const BoundConfig& cfg) {
    cfg.validate();
    const double var = crb_phase_variance(cfg.snr_linear(),
                                          static_cast<std::size_t>(cfg.n_samples))
                           .var_theta_lower_bound;
    return p_qia(var, cfg.q) * std::log2(static_cast<double>(cfg.q)) / cfg.coherence_time_s;
}

/// Cooperative CRB-based rate with the shared per-node sample budget.
inline double rate_crb_coop(const BoundConfig& cfg) {
    cfg.validate();
    const std::size_t n_coop = static_cast<std::size_t>(cfg.coop_samples());
    const double var = crb_phase_variance(cfg.snr_linear(), n_coop).var_theta_lower_bound;
    return (static_cast<double>(cfg.relays) + 1.0) * p_qia(var, cfg.q) *
           std::log2(static_cast<double>(cfg.q)) / cfg.coherence_time_s;
}

/// Discrete argmax of the cooperative CRB rate over candidate quantizer
/// sizes (powers of two; Gray encoding constrains q to 2^n).
inline int optimal_q(const BoundConfig& cfg, std::span<const int> q_range) {
    if (q_range.empty()) throw std::invalid_argument("optimal_q: empty candidate range");
    int best_q = 0;
    double best_rate = -1.0;
    BoundConfig probe = cfg;
    for (int q : q_range) {
        if (q < 2 || !is_power_of_two(static_cast<std::size_t>(q)))
            throw std::invalid_argument("optimal_q: candidates must be powers of 2, >= 2");
        probe.q = q;
        const double r = rate_crb_coop(probe);
        if (r > best_rate) {
            best_rate = r;
            best_q = q;
        }
    }
    return best_q;
}

inline BoundReport make_bound_report(const BoundConfig& cfg) {
    BoundReport report;
    report.r_mi = rate_mi(cfg);
    report.r_mi_coop = rate_mi_coop(cfg);
    report.r_crb = rate_crb(cfg);
    report.r_crb_coop = rate_crb_coop(cfg);
    const std::size_t n_coop = static_cast<std::size_t>(cfg.coop_samples());
    report.p_qia =
        p_qia(crb_phase_variance(cfg.snr_linear(), n_coop).var_theta_lower_bound, cfg.q);
    report.coop_gain = coop_gain(cfg, GainLimit::power).limit;
    return report;
}

} // namespace phasekey
