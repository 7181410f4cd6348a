#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "phasekey/bounds.hpp"
#include "phasekey/protocol.hpp"
#include "phasekey/randomness_tests.hpp"
#include "phasekey/reconciliation.hpp"

namespace phasekey {

/// Deterministic parallel map: fn(i) must write only to its own slot.
/// Exceptions from workers are rethrown on the calling thread.
inline void parallel_for(std::size_t count, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

enum class ExperimentId {
    bounds_vs_to,
    bounds_vs_n,
    rate_vs_q,
    ber_vs_q,
    ber_vs_to,
    rate_vs_n_sim,
    nist_table,
    e2e_keygen,
};

inline const std::vector<std::pair<std::string, ExperimentId>>& experiment_names() {
    static const std::vector<std::pair<std::string, ExperimentId>> names = {
        {"bounds_vs_To", ExperimentId::bounds_vs_to},
        {"bounds_vs_N", ExperimentId::bounds_vs_n},
        {"rate_vs_q", ExperimentId::rate_vs_q},
        {"ber_vs_q", ExperimentId::ber_vs_q},
        {"ber_vs_To", ExperimentId::ber_vs_to},
        {"rate_vs_N_sim", ExperimentId::rate_vs_n_sim},
        {"nist_table", ExperimentId::nist_table},
        {"e2e_keygen", ExperimentId::e2e_keygen},
    };
    return names;
}

inline std::string to_string(ExperimentId id) {
    for (const auto& [name, eid] : experiment_names())
        if (eid == id) return name;
    throw std::logic_error("unknown experiment id");
}

inline ExperimentId parse_experiment(const std::string& name) {
    for (const auto& [n, eid] : experiment_names())
        if (n == name) return eid;
    throw std::invalid_argument("unknown experiment '" + name + "'");
}

/// Full description of one experiment run. Physical defaults are the
/// desk-scale baseline: carrier scaled down by 1e-3 with fs/fc = 3 kept,
/// which leaves every quantity the estimator statistics depend on (SNR and
/// N_s) untouched.
struct ExperimentConfig {
    ExperimentId id = ExperimentId::bounds_vs_to;
    std::uint64_t seed = 1;
    std::size_t trials = 0; // 0: per-experiment default
    std::string out_dir = "results";
    unsigned threads = 0;

    double fc_hz = 0.9e6;
    double fs_hz = 2.7e6;
    double tc_s = 0.014;
    double sigma_h2 = 0.5;
    double power_p = 1.0;
    double delay_spread_s = 1.2e-6;
    double tau_max_s = 33.3e-9;

    double snr_db = 25.0;
    std::vector<double> snr_db_list{15.0, 20.0, 25.0};
    double to_s = 0.0;              // 0: derive from n_samples
    std::vector<double> to_list_s;  // default filled per experiment
    std::size_t n_samples = 2025;
    int q = 16;
    std::vector<int> q_list{4, 16, 64};
    int relays = 1;
    std::vector<int> n_list{1, 2, 3, 4, 5, 6, 7, 8};
    int key_bits = 1024;
    int sequences = 10;
    int sequence_bits = 10000;
    std::string code_id = "bch(31,16,3)";
    bool fading = true;       // draw Rayleigh amplitudes in pairwise benchmarks
    bool store_trace = false;
    std::size_t budget_samples = 100000;

    double amplitude_a() const { return std::sqrt(2.0 * power_p); }
    double guard_s() const { return delay_spread_s + tau_max_s; }
    double snr_linear() const { return db_to_linear(snr_db); }

    std::size_t samples_for(double to) const {
        return static_cast<std::size_t>(std::floor(to * fs_hz));
    }

    double observation_time_s() const {
        return to_s > 0.0 ? to_s : static_cast<double>(n_samples) / fs_hz;
    }

    BeaconSpec beacon() const {
        return BeaconSpec(amplitude_a(), fc_hz, observation_time_s(), fs_hz);
    }

    ChannelParams channel() const { return ChannelParams(sigma_h2, tc_s); }

    double sigma2() const { return snr_to_sigma2(beacon(), sigma_h2, snr_linear()); }

    BoundConfig bound_config(int relay_count, int q_levels, double samples,
                             double snr_lin) const {
        BoundConfig cfg;
        cfg.sigma_h2 = sigma_h2;
        cfg.sigma2 = 2.0 * sigma_h2 * power_p / snr_lin;
        cfg.power_p = power_p;
        cfg.n_samples = samples;
        cfg.coherence_time_s = tc_s;
        cfg.relays = relay_count;
        cfg.q = q_levels;
        return cfg;
    }

    SessionConfig session_config() const {
        SessionConfig cfg(beacon(), channel());
        cfg.relays = relays;
        cfg.q = q;
        cfg.target_key_bits = key_bits;
        cfg.sigma2 = sigma2();
        cfg.guard_time_s = guard_s();
        return cfg;
    }

    void validate() const {
        if (!(fc_hz > 0.0) || !(fs_hz > 2.0 * fc_hz))
            throw std::invalid_argument("config: need fs > 2 fc > 0");
        if (!(tc_s > 0.0) || !(sigma_h2 > 0.0) || !(power_p > 0.0))
            throw std::invalid_argument("config: physical parameters must be positive");
        if (q_list.empty() || n_list.empty() || snr_db_list.empty())
            throw std::invalid_argument("config: parameter grids must be non-empty");
        if (n_samples < 16) throw std::invalid_argument("config: n_samples must be >= 16");
        if (sequences < 1 || sequence_bits < 100)
            throw std::invalid_argument("config: sequences >= 1, sequence_bits >= 100");
    }

    /// Sorted key=value view, the basis for the manifest and config hash.
    std::string canonical() const;

    void set(const std::string& key, const std::string& value);
};

namespace detail {

inline std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(trim(item));
    return out;
}

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

template <typename T>
std::string join_list(const std::vector<T>& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) s += ",";
        if constexpr (std::is_same_v<T, double>)
            s += format_double(xs[i]);
        else
            s += std::to_string(xs[i]);
    }
    return s;
}

inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace detail

inline void ExperimentConfig::set(const std::string& key, const std::string& value) {
    const auto as_double = [&] { return std::stod(value); };
    const auto as_int = [&] { return std::stoi(value); };
    const auto as_double_list = [&] {
        std::vector<double> out;
        for (const auto& item : detail::split_list(value)) out.push_back(std::stod(item));
        return out;
    };
    const auto as_int_list = [&] {
        std::vector<int> out;
        for (const auto& item : detail::split_list(value)) out.push_back(std::stoi(item));
        return out;
    };

    if (key == "experiment") id = parse_experiment(value);
    else if (key == "seed") seed = std::stoull(value);
    else if (key == "trials") trials = std::stoull(value);
    else if (key == "out") out_dir = value;
    else if (key == "threads") threads = static_cast<unsigned>(std::stoul(value));
    else if (key == "fc_hz") fc_hz = as_double();
    else if (key == "fs_hz") fs_hz = as_double();
    else if (key == "tc_s") tc_s = as_double();
    else if (key == "sigma_h2") sigma_h2 = as_double();
    else if (key == "power_p") power_p = as_double();
    else if (key == "delay_spread_s") delay_spread_s = as_double();
    else if (key == "tau_max_s") tau_max_s = as_double();
    else if (key == "snr_db") snr_db = as_double();
    else if (key == "snr_db_list") snr_db_list = as_double_list();
    else if (key == "to_s") to_s = as_double();
    else if (key == "to_list_s") to_list_s = as_double_list();
    else if (key == "n_samples") n_samples = std::stoull(value);
    else if (key == "q") q = as_int();
    else if (key == "q_list") q_list = as_int_list();
    else if (key == "relays") relays = as_int();
    else if (key == "n_list") n_list = as_int_list();
    else if (key == "key_bits") key_bits = as_int();
    else if (key == "sequences") sequences = as_int();
    else if (key == "sequence_bits") sequence_bits = as_int();
    else if (key == "code") code_id = value;
    else if (key == "fading") fading = as_int() != 0;
    else if (key == "store_trace") store_trace = as_int() != 0;
    else if (key == "budget_samples") budget_samples = std::stoull(value);
    else throw std::invalid_argument("config: unknown key '" + key + "'");
}

inline std::string ExperimentConfig::canonical() const {
    std::map<std::string, std::string> kv;
    kv["experiment"] = to_string(id);
    kv["seed"] = std::to_string(seed);
    kv["trials"] = std::to_string(trials);
    kv["out"] = out_dir;
    kv["threads"] = std::to_string(threads);
    kv["fc_hz"] = detail::format_double(fc_hz);
    kv["fs_hz"] = detail::format_double(fs_hz);
    kv["tc_s"] = detail::format_double(tc_s);
    kv["sigma_h2"] = detail::format_double(sigma_h2);
    kv["power_p"] = detail::format_double(power_p);
    kv["delay_spread_s"] = detail::format_double(delay_spread_s);
    kv["tau_max_s"] = detail::format_double(tau_max_s);
    kv["snr_db"] = detail::format_double(snr_db);
    kv["snr_db_list"] = detail::join_list(snr_db_list);
    kv["to_s"] = detail::format_double(to_s);
    kv["to_list_s"] = detail::join_list(to_list_s);
    kv["n_samples"] = std::to_string(n_samples);
    kv["q"] = std::to_string(q);
    kv["q_list"] = detail::join_list(q_list);
    kv["relays"] = std::to_string(relays);
    kv["n_list"] = detail::join_list(n_list);
    kv["key_bits"] = std::to_string(key_bits);
    kv["sequences"] = std::to_string(sequences);
    kv["sequence_bits"] = std::to_string(sequence_bits);
    kv["code"] = code_id;
    kv["fading"] = fading ? "1" : "0";
    kv["store_trace"] = store_trace ? "1" : "0";
    kv["budget_samples"] = std::to_string(budget_samples);
    std::string s;
    for (const auto& [k, v] : kv) s += k + "=" + v + "\n";
    return s;
}

/// Applies a line-oriented key=value file; '#' starts a comment. Unknown
/// keys are rejected.
inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: line " + std::to_string(line_no) +
                                        " is not key=value");
        cfg.set(detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
}

/// Default experiment configuration with per-experiment grid defaults.
inline ExperimentConfig default_config(ExperimentId id) {
    ExperimentConfig cfg;
    cfg.id = id;
    switch (id) {
        case ExperimentId::bounds_vs_to:
            cfg.to_list_s = {0.0005, 0.001, 0.0015, 0.002, 0.0025, 0.003,
                             0.004,  0.005, 0.006,  0.007};
            cfg.n_list = {0, 1, 2, 4, 8};
            break;
        case ExperimentId::bounds_vs_n: {
            cfg.n_samples = 18900; // Tc * fs / 2
            cfg.n_list.clear();
            for (int n = 0; n <= 64; n += 2) cfg.n_list.push_back(n);
            break;
        }
        case ExperimentId::rate_vs_q: {
            cfg.trials = 2000;
            cfg.n_samples = 2025;
            cfg.q_list.clear();
            for (int e = 1; e <= 16; ++e) cfg.q_list.push_back(1 << e);
            cfg.fading = false;
            break;
        }
        case ExperimentId::ber_vs_q:
            cfg.trials = 20000;
            cfg.n_samples = 2025;
            cfg.q_list = {2, 4, 8, 16, 32, 64, 128, 256};
            cfg.fading = false;
            break;
        case ExperimentId::ber_vs_to:
            cfg.trials = 20000;
            cfg.q = 16;
            // windows kept short enough that the error rates stay resolvable
            // at the default trial count
            cfg.to_list_s = {2.5e-5, 5e-5, 1e-4, 2e-4, 4e-4, 8e-4, 1.5e-3};
            cfg.fading = false;
            break;
        case ExperimentId::rate_vs_n_sim:
            cfg.trials = 400; // rounds per relay count
            cfg.n_samples = 2025;
            cfg.q = 16;
            break;
        case ExperimentId::nist_table:
            cfg.q = 256;
            cfg.n_samples = 128;
            cfg.relays = 1;
            break;
        case ExperimentId::e2e_keygen:
            cfg.trials = 20; // sessions
            cfg.relays = 2;
            cfg.q = 16;
            cfg.key_bits = 1024;
            cfg.n_samples = 2025;
            break;
    }
    return cfg;
}

/// Rescales carrier and sampling rate to a desk-friendly regime while
/// preserving fs/fc, the SNR and the sample count (capped by the sample
/// budget), which are the quantities the estimator statistics and both
/// bounds depend on.
inline ExperimentConfig scale_config(const ExperimentConfig& paper_scale,
                                     std::size_t budget_samples, double scale = 1e-3) {
    if (budget_samples < 16)
        throw std::invalid_argument("scale_config: budget cannot honor 16-sample windows");
    ExperimentConfig cfg = paper_scale;
    const double ratio = paper_scale.fs_hz / paper_scale.fc_hz;
    cfg.fs_hz = paper_scale.fs_hz * scale;
    cfg.fc_hz = cfg.fs_hz / ratio;
    std::size_t samples = paper_scale.n_samples;
    if (paper_scale.to_s > 0.0) samples = paper_scale.samples_for(paper_scale.to_s);
    cfg.n_samples = std::min(samples, budget_samples);
    cfg.to_s = 0.0; // derive the window from n_samples at the new rate
    cfg.budget_samples = budget_samples;
    return cfg;
}

struct ResultRow {
    std::vector<std::pair<std::string, std::string>> params;
    std::string metric;
    double value = 0.0;
    double std_error = 0.0;
    std::size_t trials = 0;
};

struct ExperimentResult {
    std::vector<ResultRow> rows;
    std::string csv_path;
    std::string manifest_path;
    std::vector<std::string> extra_files;
};

namespace detail {

inline void write_rows_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    if (rows.empty()) {
        os << "metric,value,std_error,trials\n";
        return;
    }
    for (const auto& [name, _] : rows.front().params) os << name << ",";
    os << "metric,value,std_error,trials\n";
    for (const auto& row : rows) {
        for (const auto& [_, value] : row.params) os << value << ",";
        os << row.metric << "," << format_double(row.value) << ","
           << format_double(row.std_error) << "," << row.trials << "\n";
    }
}

inline std::string library_version() { return "phasekey 0.1.0"; }

} // namespace detail

} // namespace phasekey
