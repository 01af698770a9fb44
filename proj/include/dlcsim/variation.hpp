#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <thread>
#include <vector>

#include "dlcsim/metrics.hpp"

namespace dlcsim {

/// Pelgrom-style mismatch amplitudes: per-device sigma scales with
/// 1/sqrt(W*L). Defaults are generic 180nm-class coefficients.
struct MismatchSpec {
    double a_vt = 5e-9;    // V*m  (5 mV*um)
    double a_beta = 1e-8;  // m    (1% * um)
    std::uint64_t seed = 0;
    int n_samples = 1;
    /// Restrict perturbation to these device names; empty means all MOSFETs.
    std::vector<std::string> devices;

    double sigma_vt(double w, double l) const { return a_vt / std::sqrt(w * l); }
    double sigma_beta(double w, double l) const { return a_beta / std::sqrt(w * l); }
};

/// Deterministic counter-based stream: (seed, stream) fully determines the
/// sequence, so samples can run in any order or thread.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) {
        state_ = mix(seed + 0x9E3779B97F4A7C15ull * (stream + 1));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in (0, 1].
    double uniform() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; platform-independent.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// Apply one Monte-Carlo draw to every selected MOSFET: each device gets its
/// own model card with vt0 shifted by dV_T and kp scaled by (1 + dbeta/beta).
inline void apply_mismatch(Netlist& net, const MismatchSpec& spec, std::uint64_t sample_index) {
    CounterRng rng(spec.seed, sample_index);
    for (auto& dev : net.devices) {
        auto* m = std::get_if<Mosfet>(&dev);
        if (!m) continue;
        if (!spec.devices.empty() &&
            std::find(spec.devices.begin(), spec.devices.end(), m->name) == spec.devices.end())
            continue;
        const double dvt = rng.normal() * spec.sigma_vt(m->width_m, m->length_m);
        const double dbeta = rng.normal() * spec.sigma_beta(m->width_m, m->length_m);
        ModelCard card = net.models.at(m->model);
        card.vt0 = std::max(1e-6, card.vt0 + dvt);
        card.kp = std::max(1e-12, card.kp * (1.0 + dbeta));
        const std::string name = m->model + "@" + m->name;
        net.models[name] = card;
        m->model = name;
    }
}

/// Sample list with summary statistics. Failed (censored) samples are kept
/// out of `samples` and counted in `n_failed`.
struct Distribution {
    std::vector<double> samples;       // successful values, in sample order
    std::vector<int> sample_indices;   // original index of each sample
    int n_requested = 0;
    int n_failed = 0;
    double mean = 0.0;
    double std_dev = 0.0;
    double min = 0.0;
    double max = 0.0;

    void finalize() {
        if (samples.empty()) {
            mean = std_dev = min = max = 0.0;
            return;
        }
        mean = std::accumulate(samples.begin(), samples.end(), 0.0) /
               static_cast<double>(samples.size());
        double ss = 0.0;
        for (double v : samples) ss += (v - mean) * (v - mean);
        std_dev = samples.size() > 1
                      ? std::sqrt(ss / static_cast<double>(samples.size() - 1))
                      : 0.0;
        auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
        min = *lo;
        max = *hi;
    }

    std::string to_csv() const {
        std::string out = "sample_index,value\n";
        char buf[48];
        for (std::size_t i = 0; i < samples.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%d,%.17g\n", sample_indices[i], samples[i]);
            out += buf;
        }
        return out;
    }

    /// Equal-width histogram over [min, max].
    std::pair<std::vector<double>, std::vector<int>> histogram(int bins) const {
        std::vector<double> edges;
        std::vector<int> counts(static_cast<std::size_t>(std::max(bins, 1)), 0);
        const double lo = min, hi = max;
        const double w = (hi - lo) / std::max(bins, 1);
        for (int i = 0; i <= std::max(bins, 1); ++i) edges.push_back(lo + i * w);
        for (double v : samples) {
            int b = w > 0.0 ? static_cast<int>((v - lo) / w) : 0;
            b = std::clamp(b, 0, std::max(bins, 1) - 1);
            counts[static_cast<std::size_t>(b)]++;
        }
        return {edges, counts};
    }
};

/// Monte-Carlo loop over mismatch draws. Reproducible: the same seed yields
/// the same Distribution regardless of thread count.
inline Distribution monte_carlo(TopologyId topology, const TestbenchSpec& bench,
                                const MismatchSpec& spec, const std::string& metric,
                                const SolverOptions& opt = {}, int n_threads = 0) {
    if (spec.n_samples < 1) throw Error("n_samples must be at least 1");
    const unsigned mask = procedure_mask_for_metric(metric);
    const Netlist bare = generate_topology(topology);

    const int n = spec.n_samples;
    std::vector<double> values(static_cast<std::size_t>(n),
                               std::numeric_limits<double>::quiet_NaN());
    std::vector<char> failed(static_cast<std::size_t>(n), 0);

    auto worker = [&](int begin, int stride) {
        for (int i = begin; i < n; i += stride) {
            Netlist net = bare;
            apply_mismatch(net, spec, static_cast<std::uint64_t>(i));
            const CharacterizeResult r = characterize_netlist(net, bench, opt, mask);
            const double v = r.metrics.field(metric);
            if (!r.ok() || !std::isfinite(v))
                failed[static_cast<std::size_t>(i)] = 1;
            else
                values[static_cast<std::size_t>(i)] = v;
        }
    };

    int threads = n_threads > 0 ? n_threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, n);
    if (threads == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker, t, threads);
        for (auto& th : pool) th.join();
    }

    Distribution dist;
    dist.n_requested = n;
    for (int i = 0; i < n; ++i) {
        if (failed[static_cast<std::size_t>(i)]) {
            dist.n_failed++;
        } else {
            dist.samples.push_back(values[static_cast<std::size_t>(i)]);
            dist.sample_indices.push_back(i);
        }
    }
    dist.finalize();
    return dist;
}

/// One process corner: multiplicative kp scaling and additive vt0 offsets
/// per polarity. TT is the identity.
struct Corner {
    std::string name = "TT";
    struct Scale {
        double kp_mult = 1.0;
        double vt0_offset = 0.0;
    };
    Scale nmos;
    Scale pmos;
};

/// TT/FF/SS/FS/SF with +-10% kp and -+10% vt0 offsets relative to the
/// generic 0.45 V threshold.
inline std::vector<Corner> default_corners() {
    constexpr double dvt = 0.045;
    auto fast = Corner::Scale{1.1, -dvt};
    auto slow = Corner::Scale{0.9, +dvt};
    return {
        Corner{"TT", {}, {}},
        Corner{"FF", fast, fast},
        Corner{"SS", slow, slow},
        Corner{"FS", fast, slow},
        Corner{"SF", slow, fast},
    };
}

inline void apply_corner(Netlist& net, const Corner& corner) {
    for (auto& [name, card] : net.models) {
        const auto& s = card.polarity == Polarity::Nmos ? corner.nmos : corner.pmos;
        card.kp *= s.kp_mult;
        card.vt0 = std::max(1e-6, card.vt0 + s.vt0_offset);
    }
}

/// Characterize once per corner, in input order.
inline std::vector<std::pair<Corner, CharacterizeResult>> corners(
    TopologyId topology, const TestbenchSpec& bench, std::span<const Corner> corner_set,
    const SolverOptions& opt = {}, unsigned mask = kAllProcedures) {
    const Netlist bare = generate_topology(topology);
    std::vector<std::pair<Corner, CharacterizeResult>> out;
    for (const auto& c : corner_set) {
        Netlist net = bare;
        apply_corner(net, c);
        out.emplace_back(c, characterize_netlist(net, bench, opt, mask));
    }
    return out;
}

/// Parameter path for sweeps: "<device>.<w|l>", "<model>.<field>", or
/// "bench.<field>".
inline std::vector<std::pair<double, CharacterizeResult>> sweep(
    TopologyId topology, const TestbenchSpec& bench, const std::string& param_path,
    std::span<const double> values, const SolverOptions& opt = {},
    unsigned mask = kAllProcedures) {
    const Netlist bare = generate_topology(topology);
    const auto dot = param_path.find('.');
    if (dot == std::string::npos)
        throw Error("parameter path must look like device.w, model.kp or bench.vref");
    const std::string head = param_path.substr(0, dot);
    std::string field = param_path.substr(dot + 1);
    for (char& c : field) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));

    auto apply = [&](Netlist& net, TestbenchSpec& b, double v) {
        if (head == "bench") {
            if (field == "vdd") b.vdd = v;
            else if (field == "vref") b.vref = v;
            else if (field == "f_clk") b.f_clk = v;
            else if (field == "c_load") b.c_load = v;
            else if (field == "kickback_rsource") b.kickback_rsource = v;
            else if (field == "ramp_s") b.ramp_s = v;
            else throw Error("unknown bench field '" + field + "'");
            return;
        }
        if (Device* dev = net.find_device(head)) {
            auto* m = std::get_if<Mosfet>(dev);
            if (!m) throw Error("swept device '" + head + "' is not a MOSFET");
            if (field == "w") m->width_m = v;
            else if (field == "l") m->length_m = v;
            else throw Error("unknown device dimension '" + field + "'");
            return;
        }
        auto it = net.models.find(detail::to_lower(head));
        if (it == net.models.end())
            throw Error("unknown sweep target '" + head + "'");
        ModelCard& card = it->second;
        if (field == "vt0") card.vt0 = v;
        else if (field == "kp") card.kp = v;
        else if (field == "lambda") card.lambda = v;
        else if (field == "cgso") card.cgso = v;
        else if (field == "cgdo") card.cgdo = v;
        else if (field == "cox") card.cox = v;
        else throw Error("unknown model field '" + field + "'");
    };

    std::vector<std::pair<double, CharacterizeResult>> out;
    for (double v : values) {
        Netlist net = bare;
        TestbenchSpec b = bench;
        apply(net, b, v);
        out.emplace_back(v, characterize_netlist(net, b, opt, mask));
    }
    return out;
}

}  // namespace dlcsim
