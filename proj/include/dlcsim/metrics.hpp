#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlcsim/engine.hpp"
#include "dlcsim/netlist.hpp"
#include "dlcsim/topology.hpp"

namespace dlcsim {

/// Measurement testbench configuration. The defaults are the fixed bench:
/// 1.8 V rail, 800 mV reference, 100 MHz clock, 1 kOhm kickback source
/// resistance, 5 ns power ramps.
struct TestbenchSpec {
    double vdd = 1.8;
    double vref = 0.8;
    double f_clk = 1e8;
    double kickback_rsource = 1000.0;
    double ramp_s = 5e-9;       // power-ramp duration (up and again down)
    double c_load = 5e-15;      // explicit load on each output node
    double clk_edge_s = 100e-12;

    // Offset ramp: rising sweep span and per-period increment. A negative
    // stop means "ramp to vdd".
    double offset_ramp_start = 0.0;
    double offset_ramp_stop = -1.0;
    double offset_step_per_period = 10e-3;
    bool measure_hysteresis = true;

    // Input ramp length of the feedthrough bench, in clock periods per edge.
    int feedthrough_ramp_periods = 10;

    // Per-procedure maximum transient steps.
    double dt_delay = 5e-12;
    double dt_power = 10e-12;
    double dt_offset = 200e-12;
    double dt_kickback = 10e-12;
    double dt_feedthrough = 50e-12;

    double period() const { return 1.0 / f_clk; }
    double offset_stop() const { return offset_ramp_stop < 0.0 ? vdd : offset_ramp_stop; }
};

/// The six benchmark quantities for one topology. Unmeasured fields are NaN.
struct ComparatorMetrics {
    double avg_delay_s = std::numeric_limits<double>::quiet_NaN();
    double avg_power_w = std::numeric_limits<double>::quiet_NaN();
    double pdp_j = std::numeric_limits<double>::quiet_NaN();
    double offset_v = std::numeric_limits<double>::quiet_NaN();
    double clock_feedthrough_v = std::numeric_limits<double>::quiet_NaN();
    double kickback_v = std::numeric_limits<double>::quiet_NaN();

    double field(const std::string& name) const {
        if (name == "avg_delay_s") return avg_delay_s;
        if (name == "avg_power_w") return avg_power_w;
        if (name == "pdp_j") return pdp_j;
        if (name == "offset_v") return offset_v;
        if (name == "clock_feedthrough_v") return clock_feedthrough_v;
        if (name == "kickback_v") return kickback_v;
        throw Error("unknown metric field '" + name + "'");
    }

    static const std::vector<std::string>& field_names() {
        static const std::vector<std::string> names = {
            "avg_delay_s", "avg_power_w", "pdp_j", "offset_v", "clock_feedthrough_v",
            "kickback_v"};
        return names;
    }
};

struct DelayMeasurement {
    double tphl = 0.0;
    double tplh = 0.0;
    double avg = 0.0;
};

// ---------------------------------------------------------------------------
// Waveform post-processing
// ---------------------------------------------------------------------------

namespace detail {

/// Interpolated times at which a node crosses `level` in the given direction.
inline std::vector<double> crossings(const TransientResult& r, int col, double level,
                                     bool rising) {
    std::vector<double> out;
    for (std::size_t i = 1; i < r.times.size(); ++i) {
        const double v0 = r.node_voltages[i - 1][col];
        const double v1 = r.node_voltages[i][col];
        const bool crossed = rising ? (v0 < level && v1 >= level) : (v0 > level && v1 <= level);
        if (!crossed || v0 == v1) continue;
        const double t0 = r.times[i - 1], t1 = r.times[i];
        out.push_back(t0 + (t1 - t0) * (level - v0) / (v1 - v0));
    }
    return out;
}

inline double next_after(const std::vector<double>& v, double t) {
    for (double x : v)
        if (x > t) return x;
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// The five measurement procedures
// ---------------------------------------------------------------------------

/// tphl: clk rising through vdd/2 to vout falling through vdd/2. tplh: clk
/// falling to vout rising. The last complete clock cycle in the record is
/// used; crossings are found by linear interpolation.
inline DelayMeasurement measure_delay(const TransientResult& r, const std::string& clk_node,
                                      const std::string& vout_node, double vdd) {
    const int clk = r.node_column(clk_node);
    const int out = r.node_column(vout_node);
    const double mid = vdd / 2.0;
    const auto clk_rise = detail::crossings(r, clk, mid, true);
    const auto clk_fall = detail::crossings(r, clk, mid, false);
    const auto out_fall = detail::crossings(r, out, mid, false);
    const auto out_rise = detail::crossings(r, out, mid, true);

    auto last_pair = [](const std::vector<double>& starts, const std::vector<double>& stops,
                        const std::vector<double>& next_starts) {
        double best = std::numeric_limits<double>::quiet_NaN();
        for (double s : starts) {
            const double e = detail::next_after(stops, s);
            if (std::isnan(e)) continue;
            const double limit = detail::next_after(next_starts, s);
            if (!std::isnan(limit) && e > limit) continue;  // response after next edge
            best = e - s;
        }
        return best;
    };

    DelayMeasurement d;
    d.tphl = last_pair(clk_rise, out_fall, clk_fall);
    d.tplh = last_pair(clk_fall, out_rise, clk_rise);
    if (std::isnan(d.tphl) || std::isnan(d.tplh))
        throw MissingTransition("output never crossed vdd/2 after a clock edge on " + vout_node);
    d.avg = 0.5 * (d.tphl + d.tplh);
    return d;
}

/// Average power over [t0, t1] from the supply source current (current drawn
/// from the rail; the MNA branch current is negated). With the default
/// window, the last full clock period, this is exactly f_clk*V_DD*Q.
inline double measure_average_power(const TransientResult& r, const std::string& vdd_source,
                                    double vdd, double f_clk, double t0 = -1.0,
                                    double t1 = -1.0) {
    if (t1 < 0.0) {
        t1 = r.times.back();
        t0 = t1 - 1.0 / f_clk;
    }
    if (t0 < r.times.front() || t1 > r.times.back())
        throw Error("power window outside the simulated span");
    const double q = -supply_current_integral(r, vdd_source, t0, t1);
    return vdd * q / (t1 - t0);
}

/// Peak |v(node) - settled_level| over [t0, t1]: the disturbance coupled back
/// through the input source resistance.
inline double measure_kickback(const TransientResult& r, const std::string& node,
                               double settled_level, double t0, double t1) {
    const int col = r.node_column(node);
    double peak = 0.0;
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        if (r.times[i] < t0 || r.times[i] > t1) continue;
        peak = std::max(peak, std::fabs(r.node_voltages[i][col] - settled_level));
    }
    return peak;
}

/// Input-referred offset from a ramped input. Each evaluation phase samples
/// the decision just before the clock falls; the decision is attributed to
/// the input value at the clock edge that started the phase. The flip point
/// is the midpoint of the two bracketing inputs, minus vref. When a
/// complement node is given the decision is the differential sign, which
/// also covers latches that do not resolve rail to rail.
inline double measure_offset(const TransientResult& r, const std::string& vin_node, double vref,
                             const std::string& vout_node, const std::string& clk_node,
                             double vdd, double window_t0 = 0.0,
                             double window_t1 = std::numeric_limits<double>::infinity(),
                             double sample_lead_s = 100e-12,
                             const std::string& complement_node = "") {
    const int vin = r.node_column(vin_node);
    const int out = r.node_column(vout_node);
    const int alt = complement_node.empty() ? -1 : r.node_column(complement_node);
    const int clk = r.node_column(clk_node);
    const auto clk_rise = detail::crossings(r, clk, vdd / 2.0, true);
    const auto clk_fall = detail::crossings(r, clk, vdd / 2.0, false);

    std::vector<std::pair<double, bool>> samples;  // (vin at decision edge, decision)
    for (double tr : clk_rise) {
        const double tf = detail::next_after(clk_fall, tr);
        if (std::isnan(tf)) break;
        const double ts = tf - sample_lead_s;
        if (tr < window_t0 || tr > window_t1 || ts <= tr || ts < r.times.front()) continue;
        const double level = alt >= 0 ? r.voltage_at(alt, ts) : vdd / 2.0;
        const bool decision = r.voltage_at(out, ts) > level;
        samples.emplace_back(r.voltage_at(vin, tr), decision);
    }
    if (samples.size() < 2) throw NoDecisionFlip("not enough sampled decisions in the window");
    for (std::size_t k = 1; k < samples.size(); ++k) {
        if (samples[k].second != samples[0].second) {
            const double flip_at = 0.5 * (samples[k - 1].first + samples[k].first);
            return flip_at - vref;
        }
    }
    throw NoDecisionFlip("decision never flipped across the input ramp");
}

/// Max over time and outputs of (v_out - vdd), clamped at zero: the overshoot
/// coupled onto the outputs.
inline double measure_clock_feedthrough(const TransientResult& r,
                                        std::span<const std::string> vout_nodes, double vdd) {
    double peak = 0.0;
    for (const auto& node : vout_nodes) {
        const int col = r.node_column(node);
        for (const auto& row : r.node_voltages) peak = std::max(peak, row[col] - vdd);
    }
    return std::max(peak, 0.0);
}

// ---------------------------------------------------------------------------
// Testbench construction
// ---------------------------------------------------------------------------

namespace bench {

inline void attach_rails(Netlist& net, const TestbenchSpec& b) {
    net.devices.push_back(VSource{"VDD", "vdd", "0", Dc{b.vdd}});
    net.devices.push_back(
        VSource{"VCLK", "clk", "0", clock_pulse(b.vdd, b.f_clk, b.clk_edge_s)});
    if (b.c_load > 0.0) {
        net.devices.push_back(Capacitor{"CLN", "voutn", "0", b.c_load});
        net.devices.push_back(Capacitor{"CLP", "voutp", "0", b.c_load});
    }
}

/// Delay bench: V_in+ held at 1 V against the reference.
inline Netlist delay(const Netlist& bare, const TestbenchSpec& b, double vin_dc = 1.0) {
    Netlist net = bare;
    attach_rails(net, b);
    net.devices.push_back(VSource{"VIN", "vinp", "0", Dc{vin_dc}});
    net.devices.push_back(VSource{"VREF", "vref", "0", Dc{b.vref}});
    net.directives.push_back(Tran{3.2 * b.period(), b.dt_delay});
    return net;
}

/// Power bench: input ramped 0 -> vdd -> 0, one ramp per half period.
inline Netlist power(const Netlist& bare, const TestbenchSpec& b) {
    Netlist net = bare;
    attach_rails(net, b);
    Pwl ramp;
    ramp.points = {{0.0, 0.0}, {b.ramp_s, b.vdd}, {2.0 * b.ramp_s, 0.0}};
    net.devices.push_back(VSource{"VIN", "vinp", "0", ramp});
    net.devices.push_back(VSource{"VREF", "vref", "0", Dc{b.vref}});
    const double tstop = std::max(2.0 * b.ramp_s, b.period());
    net.directives.push_back(Tran{tstop, b.dt_power});
    return net;
}

/// Offset bench: input held for one period, then ramped up (and optionally
/// back down) by offset_step_per_period volts per clock period.
inline Netlist offset(const Netlist& bare, const TestbenchSpec& b, bool with_down_ramp) {
    Netlist net = bare;
    attach_rails(net, b);
    const double t_hold = b.period();
    const double span = b.offset_stop() - b.offset_ramp_start;
    const int n = std::max(1, static_cast<int>(std::ceil(span / b.offset_step_per_period)));
    const double t_ramp = n * b.period();
    Pwl ramp;
    ramp.points = {{0.0, b.offset_ramp_start},
                   {t_hold, b.offset_ramp_start},
                   {t_hold + t_ramp, b.offset_stop()}};
    double tstop = t_hold + t_ramp + b.period();
    if (with_down_ramp) {
        ramp.points.emplace_back(t_hold + 2.0 * t_ramp, b.offset_ramp_start);
        tstop = t_hold + 2.0 * t_ramp + b.period();
    }
    net.devices.push_back(VSource{"VIN", "vinp", "0", ramp});
    net.devices.push_back(VSource{"VREF", "vref", "0", Dc{b.vref}});
    net.directives.push_back(Tran{tstop, b.dt_offset});
    return net;
}

/// Kickback bench: both inputs driven through the source resistance; V_in+
/// steps 600 mV -> 1 V at the end of the first period.
inline Netlist kickback(const Netlist& bare, const TestbenchSpec& b) {
    Netlist net = bare;
    attach_rails(net, b);
    Pwl step;
    step.points = {{0.0, 0.6}, {b.period(), 0.6}, {b.period() + 1e-12, 1.0}};
    net.devices.push_back(VSource{"VINS", "vinp_s", "0", step});
    net.devices.push_back(Resistor{"RKB1", "vinp_s", "vinp", b.kickback_rsource});
    net.devices.push_back(VSource{"VREFS", "vref_s", "0", Dc{b.vref}});
    net.devices.push_back(Resistor{"RKB2", "vref_s", "vref", b.kickback_rsource});
    net.directives.push_back(Tran{2.5 * b.period(), b.dt_kickback});
    return net;
}

/// Step-refinement windows around every clock edge: the regeneration race
/// and the reset transient are fast compared to the settled phases, so long
/// benches keep a coarse base step and refine only here.
inline std::vector<DtWindow> clock_edge_windows(const TestbenchSpec& b, double tstop,
                                                double dt_fine = 10e-12) {
    std::vector<DtWindow> windows;
    const double period = b.period();
    const double eval_start = period / 2.0 - b.clk_edge_s;
    const double reset_start = period - b.clk_edge_s;
    for (int k = 0;; ++k) {
        const double base = k * period;
        if (base + eval_start >= tstop) break;
        windows.push_back({base + eval_start - 0.1e-9, base + eval_start + 1.1e-9, dt_fine});
        windows.push_back({base + reset_start - 0.1e-9, base + reset_start + 0.85e-9, dt_fine});
    }
    return windows;
}

/// Feedthrough bench: input ramped slowly 0 -> vdd -> 0 under a running clock.
inline Netlist feedthrough(const Netlist& bare, const TestbenchSpec& b) {
    Netlist net = bare;
    attach_rails(net, b);
    const double t_edge = b.feedthrough_ramp_periods * b.period();
    Pwl ramp;
    ramp.points = {{0.0, 0.0}, {t_edge, b.vdd}, {2.0 * t_edge, 0.0}};
    net.devices.push_back(VSource{"VIN", "vinp", "0", ramp});
    net.devices.push_back(VSource{"VREF", "vref", "0", Dc{b.vref}});
    net.directives.push_back(Tran{2.0 * t_edge, b.dt_feedthrough});
    return net;
}

}  // namespace bench

// ---------------------------------------------------------------------------
// End-to-end characterization
// ---------------------------------------------------------------------------

enum class Procedure : unsigned {
    Delay = 1u << 0,
    Power = 1u << 1,
    Offset = 1u << 2,
    Kickback = 1u << 3,
    Feedthrough = 1u << 4,
};

inline constexpr unsigned kAllProcedures = 0x1F;

inline unsigned procedure_mask_for_metric(const std::string& field) {
    if (field == "avg_delay_s") return static_cast<unsigned>(Procedure::Delay);
    if (field == "avg_power_w") return static_cast<unsigned>(Procedure::Power);
    if (field == "pdp_j")
        return static_cast<unsigned>(Procedure::Delay) | static_cast<unsigned>(Procedure::Power);
    if (field == "offset_v") return static_cast<unsigned>(Procedure::Offset);
    if (field == "clock_feedthrough_v") return static_cast<unsigned>(Procedure::Feedthrough);
    if (field == "kickback_v") return static_cast<unsigned>(Procedure::Kickback);
    throw Error("unknown metric field '" + field + "'");
}

struct CharacterizeResult {
    ComparatorMetrics metrics;
    double tphl_s = std::numeric_limits<double>::quiet_NaN();
    double tplh_s = std::numeric_limits<double>::quiet_NaN();
    double offset_signed_v = std::numeric_limits<double>::quiet_NaN();
    double offset_falling_v = std::numeric_limits<double>::quiet_NaN();
    double hysteresis_v = std::numeric_limits<double>::quiet_NaN();
    double kickback_pos_v = std::numeric_limits<double>::quiet_NaN();
    double kickback_neg_v = std::numeric_limits<double>::quiet_NaN();
    /// Procedure label -> error message for procedures that failed.
    std::vector<std::pair<std::string, std::string>> failures;

    bool ok() const { return failures.empty(); }
};

/// Run the measurement procedures selected by `mask` on a bare comparator
/// netlist. Failures are recorded per procedure; the remaining procedures
/// still run.
inline CharacterizeResult characterize_netlist(const Netlist& bare, const TestbenchSpec& b,
                                               const SolverOptions& opt,
                                               unsigned mask = kAllProcedures) {
    CharacterizeResult out;
    SolverOptions local = opt;
    local.dt_max = 0.0;  // per-bench .tran steps drive the grid

    auto guarded = [&](Procedure p, const char* label, auto&& fn) {
        if (!(mask & static_cast<unsigned>(p))) return;
        try {
            fn();
        } catch (const std::exception& e) {
            out.failures.emplace_back(label, e.what());
        }
    };

    guarded(Procedure::Delay, "delay", [&] {
        const TransientResult r = transient(bench::delay(bare, b), local);
        const DelayMeasurement d = measure_delay(r, "clk", "voutn", b.vdd);
        out.metrics.avg_delay_s = d.avg;
        out.tphl_s = d.tphl;
        out.tplh_s = d.tplh;
    });

    guarded(Procedure::Power, "power", [&] {
        const Netlist net = bench::power(bare, b);
        const TransientResult r = transient(net, local);
        const double tstop = net.tran_directive()->tstop_s;
        out.metrics.avg_power_w = measure_average_power(r, "VDD", b.vdd, b.f_clk, 0.0, tstop);
    });

    guarded(Procedure::Offset, "offset", [&] {
        const bool down = b.measure_hysteresis;
        const Netlist net = bench::offset(bare, b, down);
        SolverOptions refined = local;
        refined.dt_windows = bench::clock_edge_windows(b, net.tran_directive()->tstop_s);
        const TransientResult r = transient(net, refined);
        const double span = b.offset_stop() - b.offset_ramp_start;
        const int n = std::max(1, static_cast<int>(std::ceil(span / b.offset_step_per_period)));
        const double t0 = b.period();
        const double t1 = t0 + n * b.period();
        out.offset_signed_v = measure_offset(r, "vinp", b.vref, "voutp", "clk", b.vdd, t0, t1,
                                             b.clk_edge_s, "voutn");
        out.metrics.offset_v = std::fabs(out.offset_signed_v);
        if (down) {
            try {
                out.offset_falling_v =
                    measure_offset(r, "vinp", b.vref, "voutp", "clk", b.vdd, t1,
                                   t1 + n * b.period(), b.clk_edge_s, "voutn");
                out.hysteresis_v = out.offset_signed_v - out.offset_falling_v;
            } catch (const NoDecisionFlip&) {
                // diagnostic only
            }
        }
    });

    guarded(Procedure::Kickback, "kickback", [&] {
        const TransientResult r = transient(bench::kickback(bare, b), local);
        const double t0 = b.period() + 0.5e-9;
        const double t1 = 2.5 * b.period();
        out.kickback_pos_v = measure_kickback(r, "vinp", 1.0, t0, t1);
        out.kickback_neg_v = measure_kickback(r, "vref", b.vref, t0, t1);
        out.metrics.kickback_v = 0.5 * (out.kickback_pos_v + out.kickback_neg_v);
    });

    guarded(Procedure::Feedthrough, "feedthrough", [&] {
        const TransientResult r = transient(bench::feedthrough(bare, b), local);
        const std::string nodes[] = {"voutp", "voutn"};
        out.metrics.clock_feedthrough_v = measure_clock_feedthrough(r, nodes, b.vdd);
    });

    if (std::isfinite(out.metrics.avg_delay_s) && std::isfinite(out.metrics.avg_power_w))
        out.metrics.pdp_j = out.metrics.avg_delay_s * out.metrics.avg_power_w;
    return out;
}

/// Generate a topology and run the selected procedures, throwing on the first
/// labeled failure.
inline ComparatorMetrics characterize(TopologyId id, const TestbenchSpec& b,
                                      const SolverOptions& opt = {},
                                      unsigned mask = kAllProcedures) {
    const Netlist bare = generate_topology(id);
    CharacterizeResult r = characterize_netlist(bare, b, opt, mask);
    if (!r.ok())
        throw Error(std::string(topology_name(id)) + ": " + r.failures.front().first +
                    " procedure failed: " + r.failures.front().second);
    return r.metrics;
}

}  // namespace dlcsim
