#pragma once

#include <optional>
#include <span>
#include <string>

#include "dlcsim/netlist.hpp"

namespace dlcsim {

/// The five comparator topologies. Connectivity conventions are documented
/// in docs/topologies.md.
enum class TopologyId {
    Csdlc,
    Msadlc,
    Design1Cascode,
    Design2PseudoNmos,
    Design3CascodePseudoNmos,
};

inline constexpr TopologyId kAllTopologies[] = {
    TopologyId::Csdlc,
    TopologyId::Msadlc,
    TopologyId::Design1Cascode,
    TopologyId::Design2PseudoNmos,
    TopologyId::Design3CascodePseudoNmos,
};

inline const char* topology_name(TopologyId id) {
    switch (id) {
        case TopologyId::Csdlc: return "csdlc";
        case TopologyId::Msadlc: return "msadlc";
        case TopologyId::Design1Cascode: return "design1";
        case TopologyId::Design2PseudoNmos: return "design2";
        case TopologyId::Design3CascodePseudoNmos: return "design3";
    }
    return "?";
}

inline const char* topology_display_name(TopologyId id) {
    switch (id) {
        case TopologyId::Csdlc: return "CSDLC";
        case TopologyId::Msadlc: return "MSADLC";
        case TopologyId::Design1Cascode: return "Design-1: cascode";
        case TopologyId::Design2PseudoNmos: return "Design-2: pseudo-NMOS";
        case TopologyId::Design3CascodePseudoNmos: return "Design-3: cascode + pseudo-NMOS";
    }
    return "?";
}

inline std::optional<TopologyId> topology_from_string(std::string_view name) {
    for (TopologyId id : kAllTopologies)
        if (name == topology_name(id)) return id;
    return std::nullopt;
}

/// Replaces the W/L of one named device in a generated topology.
struct SizingOverride {
    std::string device;
    double width_m = 0.0;
    double length_m = 0.0;
};

/// Stimulus values used when a testbench is instantiated alongside the bare
/// topology: 1.8 V rail, 800 mV reference, 100 MHz clock.
struct TestbenchStimulus {
    double vdd = 1.8;
    double vref = 0.8;
    double f_clk = 1e8;
    double vin_dc = 1.0;
    double clk_edge_s = 100e-12;
};

namespace detail {

struct TopologyBuilder {
    Netlist net;

    void mos(const char* name, const char* d, const char* g, const char* s, const char* b,
             const char* model, double w) {
        net.devices.push_back(Mosfet{name, d, g, s, b, model, w, 180e-9});
    }

    void finish_models() {
        net.models["nmos"] = ModelCard::nmos_default();
        net.models["pmos"] = ModelCard::pmos_default();
    }
};

}  // namespace detail

/// Clock pulse with the reset phase first: low for the first half period,
/// high for the second.
inline Pulse clock_pulse(double vdd, double f_clk, double edge_s) {
    const double period = 1.0 / f_clk;
    Pulse p;
    p.v1 = 0.0;
    p.v2 = vdd;
    p.delay_s = period / 2.0 - edge_s;
    p.rise_s = edge_s;
    p.fall_s = edge_s;
    p.width_s = period / 2.0 - edge_s;
    p.period_s = period;
    return p;
}

/// Build one of the five comparator topologies with the default sizing.
/// When `bench` is given, the fixed stimulus set (VDD, VCLK, VIN, VREF) and a
/// three-period `.tran` card are added; otherwise the bare circuit is
/// returned for sweeps and custom benches.
inline Netlist generate_topology(TopologyId id, std::span<const SizingOverride> overrides = {},
                                 const TestbenchStimulus* bench = nullptr) {
    constexpr double wn = 720e-9;   // unit NMOS
    constexpr double wp = 1.13e-6;  // wide PMOS (reset, latch pull-up, strong driver)

    detail::TopologyBuilder b;
    b.net.title = std::string(topology_name(id)) + " comparator (generated)";

    switch (id) {
        case TopologyId::Csdlc:
            // Dynamic latch: the input pair discharges x/y, the cross-coupled
            // NMOS pair regenerates onto dynamically held outputs, and the
            // charge-sharing equalizer shorts the outputs during reset.
            b.mos("M1", "x", "vinp", "tail", "0", "nmos", wn);
            b.mos("M2", "y", "vref", "tail", "0", "nmos", wn);
            b.mos("M3", "voutn", "voutp", "x", "0", "nmos", wn);
            b.mos("M4", "voutp", "voutn", "y", "0", "nmos", wn);
            b.mos("M5", "tail", "clk", "0", "0", "nmos", wn);
            b.mos("M6", "voutn", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M7", "voutp", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M8", "voutn", "clk", "voutp", "vdd", "pmos", wp);
            break;

        case TopologyId::Msadlc:
            // StrongARM latch: clocked tail, input pair into p/q, cross-coupled
            // inverters on the outputs, output reset and internal precharge.
            b.mos("M1", "p", "vinp", "tail", "0", "nmos", wn);
            b.mos("M2", "q", "vref", "tail", "0", "nmos", wn);
            b.mos("M3", "p", "clk", "vdd", "vdd", "pmos", wn);
            b.mos("M4", "q", "clk", "vdd", "vdd", "pmos", wn);
            b.mos("M5", "tail", "clk", "0", "0", "nmos", wn);
            b.mos("M6", "voutn", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M7", "voutp", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M8", "voutn", "voutp", "vdd", "vdd", "pmos", wp);
            b.mos("M9", "voutn", "voutp", "p", "0", "nmos", wp);
            b.mos("M10", "voutp", "voutn", "q", "0", "nmos", wp);
            b.mos("M11", "voutp", "voutn", "vdd", "vdd", "pmos", wp);
            break;

        case TopologyId::Design1Cascode:
            // MSADLC with clk-gated cascodes M12/M13 above the input pair,
            // their drains on the latch nodes, and the input applied at both
            // stack levels: M1 (through the cascode) and M3 together
            // discharge Vout-, M2/M4 mirror onto Vout+. The full-CMOS latch
            // sinks into the shared clocked tail and resolves rail to rail
            // up to the small reference-side ratioed drop.
            b.mos("M1", "p", "vinp", "tail", "0", "nmos", wn);
            b.mos("M2", "q", "vref", "tail", "0", "nmos", wn);
            b.mos("M3", "voutn", "vinp", "tail", "0", "nmos", wn);
            b.mos("M4", "voutp", "vref", "tail", "0", "nmos", wn);
            b.mos("M5", "tail", "clk", "0", "0", "nmos", wn);
            b.mos("M6", "voutn", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M7", "voutp", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M8", "voutn", "voutp", "vdd", "vdd", "pmos", wp);
            b.mos("M9", "voutn", "voutp", "tail", "0", "nmos", wn);
            b.mos("M10", "voutp", "voutn", "tail", "0", "nmos", wn);
            b.mos("M11", "voutp", "voutn", "vdd", "vdd", "pmos", wp);
            b.mos("M12", "voutn", "clk", "p", "0", "nmos", wn);
            b.mos("M13", "voutp", "clk", "q", "0", "nmos", wn);
            break;

        case TopologyId::Design2PseudoNmos:
            // Pseudo-NMOS latch: NMOS drivers M8/M11 sinking into the shared
            // clocked tail, grounded-gate PMOS loads M9/M10, and clk-gated
            // common-gate cascodes M3/M4 above the input pair. M6/M7
            // precharge p/q to the rail, so cascode conduction each
            // evaluation starts balanced and tracks the input split of p/q;
            // the outputs reset through the always-on loads once the tail
            // floats.
            b.mos("M1", "p", "vinp", "tail", "0", "nmos", wn);
            b.mos("M2", "q", "vref", "tail", "0", "nmos", wn);
            b.mos("M3", "voutn", "clk", "p", "0", "nmos", wn);
            b.mos("M4", "voutp", "clk", "q", "0", "nmos", wn);
            b.mos("M5", "tail", "clk", "0", "0", "nmos", wn);
            b.mos("M6", "p", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M7", "q", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M8", "voutn", "voutp", "tail", "0", "nmos", wp);
            b.mos("M9", "voutn", "0", "vdd", "vdd", "pmos", 240e-9);
            b.mos("M10", "voutp", "0", "vdd", "vdd", "pmos", 240e-9);
            b.mos("M11", "voutp", "voutn", "tail", "0", "nmos", wp);
            break;

        case TopologyId::Design3CascodePseudoNmos:
            // Cascode front end plus the pseudo-NMOS latch, with the input
            // applied twice: the main pair M1/M2 drives the outputs through
            // the cross-gated cascodes M13/M14, and the auxiliary pair M3/M4
            // injects directly at the latch nodes in parallel with the
            // drivers. M12 equalizes the cascode source nodes during reset.
            b.mos("M1", "p", "vinp", "tail", "0", "nmos", wn);
            b.mos("M2", "q", "vref", "tail", "0", "nmos", wn);
            b.mos("M3", "voutn", "vinp", "tail", "0", "nmos", wn);
            b.mos("M4", "voutp", "vref", "tail", "0", "nmos", wn);
            b.mos("M5", "tail", "clk", "0", "0", "nmos", wn);
            b.mos("M6", "voutn", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M7", "voutp", "clk", "vdd", "vdd", "pmos", wp);
            b.mos("M8", "voutn", "voutp", "tail", "0", "nmos", wp);
            b.mos("M9", "voutp", "voutn", "tail", "0", "nmos", wp);
            b.mos("M10", "voutn", "0", "vdd", "vdd", "pmos", 360e-9);
            b.mos("M11", "voutp", "0", "vdd", "vdd", "pmos", 360e-9);
            b.mos("M12", "p", "clk", "q", "vdd", "pmos", wn);
            b.mos("M13", "voutn", "q", "p", "0", "nmos", wn);
            b.mos("M14", "voutp", "p", "q", "0", "nmos", wn);
            break;

        default:
            throw Error("unknown topology id");
    }

    b.finish_models();

    for (const auto& ov : overrides) {
        Device* dev = b.net.find_device(ov.device);
        if (!dev) throw Error("sizing override references unknown device '" + ov.device + "'");
        auto* m = std::get_if<Mosfet>(dev);
        if (!m) throw Error("sizing override target '" + ov.device + "' is not a MOSFET");
        m->width_m = ov.width_m;
        m->length_m = ov.length_m;
    }

    if (bench) {
        b.net.devices.push_back(VSource{"VDD", "vdd", "0", Dc{bench->vdd}});
        b.net.devices.push_back(
            VSource{"VCLK", "clk", "0", clock_pulse(bench->vdd, bench->f_clk, bench->clk_edge_s)});
        b.net.devices.push_back(VSource{"VIN", "vinp", "0", Dc{bench->vin_dc}});
        b.net.devices.push_back(VSource{"VREF", "vref", "0", Dc{bench->vref}});
        const double period = 1.0 / bench->f_clk;
        b.net.directives.push_back(Tran{3.0 * period, period / 1000.0});
    }

    b.net.validate();
    return b.net;
}

/// Number of MOSFETs in the documented reconstruction of each topology.
inline int topology_mosfet_count(TopologyId id) {
    switch (id) {
        case TopologyId::Csdlc: return 8;
        case TopologyId::Msadlc: return 11;
        case TopologyId::Design1Cascode: return 13;
        case TopologyId::Design2PseudoNmos: return 11;
        case TopologyId::Design3CascodePseudoNmos: return 14;
    }
    return 0;
}

}  // namespace dlcsim
