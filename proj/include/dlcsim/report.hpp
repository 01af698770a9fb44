#pragma once

#include <cmath>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "dlcsim/metrics.hpp"
#include "dlcsim/topology.hpp"
#include "dlcsim/variation.hpp"

namespace dlcsim {

// ---------------------------------------------------------------------------
// Published reference dataset
// ---------------------------------------------------------------------------

/// Reference measurements for the five topologies, in display units. These
/// come from the original 180nm characterization of the designs and are kept
/// separate from anything this toolkit simulates.
struct ReferenceRow {
    TopologyId topology;
    double delay_ps;
    double power_uw;
    double pdp_fj;
    double offset_mv;
    double feedthrough_v;
    double kickback_v;
};

inline const std::vector<ReferenceRow>& reference_rows() {
    static const std::vector<ReferenceRow> rows = {
        {TopologyId::Csdlc, 178.1, 18.0, 3.2, 63.0, 0.045, 0.21},
        {TopologyId::Msadlc, 93.4, 4.72, 0.44, 6.0, 0.097, 0.005},
        {TopologyId::Design1Cascode, 62.15, 4.31, 0.26, 2.73, 0.097, 0.005},
        {TopologyId::Design2PseudoNmos, 85.6, 35.07, 3.0, 2.97, 0.086, 0.012},
        {TopologyId::Design3CascodePseudoNmos, 62.84, 4.08, 0.25, 2.7, 0.092, 0.007},
    };
    return rows;
}

inline const ReferenceRow& reference_row(TopologyId id) {
    for (const auto& r : reference_rows())
        if (r.topology == id) return r;
    throw Error("no reference row for topology");
}

/// Headline improvement figures stated alongside the reference dataset
/// (Design-3 against MSADLC).
struct ReferenceClaims {
    double speed_pct = 32.7;
    double offset_pct = 55.0;
    double pdp_pct = 34.2;
    double power_pct = 13.5;
    double feedthrough_pct = 5.0;
    double kickback_increase_pct = 40.0;
};

// ---------------------------------------------------------------------------
// Improvement arithmetic
// ---------------------------------------------------------------------------

inline double pct_reduction(double baseline, double value) {
    return 100.0 * (baseline - value) / baseline;
}

inline double pct_increase(double baseline, double value) {
    return 100.0 * (value - baseline) / baseline;
}

/// Percentage deltas of one design against a baseline: reductions for
/// delay/power/pdp/offset/feedthrough, increase for kickback.
struct ImprovementSet {
    double speed_pct = 0.0;
    double power_pct = 0.0;
    double pdp_pct = 0.0;
    double offset_pct = 0.0;
    double feedthrough_pct = 0.0;
    double kickback_increase_pct = 0.0;
};

inline ImprovementSet improvements(const ReferenceRow& baseline, const ReferenceRow& design) {
    ImprovementSet s;
    s.speed_pct = pct_reduction(baseline.delay_ps, design.delay_ps);
    s.power_pct = pct_reduction(baseline.power_uw, design.power_uw);
    s.pdp_pct = pct_reduction(baseline.pdp_fj, design.pdp_fj);
    s.offset_pct = pct_reduction(baseline.offset_mv, design.offset_mv);
    s.feedthrough_pct = pct_reduction(baseline.feedthrough_v, design.feedthrough_v);
    s.kickback_increase_pct = pct_increase(baseline.kickback_v, design.kickback_v);
    return s;
}

inline ImprovementSet improvements(const ComparatorMetrics& baseline,
                                   const ComparatorMetrics& design) {
    ImprovementSet s;
    s.speed_pct = pct_reduction(baseline.avg_delay_s, design.avg_delay_s);
    s.power_pct = pct_reduction(baseline.avg_power_w, design.avg_power_w);
    s.pdp_pct = pct_reduction(baseline.pdp_j, design.pdp_j);
    s.offset_pct = pct_reduction(baseline.offset_v, design.offset_v);
    s.feedthrough_pct = pct_reduction(baseline.clock_feedthrough_v, design.clock_feedthrough_v);
    s.kickback_increase_pct = pct_increase(baseline.kickback_v, design.kickback_v);
    return s;
}

/// The stated PDP improvement does not follow from the reference rows
/// themselves; the recomputed value is the ground truth and the report flags
/// the discrepancy.
inline bool pdp_claim_mismatch(const ReferenceClaims& claims = {}) {
    const double computed = improvements(reference_row(TopologyId::Msadlc),
                                         reference_row(TopologyId::Design3CascodePseudoNmos))
                                .pdp_pct;
    return std::fabs(computed - claims.pdp_pct) > 0.5;
}

// ---------------------------------------------------------------------------
// Benchmark report
// ---------------------------------------------------------------------------

struct BenchmarkReport {
    std::vector<std::pair<TopologyId, CharacterizeResult>> rows;
    /// Named improvement sets recomputed from the simulated rows.
    std::vector<std::pair<std::string, ImprovementSet>> improvements_sim;
    ReferenceClaims claims;

    const CharacterizeResult* row(TopologyId id) const {
        for (const auto& [t, r] : rows)
            if (t == id) return &r;
        return nullptr;
    }
};

inline BenchmarkReport build_report(std::span<const TopologyId> topologies,
                                    const TestbenchSpec& bench, const SolverOptions& opt = {}) {
    BenchmarkReport rep;
    for (TopologyId id : topologies) {
        const Netlist bare = generate_topology(id);
        rep.rows.emplace_back(id, characterize_netlist(bare, bench, opt));
    }
    auto add_improvement = [&](const char* name, TopologyId base, TopologyId design) {
        const CharacterizeResult* b = rep.row(base);
        const CharacterizeResult* d = rep.row(design);
        if (b && d && b->ok() && d->ok())
            rep.improvements_sim.emplace_back(name, improvements(b->metrics, d->metrics));
    };
    add_improvement("design1_vs_msadlc", TopologyId::Msadlc, TopologyId::Design1Cascode);
    add_improvement("design2_vs_csdlc", TopologyId::Csdlc, TopologyId::Design2PseudoNmos);
    add_improvement("design3_vs_msadlc", TopologyId::Msadlc, TopologyId::Design3CascodePseudoNmos);
    return rep;
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fixed(double v, int digits) {
    if (!std::isfinite(v)) return "-";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
    return buf;
}

inline std::string pad(const std::string& s, std::size_t width) {
    std::string out = s;
    while (out.size() < width) out += ' ';
    return out;
}

}  // namespace detail

/// Human-readable value with its customary display unit.
inline std::string human_metric(const std::string& field, double value) {
    char buf[64];
    if (field == "avg_delay_s") std::snprintf(buf, sizeof(buf), "%.4g ps", value * 1e12);
    else if (field == "avg_power_w") std::snprintf(buf, sizeof(buf), "%.4g uW", value * 1e6);
    else if (field == "pdp_j") std::snprintf(buf, sizeof(buf), "%.4g fJ", value * 1e15);
    else if (field == "offset_v") std::snprintf(buf, sizeof(buf), "%.4g mV", value * 1e3);
    else std::snprintf(buf, sizeof(buf), "%.4g V", value);
    return buf;
}

inline nlohmann::json metrics_to_json(const ComparatorMetrics& m, const std::string& topology) {
    nlohmann::json j;
    j["topology"] = topology;
    nlohmann::json human;
    for (const auto& f : ComparatorMetrics::field_names()) {
        const double v = m.field(f);
        if (!std::isfinite(v)) continue;
        j[f] = v;
        std::string key = f.substr(0, f.rfind('_'));
        human[key] = human_metric(f, v);
    }
    j["human"] = human;
    return j;
}

inline nlohmann::json improvement_to_json(const ImprovementSet& s) {
    return nlohmann::json{
        {"speed_pct", s.speed_pct},
        {"power_pct", s.power_pct},
        {"pdp_pct", s.pdp_pct},
        {"offset_pct", s.offset_pct},
        {"feedthrough_pct", s.feedthrough_pct},
        {"kickback_increase_pct", s.kickback_increase_pct},
    };
}

inline nlohmann::json report_to_json(const BenchmarkReport& rep) {
    nlohmann::json j;
    j["rows"] = nlohmann::json::array();
    for (const auto& [id, r] : rep.rows) {
        nlohmann::json row = metrics_to_json(r.metrics, topology_name(id));
        if (!r.ok()) {
            nlohmann::json fails = nlohmann::json::array();
            for (const auto& [proc, msg] : r.failures)
                fails.push_back({{"procedure", proc}, {"error", msg}});
            row["failures"] = fails;
        }
        j["rows"].push_back(row);
    }
    j["improvements"] = nlohmann::json::object();
    for (const auto& [name, s] : rep.improvements_sim) j["improvements"][name] = improvement_to_json(s);

    nlohmann::json ref;
    ref["rows"] = nlohmann::json::array();
    for (const auto& r : reference_rows()) {
        ref["rows"].push_back({{"topology", topology_name(r.topology)},
                               {"delay_ps", r.delay_ps},
                               {"power_uw", r.power_uw},
                               {"pdp_fj", r.pdp_fj},
                               {"offset_mv", r.offset_mv},
                               {"feedthrough_v", r.feedthrough_v},
                               {"kickback_v", r.kickback_v}});
    }
    const ImprovementSet computed =
        improvements(reference_row(TopologyId::Msadlc),
                     reference_row(TopologyId::Design3CascodePseudoNmos));
    ref["improvements_design3_vs_msadlc"] = improvement_to_json(computed);
    ref["claims"] = {{"speed_pct", rep.claims.speed_pct},
                     {"offset_pct", rep.claims.offset_pct},
                     {"pdp_pct", rep.claims.pdp_pct},
                     {"power_pct", rep.claims.power_pct},
                     {"feedthrough_pct", rep.claims.feedthrough_pct},
                     {"kickback_increase_pct", rep.claims.kickback_increase_pct}};
    ref["pdp_claim_mismatch"] = pdp_claim_mismatch(rep.claims);
    if (pdp_claim_mismatch(rep.claims)) {
        char note[160];
        std::snprintf(note, sizeof(note),
                      "stated PDP improvement %.1f%% disagrees with the value recomputed from "
                      "the reference rows (%.1f%%)",
                      rep.claims.pdp_pct, computed.pdp_pct);
        ref["pdp_claim_note"] = note;
    }
    j["reference"] = ref;
    return j;
}

/// Fixed-width benchmark table: simulated rows, reference rows, improvement
/// percentages, and the PDP-claim footnote.
inline std::string render_report(const BenchmarkReport& rep) {
    using detail::fixed;
    using detail::pad;
    const std::size_t w0 = 34;
    const std::size_t w = 14;
    std::string out;
    auto header = [&] {
        out += pad("Topology", w0) + pad("Delay (ps)", w) + pad("Power (uW)", w) +
               pad("PDP (fJ)", w) + pad("Offset (mV)", w) + pad("Feedthru (V)", w) +
               pad("Kickback (V)", w) + "\n";
    };

    out += "Simulated metrics (generic 180nm-class models)\n";
    header();
    for (const auto& [id, r] : rep.rows) {
        const auto& m = r.metrics;
        out += pad(topology_display_name(id), w0) + pad(fixed(m.avg_delay_s * 1e12, 2), w) +
               pad(fixed(m.avg_power_w * 1e6, 3), w) + pad(fixed(m.pdp_j * 1e15, 3), w) +
               pad(fixed(m.offset_v * 1e3, 2), w) +
               pad(fixed(m.clock_feedthrough_v, 3), w) + pad(fixed(m.kickback_v, 4), w) + "\n";
        for (const auto& [proc, msg] : r.failures)
            out += "    ! " + proc + ": " + msg + "\n";
    }

    out += "\nReference values (published 180nm results; not simulated here)\n";
    header();
    for (const auto& r : reference_rows()) {
        out += pad(topology_display_name(r.topology), w0) + pad(fixed(r.delay_ps, 2), w) +
               pad(fixed(r.power_uw, 3), w) + pad(fixed(r.pdp_fj, 3), w) +
               pad(fixed(r.offset_mv, 2), w) + pad(fixed(r.feedthrough_v, 3), w) +
               pad(fixed(r.kickback_v, 4), w) + "\n";
    }

    if (!rep.improvements_sim.empty()) {
        out += "\nImprovements recomputed from simulated rows\n";
        for (const auto& [name, s] : rep.improvements_sim) {
            out += "  " + pad(name, 22) + "speed " + fixed(s.speed_pct, 1) + "%, power " +
                   fixed(s.power_pct, 1) + "%, pdp " + fixed(s.pdp_pct, 1) + "%, offset " +
                   fixed(s.offset_pct, 1) + "%, feedthrough " + fixed(s.feedthrough_pct, 1) +
                   "%, kickback " + (s.kickback_increase_pct >= 0 ? "+" : "") +
                   fixed(s.kickback_increase_pct, 1) + "%\n";
        }
    }

    const ImprovementSet ref_imp =
        improvements(reference_row(TopologyId::Msadlc),
                     reference_row(TopologyId::Design3CascodePseudoNmos));
    out += "\nImprovements recomputed from the reference rows (Design-3 vs MSADLC)\n";
    out += "  speed " + fixed(ref_imp.speed_pct, 1) + "%, power " + fixed(ref_imp.power_pct, 1) +
           "%, pdp " + fixed(ref_imp.pdp_pct, 1) + "%, offset " + fixed(ref_imp.offset_pct, 1) +
           "%, feedthrough " + fixed(ref_imp.feedthrough_pct, 1) + "%, kickback +" +
           fixed(ref_imp.kickback_increase_pct, 1) + "%\n";
    if (pdp_claim_mismatch(rep.claims)) {
        out += "  note: stated PDP improvement " + fixed(rep.claims.pdp_pct, 1) +
               "% disagrees with the recomputed " + fixed(ref_imp.pdp_pct, 1) +
               "%; the recomputed value follows from the reference rows\n";
    }
    return out;
}

inline nlohmann::json distribution_summary_json(const Distribution& d,
                                                const std::string& metric, int hist_bins = 0) {
    nlohmann::json j;
    j["metric"] = metric;
    j["mean"] = d.mean;
    j["std"] = d.std_dev;
    j["min"] = d.min;
    j["max"] = d.max;
    j["n"] = d.n_requested;
    j["n_failed"] = d.n_failed;
    if (hist_bins > 0) {
        auto [edges, counts] = d.histogram(hist_bins);
        j["histogram"] = {{"edges", edges}, {"counts", counts}};
    }
    return j;
}

}  // namespace dlcsim
