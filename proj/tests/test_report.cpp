#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <fstream>

#include "dlcsim/report.hpp"

#ifndef DLCSIM_SOURCE_DIR
#define DLCSIM_SOURCE_DIR "."
#endif

using namespace dlcsim;
using nlohmann::json;

namespace {

json load_schema(const std::string& name) {
    std::ifstream in(std::string(DLCSIM_SOURCE_DIR) + "/schemas/" + name);
    REQUIRE(in.good());
    return json::parse(in);
}

/// Minimal structural validator covering the subset of JSON Schema used by
/// the shipped schema files: type, required, properties, enum.
bool validates(const json& doc, const json& schema, std::string* why) {
    if (schema.contains("type")) {
        const std::string type = schema["type"];
        const bool ok = (type == "object" && doc.is_object()) ||
                        (type == "array" && doc.is_array()) ||
                        (type == "string" && doc.is_string()) ||
                        (type == "number" && doc.is_number()) ||
                        (type == "integer" && doc.is_number_integer()) ||
                        (type == "boolean" && doc.is_boolean());
        if (!ok) {
            *why = "expected " + type + ", got " + std::string(doc.type_name());
            return false;
        }
    }
    if (schema.contains("enum")) {
        bool found = false;
        for (const auto& v : schema["enum"]) found |= v == doc;
        if (!found) {
            *why = "value not in enum";
            return false;
        }
    }
    if (schema.contains("required")) {
        for (const auto& key : schema["required"]) {
            if (!doc.contains(key.get<std::string>())) {
                *why = "missing required key " + key.get<std::string>();
                return false;
            }
        }
    }
    if (schema.contains("properties")) {
        for (const auto& [key, sub] : schema["properties"].items()) {
            if (!doc.contains(key)) continue;
            if (!validates(doc[key], sub, why)) {
                *why = key + ": " + *why;
                return false;
            }
        }
    }
    return true;
}

ComparatorMetrics sample_metrics(double delay_ps, double power_uw, double offset_mv,
                                 double ft_v, double kb_v) {
    ComparatorMetrics m;
    m.avg_delay_s = delay_ps * 1e-12;
    m.avg_power_w = power_uw * 1e-6;
    m.pdp_j = m.avg_delay_s * m.avg_power_w;
    m.offset_v = offset_mv * 1e-3;
    m.clock_feedthrough_v = ft_v;
    m.kickback_v = kb_v;
    return m;
}

}  // namespace

TEST_CASE("reference rows reproduce the published pdp within rounding") {
    for (const auto& row : reference_rows()) {
        const double recomputed_fj = row.delay_ps * row.power_uw / 1000.0;
        CAPTURE(topology_name(row.topology));
        CHECK(std::fabs(recomputed_fj - row.pdp_fj) <= 0.05);
    }
}

TEST_CASE("headline percentages recompute from the reference rows") {
    const ImprovementSet s = improvements(reference_row(TopologyId::Msadlc),
                                          reference_row(TopologyId::Design3CascodePseudoNmos));
    CHECK(s.speed_pct == Catch::Approx(32.7).margin(0.5));
    CHECK(s.offset_pct == Catch::Approx(55.0).margin(0.5));
    CHECK(s.power_pct == Catch::Approx(13.5).margin(0.5));
    CHECK(s.feedthrough_pct == Catch::Approx(5.2).margin(0.5));
    CHECK(s.kickback_increase_pct == Catch::Approx(40.0).margin(0.5));
    // The stated pdp figure does not follow from the rows; the recomputed
    // value is 43.2% and the report must flag the discrepancy.
    CHECK(s.pdp_pct == Catch::Approx(43.18).margin(0.05));
    CHECK(std::fabs(s.pdp_pct - ReferenceClaims{}.pdp_pct) > 0.5);
    CHECK(pdp_claim_mismatch());
}

TEST_CASE("improvement formulas") {
    CHECK(pct_reduction(93.4, 62.84) == Catch::Approx(32.71948608).epsilon(1e-9));
    CHECK(pct_reduction(6.0, 2.7) == Catch::Approx(55.0).epsilon(1e-12));
    CHECK(pct_increase(0.005, 0.007) == Catch::Approx(40.0).epsilon(1e-9));
}

TEST_CASE("benchmark report renders rows, reference data and the pdp note") {
    BenchmarkReport rep;
    CharacterizeResult a, bse;
    a.metrics = sample_metrics(70.0, 3.0, 1.0, 0.1, 0.03);
    bse.metrics = sample_metrics(90.0, 3.2, 10.0, 0.2, 0.04);
    rep.rows.emplace_back(TopologyId::Msadlc, bse);
    rep.rows.emplace_back(TopologyId::Design3CascodePseudoNmos, a);
    rep.improvements_sim.emplace_back("design3_vs_msadlc",
                                      improvements(bse.metrics, a.metrics));

    const std::string text = render_report(rep);
    CHECK(text.find("MSADLC") != std::string::npos);
    CHECK(text.find("Reference values") != std::string::npos);
    CHECK(text.find("stated PDP improvement") != std::string::npos);
    CHECK(text.find("43.2") != std::string::npos);

    const json j = report_to_json(rep);
    CHECK(j["reference"]["pdp_claim_mismatch"] == true);
    CHECK(j["reference"]["claims"]["pdp_pct"] == Catch::Approx(34.2));
    std::string why;
    CHECK(validates(j, load_schema("report.schema.json"), &why));
    CAPTURE(why);
}

TEST_CASE("row failures are rendered as diagnostics and the report still emits") {
    BenchmarkReport rep;
    CharacterizeResult bad;
    bad.failures.emplace_back("delay", "output never crossed vdd/2");
    rep.rows.emplace_back(TopologyId::Csdlc, bad);
    const std::string text = render_report(rep);
    CHECK(text.find("! delay: output never crossed") != std::string::npos);
    const json j = report_to_json(rep);
    REQUIRE(j["rows"].size() == 1);
    CHECK(j["rows"][0].contains("failures"));
}

TEST_CASE("metrics json carries exact field names and human units") {
    const ComparatorMetrics m = sample_metrics(62.84, 4.08, 2.7, 0.092, 0.007);
    const json j = metrics_to_json(m, "design3");
    CHECK(j["topology"] == "design3");
    CHECK(j["avg_delay_s"] == Catch::Approx(62.84e-12));
    CHECK(j["avg_power_w"] == Catch::Approx(4.08e-6));
    CHECK(j["pdp_j"] == Catch::Approx(0.2563872e-15));
    CHECK(j["offset_v"] == Catch::Approx(2.7e-3));
    CHECK(j["clock_feedthrough_v"] == Catch::Approx(0.092));
    CHECK(j["kickback_v"] == Catch::Approx(0.007));
    CHECK(j["human"]["avg_delay"] == "62.84 ps");
    CHECK(j["human"]["avg_power"] == "4.08 uW");
    CHECK(j["human"]["offset"] == "2.7 mV");
    std::string why;
    CHECK(validates(j, load_schema("metrics.schema.json"), &why));
    CAPTURE(why);
}

TEST_CASE("mc summary json matches its schema") {
    Distribution d;
    d.samples = {1e-3, 2e-3, 3e-3};
    d.sample_indices = {0, 1, 2};
    d.n_requested = 4;
    d.n_failed = 1;
    d.finalize();
    const json j = distribution_summary_json(d, "offset_v", 2);
    CHECK(j["n"] == 4);
    CHECK(j["n_failed"] == 1);
    CHECK(j["histogram"]["counts"].size() == 2);
    std::string why;
    CHECK(validates(j, load_schema("mc_summary.schema.json"), &why));
    CAPTURE(why);
}

TEST_CASE("improvements recomputed from simulated rows, not stored") {
    // build_report derives the named improvement sets from its own rows.
    BenchmarkReport rep;
    CharacterizeResult base, d3;
    base.metrics = sample_metrics(100.0, 4.0, 8.0, 0.2, 0.01);
    d3.metrics = sample_metrics(50.0, 2.0, 4.0, 0.1, 0.02);
    rep.rows.emplace_back(TopologyId::Msadlc, base);
    rep.rows.emplace_back(TopologyId::Design3CascodePseudoNmos, d3);
    const ImprovementSet s = improvements(base.metrics, d3.metrics);
    CHECK(s.speed_pct == Catch::Approx(50.0));
    CHECK(s.power_pct == Catch::Approx(50.0));
    CHECK(s.pdp_pct == Catch::Approx(75.0));
    CHECK(s.offset_pct == Catch::Approx(50.0));
    CHECK(s.kickback_increase_pct == Catch::Approx(100.0));
}
