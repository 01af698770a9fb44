#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dlcsim/variation.hpp"

using namespace dlcsim;

TEST_CASE("pelgrom scaling of the per-device sigma") {
    MismatchSpec spec;
    // 5 mV*um over a 720n x 180n gate: 13.9 mV.
    CHECK(spec.sigma_vt(720e-9, 180e-9) == Catch::Approx(13.888888888888e-3).epsilon(1e-9));
    CHECK(spec.sigma_beta(720e-9, 180e-9) == Catch::Approx(1e-8 / 0.36e-6).epsilon(1e-9));
}

TEST_CASE("counter rng streams are deterministic and independent") {
    CounterRng a(42, 7);
    CounterRng b(42, 7);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

    CounterRng c(42, 8);
    bool differs = false;
    CounterRng a2(42, 7);
    for (int i = 0; i < 16; ++i) differs |= a2.next_u64() != c.next_u64();
    CHECK(differs);

    // Normal draws have roughly unit variance.
    CounterRng n(1, 0);
    double sum = 0.0, ss = 0.0;
    const int count = 20000;
    for (int i = 0; i < count; ++i) {
        const double v = n.normal();
        sum += v;
        ss += v * v;
    }
    const double mean = sum / count;
    const double var = ss / count - mean * mean;
    CHECK(mean == Catch::Approx(0.0).margin(0.03));
    CHECK(var == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("apply_mismatch perturbs each device with its own card") {
    Netlist net = generate_topology(TopologyId::Design1Cascode);
    MismatchSpec spec;
    spec.seed = 3;
    apply_mismatch(net, spec, 0);
    const auto* m1 = std::get_if<Mosfet>(net.find_device("M1"));
    REQUIRE(m1 != nullptr);
    CHECK(m1->model == "nmos@M1");
    CHECK(net.models.at("nmos@M1").vt0 != net.models.at("nmos").vt0);
    CHECK_NOTHROW(net.validate());

    SECTION("same seed and index reproduce the same netlist") {
        Netlist again = generate_topology(TopologyId::Design1Cascode);
        apply_mismatch(again, spec, 0);
        CHECK(again == net);
    }
    SECTION("different sample index gives a different draw") {
        Netlist other = generate_topology(TopologyId::Design1Cascode);
        apply_mismatch(other, spec, 1);
        CHECK(other.models.at("nmos@M1").vt0 != net.models.at("nmos@M1").vt0);
    }
    SECTION("device filter restricts the perturbation") {
        Netlist filtered = generate_topology(TopologyId::Design1Cascode);
        MismatchSpec only = spec;
        only.devices = {"M1", "M2"};
        apply_mismatch(filtered, only, 0);
        CHECK(std::get<Mosfet>(*filtered.find_device("M1")).model == "nmos@M1");
        CHECK(std::get<Mosfet>(*filtered.find_device("M5")).model == "nmos");
    }
}

TEST_CASE("drawn threshold shifts follow the requested sigma") {
    MismatchSpec spec;
    spec.seed = 11;
    spec.devices = {"M1"};
    const double sigma = spec.sigma_vt(720e-9, 180e-9);
    double sum = 0.0, ss = 0.0;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        Netlist net = generate_topology(TopologyId::Msadlc);
        apply_mismatch(net, spec, static_cast<std::uint64_t>(i));
        const double dvt = net.models.at("nmos@M1").vt0 - net.models.at("nmos").vt0;
        sum += dvt;
        ss += dvt * dvt;
    }
    const double mean = sum / n;
    const double std_dev = std::sqrt(ss / n - mean * mean);
    CHECK(std::fabs(mean) < 3.0 * sigma / std::sqrt(static_cast<double>(n)));
    CHECK(std_dev == Catch::Approx(sigma).epsilon(0.08));
}

TEST_CASE("monte carlo with zero mismatch amplitude collapses to one value") {
    TestbenchSpec bench;
    MismatchSpec spec;
    spec.a_vt = 0.0;
    spec.a_beta = 0.0;
    spec.n_samples = 4;
    const Distribution d =
        monte_carlo(TopologyId::Csdlc, bench, spec, "avg_delay_s");
    REQUIRE(d.n_failed == 0);
    REQUIRE(d.samples.size() == 4);
    CHECK(d.std_dev == 0.0);
    for (double v : d.samples) CHECK(v == d.samples[0]);
}

TEST_CASE("monte carlo results do not depend on the thread schedule") {
    TestbenchSpec bench;
    MismatchSpec spec;
    spec.seed = 9;
    spec.n_samples = 6;
    const Distribution seq =
        monte_carlo(TopologyId::Csdlc, bench, spec, "avg_delay_s", {}, 1);
    const Distribution par =
        monte_carlo(TopologyId::Csdlc, bench, spec, "avg_delay_s", {}, 3);
    REQUIRE(seq.samples.size() == par.samples.size());
    for (std::size_t i = 0; i < seq.samples.size(); ++i) CHECK(seq.samples[i] == par.samples[i]);
    CHECK(seq.to_csv() == par.to_csv());
    CHECK(seq.std_dev > 0.0);
}

TEST_CASE("distribution statistics match the stored samples") {
    Distribution d;
    d.samples = {1.0, 2.0, 3.0, 4.0};
    d.sample_indices = {0, 1, 2, 3};
    d.n_requested = 4;
    d.finalize();
    CHECK(d.mean == Catch::Approx(2.5));
    CHECK(d.std_dev == Catch::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(d.min == 1.0);
    CHECK(d.max == 4.0);

    auto [edges, counts] = d.histogram(3);
    REQUIRE(edges.size() == 4);
    REQUIRE(counts.size() == 3);
    CHECK(counts[0] + counts[1] + counts[2] == 4);

    const std::string csv = d.to_csv();
    CHECK(csv.rfind("sample_index,value\n", 0) == 0);
    CHECK(csv.find("\n0,1\n") != std::string::npos);
}

TEST_CASE("corner set defaults and identity of TT") {
    const auto set = default_corners();
    REQUIRE(set.size() == 5);
    CHECK(set[0].name == "TT");
    CHECK(set[0].nmos.kp_mult == 1.0);
    CHECK(set[0].nmos.vt0_offset == 0.0);

    Netlist nominal = generate_topology(TopologyId::Msadlc);
    Netlist tt = nominal;
    apply_corner(tt, set[0]);
    CHECK(tt == nominal);

    Netlist ff = nominal;
    apply_corner(ff, set[1]);
    CHECK(ff.models.at("nmos").kp == Catch::Approx(170e-6 * 1.1).epsilon(1e-12));
    CHECK(ff.models.at("nmos").vt0 == Catch::Approx(0.405).epsilon(1e-12));
}

TEST_CASE("corner analysis orders delay as FF < TT < SS") {
    TestbenchSpec bench;
    const auto set = default_corners();
    const auto rows = corners(TopologyId::Design3CascodePseudoNmos, bench, set, {},
                              static_cast<unsigned>(Procedure::Delay));
    REQUIRE(rows.size() == 5);
    double tt = 0, ff = 0, ss = 0;
    for (const auto& [corner, r] : rows) {
        REQUIRE(r.ok());
        if (corner.name == "TT") tt = r.metrics.avg_delay_s;
        if (corner.name == "FF") ff = r.metrics.avg_delay_s;
        if (corner.name == "SS") ss = r.metrics.avg_delay_s;
    }
    CHECK(ff < tt);
    CHECK(tt < ss);

    SECTION("TT equals the nominal characterization") {
        const ComparatorMetrics nominal = characterize(
            TopologyId::Design3CascodePseudoNmos, bench, {},
            static_cast<unsigned>(Procedure::Delay));
        CHECK(tt == nominal.avg_delay_s);
    }
    SECTION("empty corner set gives an empty map") {
        CHECK(corners(TopologyId::Msadlc, bench, {}, {}).empty());
    }
}

TEST_CASE("sweep walks a device dimension") {
    TestbenchSpec bench;
    const double values[] = {720e-9, 1.44e-6};
    const auto rows = sweep(TopologyId::Design1Cascode, bench, "M5.w", values, {},
                            static_cast<unsigned>(Procedure::Delay));
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].first == Catch::Approx(720e-9));
    // A stronger tail raises I_tail and shortens the measured delay.
    CHECK(rows[1].second.metrics.avg_delay_s < rows[0].second.metrics.avg_delay_s);

    SECTION("empty value list") {
        CHECK(sweep(TopologyId::Design1Cascode, bench, "M5.w", {}, {}).empty());
    }
    SECTION("unknown path") {
        const double v[] = {1.0};
        CHECK_THROWS_AS(sweep(TopologyId::Design1Cascode, bench, "M99.w", v, {}), Error);
        CHECK_THROWS_AS(sweep(TopologyId::Design1Cascode, bench, "nope", v, {}), Error);
        CHECK_THROWS_AS(sweep(TopologyId::Design1Cascode, bench, "bench.nope", v, {}), Error);
    }
}

TEST_CASE("sweep over a bench field") {
    TestbenchSpec bench;
    const double values[] = {5e-15, 10e-15};
    const auto rows = sweep(TopologyId::Msadlc, bench, "bench.c_load", values, {},
                            static_cast<unsigned>(Procedure::Delay));
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].second.metrics.avg_delay_s > rows[0].second.metrics.avg_delay_s);
}
