#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "dlcsim/devmodel.hpp"

using namespace dlcsim;

namespace {

ModelCard plain_nmos(double lambda = 0.0) {
    ModelCard m = ModelCard::nmos_default();
    m.lambda = lambda;
    return m;
}

}  // namespace

TEST_CASE("beta is kp * W/L") {
    const ModelCard m = plain_nmos();
    CHECK(beta(m, 720e-9, 180e-9) == Catch::Approx(680e-6).epsilon(1e-12));
    CHECK(beta(m, 1e-6, 1e-6) == Catch::Approx(m.kp).epsilon(1e-12));
    CHECK(beta(m, 2 * 720e-9, 180e-9) == Catch::Approx(2 * 680e-6).epsilon(1e-12));
}

TEST_CASE("square-law hand values") {
    const ModelCard m = plain_nmos();

    SECTION("cutoff below threshold") {
        const OperatingPoint op = evaluate_mosfet(m, 720e-9, 180e-9, 0.3, 1.0);
        CHECK(op.region == Region::Cutoff);
        CHECK(op.ids == 0.0);
        CHECK(op.gm == 0.0);
    }
    SECTION("saturation: 102.85 uA") {
        const OperatingPoint op = evaluate_mosfet(m, 720e-9, 180e-9, 1.0, 1.0);
        CHECK(op.region == Region::Saturation);
        CHECK(op.ids == Catch::Approx(102.85e-6).epsilon(1e-6));
    }
    SECTION("triode: 88.4 uA") {
        const OperatingPoint op = evaluate_mosfet(m, 720e-9, 180e-9, 1.8, 0.1);
        CHECK(op.region == Region::Triode);
        CHECK(op.ids == Catch::Approx(88.4e-6).epsilon(1e-6));
    }
    SECTION("zero bias gives zero current") {
        CHECK(evaluate_mosfet(m, 720e-9, 180e-9, 0.0, 0.0).ids == 0.0);
    }
}

TEST_CASE("current is continuous at the triode-saturation boundary") {
    ModelCard m = ModelCard::nmos_default();  // lambda = 0.06
    const double b = beta(m, 720e-9, 180e-9);
    const double vgs = 1.2;
    const double vov = vgs - m.vt0;

    // Both closed forms evaluated exactly at vds = vov.
    const double triode = b * (vov * vov - 0.5 * vov * vov) * (1.0 + m.lambda * vov);
    const double sat = 0.5 * b * vov * vov * (1.0 + m.lambda * vov);
    CHECK(std::fabs(triode - sat) <= 1e-15);

    const double eps = 1e-9;
    const double below = evaluate_mosfet(m, 720e-9, 180e-9, vgs, vov - eps).ids;
    const double above = evaluate_mosfet(m, 720e-9, 180e-9, vgs, vov + eps).ids;
    CHECK(std::fabs(below - above) < 1e-11);
}

TEST_CASE("ids is nondecreasing in vgs") {
    const ModelCard m = ModelCard::nmos_default();
    double prev = -1.0;
    for (int i = 0; i <= 1800; ++i) {
        const double vgs = i * 1e-3;
        const double ids = evaluate_mosfet(m, 720e-9, 180e-9, vgs, 0.9).ids;
        CHECK(ids >= prev);
        prev = ids;
    }
}

TEST_CASE("gm and gds match central finite differences") {
    const ModelCard m = ModelCard::nmos_default();
    const double h = 1e-6;
    for (double vgs : {0.7, 1.0, 1.4, 1.8}) {
        for (double vds : {0.05, 0.2, 0.4, 0.9, 1.4, 1.8}) {
            const double vov = vgs - m.vt0;
            if (std::fabs(vds - vov) < 0.01) continue;  // region boundary
            const OperatingPoint op = evaluate_mosfet(m, 720e-9, 180e-9, vgs, vds);
            const double gm_fd = (evaluate_mosfet(m, 720e-9, 180e-9, vgs + h, vds).ids -
                                  evaluate_mosfet(m, 720e-9, 180e-9, vgs - h, vds).ids) /
                                 (2 * h);
            const double gds_fd = (evaluate_mosfet(m, 720e-9, 180e-9, vgs, vds + h).ids -
                                   evaluate_mosfet(m, 720e-9, 180e-9, vgs, vds - h).ids) /
                                  (2 * h);
            CAPTURE(vgs, vds);
            CHECK(op.gm == Catch::Approx(gm_fd).epsilon(1e-4));
            CHECK(op.gds == Catch::Approx(gds_fd).epsilon(1e-4).margin(1e-12));
        }
    }
}

TEST_CASE("polarity mirroring is exactly antisymmetric") {
    ModelCard n = ModelCard::nmos_default();
    ModelCard p = n;
    p.polarity = Polarity::Pmos;
    for (double vgs : {-1.8, -1.0, -0.3, 0.0, 0.5, 1.2})
        for (double vds : {-1.8, -0.9, -0.1, 0.0}) {
            const double ip = evaluate_mosfet(p, 720e-9, 180e-9, vgs, vds).ids;
            const double in = evaluate_mosfet(n, 720e-9, 180e-9, -vgs, -vds).ids;
            CHECK(ip + in == 0.0);
        }
}

TEST_CASE("pmos pull-up conducts with negative ids") {
    const ModelCard p = ModelCard::pmos_default();
    const OperatingPoint op = evaluate_mosfet(p, 1.13e-6, 180e-9, -1.8, -0.9);
    CHECK(op.ids < 0.0);
    CHECK(op.gm >= 0.0);
    CHECK(op.gds >= 0.0);
}

TEST_CASE("meyer capacitances per region") {
    const ModelCard m = ModelCard::nmos_default();
    const double w = 720e-9, l = 180e-9;
    const double cox_wl = m.cox * w * l;
    const double ovl = m.cgso * w;

    const OperatingPoint sat = evaluate_mosfet(m, w, l, 1.0, 1.5);
    CHECK(sat.cgs == Catch::Approx((2.0 / 3.0) * cox_wl + ovl).epsilon(1e-12));
    CHECK(sat.cgd == Catch::Approx(m.cgdo * w).epsilon(1e-12));

    const OperatingPoint tri = evaluate_mosfet(m, w, l, 1.8, 0.1);
    CHECK(tri.cgs == Catch::Approx(0.5 * cox_wl + ovl).epsilon(1e-12));
    CHECK(tri.cgd == Catch::Approx(0.5 * cox_wl + m.cgdo * w).epsilon(1e-12));

    const OperatingPoint off = evaluate_mosfet(m, w, l, 0.0, 0.5);
    CHECK(off.cgs == Catch::Approx(ovl).epsilon(1e-12));
    CHECK(off.cgd == Catch::Approx(m.cgdo * w).epsilon(1e-12));
}

TEST_CASE("gm_eff sums the inverter transconductances") {
    OperatingPoint a, b;
    a.gm = 120e-6;
    b.gm = 80e-6;
    const OperatingPoint both[] = {a, b};
    CHECK(gm_eff(both) == Catch::Approx(200e-6).epsilon(1e-12));

    const OperatingPoint solo[] = {a};
    CHECK(gm_eff(solo) == Catch::Approx(120e-6).epsilon(1e-12));

    OperatingPoint off1, off2;
    const OperatingPoint cut[] = {off1, off2};
    CHECK(gm_eff(cut) == 0.0);

    CHECK_THROWS_AS(gm_eff({}), std::invalid_argument);
}
