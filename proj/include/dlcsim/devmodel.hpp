#pragma once

#include <cassert>
#include <cmath>
#include <span>
#include <stdexcept>

namespace dlcsim {

enum class Polarity { Nmos, Pmos };

/// Square-law MOSFET parameter set. Thresholds are stored positive for both
/// polarities; PMOS sign handling happens inside the evaluator.
struct ModelCard {
    Polarity polarity = Polarity::Nmos;
    double vt0 = 0.45;     // V, threshold
    double kp = 170e-6;    // A/V^2 per square (mu*Cox)
    double lambda = 0.06;  // 1/V, channel-length modulation
    double cgso = 3e-10;   // F/m, gate-source overlap per width
    double cgdo = 3e-10;   // F/m, gate-drain overlap per width
    double cox = 8.5e-3;   // F/m^2, gate oxide capacitance density

    bool operator==(const ModelCard&) const = default;

    /// Generic 180nm-class defaults standing in for a foundry model library.
    static ModelCard nmos_default() { return ModelCard{}; }
    static ModelCard pmos_default() {
        ModelCard m;
        m.polarity = Polarity::Pmos;
        m.kp = 60e-6;
        m.lambda = 0.08;
        return m;
    }
};

enum class Region { Cutoff, Triode, Saturation };

/// Branch current, small-signal conductances and Meyer-style gate
/// capacitances of one MOSFET at a candidate bias point.
struct OperatingPoint {
    Region region = Region::Cutoff;
    double ids = 0.0;  // A, drain-to-source current (signed; negative for PMOS pull-up)
    double gm = 0.0;   // S, d(ids)/d(vgs)
    double gds = 0.0;  // S, d(ids)/d(vds)
    double cgs = 0.0;  // F
    double cgd = 0.0;  // F
};

/// beta = kp * W/L, the square-law current factor.
inline double beta(const ModelCard& model, double width_m, double length_m) {
    assert(width_m > 0.0 && length_m > 0.0);
    return model.kp * (width_m / length_m);
}

namespace detail {

/// NMOS-normalized evaluation; vgs/vds already polarity-mirrored.
inline OperatingPoint evaluate_normalized(const ModelCard& model, double width_m,
                                          double length_m, double vgs, double vds) {
    OperatingPoint op;
    const double b = beta(model, width_m, length_m);
    const double w = width_m;
    const double area = width_m * length_m;
    const double ovl_s = model.cgso * w;
    const double ovl_d = model.cgdo * w;

    if (vgs <= model.vt0) {
        op.region = Region::Cutoff;
        op.cgs = ovl_s;
        op.cgd = ovl_d;
        return op;
    }

    const double vov = vgs - model.vt0;
    const double clm = 1.0 + model.lambda * vds;
    if (vds >= vov) {
        op.region = Region::Saturation;
        op.ids = 0.5 * b * vov * vov * clm;
        op.gm = b * vov * clm;
        op.gds = 0.5 * b * vov * vov * model.lambda;
        op.cgs = (2.0 / 3.0) * model.cox * area + ovl_s;
        op.cgd = ovl_d;
    } else {
        // Triode; the clm factor keeps current and derivatives continuous
        // at vds = vov. The branch also covers vds <= 0.
        op.region = Region::Triode;
        const double shape = vov * vds - 0.5 * vds * vds;
        op.ids = b * shape * clm;
        op.gm = b * vds * clm;
        op.gds = b * ((vov - vds) * clm + shape * model.lambda);
        op.cgs = 0.5 * model.cox * area + ovl_s;
        op.cgd = 0.5 * model.cox * area + ovl_d;
    }
    return op;
}

}  // namespace detail

/// Evaluate one MOSFET at (vgs, vds). PMOS devices are handled by polarity
/// mirroring: ids_p(vgs, vds) = -ids_n(-vgs, -vds) with mirrored parameters.
/// vbs is accepted but ignored (no body effect in this model).
inline OperatingPoint evaluate_mosfet(const ModelCard& model, double width_m,
                                      double length_m, double vgs, double vds,
                                      double vbs = 0.0) {
    (void)vbs;
    if (model.polarity == Polarity::Nmos)
        return detail::evaluate_normalized(model, width_m, length_m, vgs, vds);

    OperatingPoint op = detail::evaluate_normalized(model, width_m, length_m, -vgs, -vds);
    // d(-ids_n(-vgs,-vds))/d(vgs) = gm_n, same for gds: conductances keep sign.
    op.ids = -op.ids;
    return op;
}

/// Effective regeneration transconductance of one inverter of a cross-coupled
/// pair: the sum of its devices' gm. A pseudo-NMOS inverter passes only its
/// driver (the grounded-gate load contributes no gm to the loop).
inline double gm_eff(std::span<const OperatingPoint> latch_devices) {
    if (latch_devices.empty())
        throw std::invalid_argument("gm_eff: empty device list");
    double sum = 0.0;
    for (const auto& op : latch_devices) sum += op.gm;
    return sum;
}

}  // namespace dlcsim
