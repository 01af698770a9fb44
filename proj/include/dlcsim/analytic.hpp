#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "dlcsim/errors.hpp"

namespace dlcsim {

/// Inputs of the closed-form comparator delay model.
struct DelayModelInputs {
    double c_load = 0.0;   // F, load capacitance at one output
    double v_thp = 0.0;    // V, |PMOS threshold|
    double i_tail = 0.0;   // A, total tail current (both branches)
    double gm_eff = 0.0;   // S, regeneration transconductance per inverter
    double vdd = 0.0;      // V
    double beta = 0.0;     // A/V^2, input-pair current factor
    double dv_in = 0.0;    // V, input differential voltage

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0)) throw std::invalid_argument(std::string(name) + " must be positive");
        };
        positive(c_load, "c_load");
        positive(v_thp, "v_thp");
        positive(i_tail, "i_tail");
        positive(gm_eff, "gm_eff");
        positive(vdd, "vdd");
        positive(beta, "beta");
        // dv_in = 0 is admitted so the imbalance form has its zero limit;
        // latch_delay rejects the resulting degenerate imbalance.
        if (dv_in < 0.0) throw std::invalid_argument("dv_in must be nonnegative");
        if (dv_in >= vdd) throw std::invalid_argument("dv_in must be below vdd");
    }
};

/// Inputs of the closed-form offset model.
struct OffsetModelInputs {
    double d_vt = 0.0;              // V, threshold mismatch
    double vgs_minus_vt = 0.0;      // V, overdrive
    double d_rl_over_r = 0.0;       // dimensionless load mismatch
    double d_beta_over_beta = 0.0;  // dimensionless current-factor mismatch

    void validate() const {
        if (vgs_minus_vt < 0.0) throw std::invalid_argument("vgs_minus_vt must be nonnegative");
    }
};

/// t0 = 2 * C_L * V_thp / I_tail: time to discharge the output load to the
/// first PMOS switch-on, with the branch current approximated as I_tail/2.
inline double discharge_delay(const DelayModelInputs& in) {
    in.validate();
    return 2.0 * in.c_load * in.v_thp / in.i_tail;
}

/// Initial latch imbalance dV0 = 2 * V_thp * sqrt(beta / I_tail) * dV_in.
inline double initial_imbalance(const DelayModelInputs& in) {
    in.validate();
    return 2.0 * in.v_thp * std::sqrt(in.beta / in.i_tail) * in.dv_in;
}

/// Intermediate imbalance form dV0 = V_thp - I_D2 * t0 / C_L, for an explicit
/// lagging-branch current. With I_D2 exactly I_tail/2 and t0 from
/// discharge_delay this cancels to zero; the usable signal comes from I_D2
/// running slightly below I_tail/2.
inline double imbalance_from_branch_current(double c_load, double v_thp, double i_d2,
                                            double t0) {
    if (!(c_load > 0.0)) throw std::invalid_argument("c_load must be positive");
    return v_thp - i_d2 * t0 / c_load;
}

/// t_latch = (C_L / gm_eff) * ln((V_DD/2) / dV0).
inline double latch_delay(const DelayModelInputs& in, double dv0) {
    in.validate();
    if (!(dv0 > 0.0))
        throw DegenerateImbalance("latch delay undefined for nonpositive initial imbalance");
    return (in.c_load / in.gm_eff) * std::log((in.vdd / 2.0) / dv0);
}

/// Total comparator delay: discharge delay plus latch delay with the
/// closed-form imbalance substituted.
inline double total_delay(const DelayModelInputs& in) {
    return discharge_delay(in) + latch_delay(in, initial_imbalance(in));
}

/// P = f_clk * V_DD * Q, the average power for supply charge Q drawn over one
/// full clock period.
inline double average_power(double supply_charge_c, double vdd, double f_clk) {
    if (!(f_clk > 0.0)) throw std::invalid_argument("f_clk must be positive");
    return f_clk * vdd * supply_charge_c;
}

/// V_os = dV_T + (V_gs - V_T)/2 * [dR_L/R + dbeta/beta].
inline double offset_voltage(const OffsetModelInputs& in) {
    in.validate();
    return in.d_vt + 0.5 * in.vgs_minus_vt * (in.d_rl_over_r + in.d_beta_over_beta);
}

}  // namespace dlcsim
