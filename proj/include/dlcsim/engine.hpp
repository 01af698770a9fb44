#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dlcsim/devmodel.hpp"
#include "dlcsim/errors.hpp"
#include "dlcsim/netlist.hpp"

namespace dlcsim {

enum class Integration { Trapezoidal, BackwardEuler };

/// Interval with a finer step ceiling than the global dt_max; used to
/// resolve fast regeneration windows inside long, mostly settled runs.
struct DtWindow {
    double t0 = 0.0;
    double t1 = 0.0;
    double dt = 0.0;
};

struct SolverOptions {
    double reltol = 1e-3;
    double vabstol = 1e-6;   // V
    double iabstol = 1e-9;   // A
    int max_newton_iters = 100;
    double gmin = 1e-12;     // S, every node to ground
    Integration integration = Integration::Trapezoidal;
    /// Maximum transient step; 0 means "use the .tran step".
    double dt_max = 0.0;
    /// Newton per-node voltage update clamp.
    double max_step_v = 0.5;
    /// Local step refinement intervals.
    std::vector<DtWindow> dt_windows;
    /// Node voltages pinned during the DC solve that seeds a transient; the
    /// constraint is released once time starts moving.
    std::map<std::string, double> initial_conditions;
};

/// Value of a source waveform at time t.
inline double waveform_value(const Waveform& w, double t) {
    return std::visit(
        [t](const auto& v) -> double {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, Dc>) {
                return v.volts;
            } else if constexpr (std::is_same_v<T, Pulse>) {
                if (t < v.delay_s) return v.v1;
                double local = std::fmod(t - v.delay_s, v.period_s);
                if (local < v.rise_s) return v.v1 + (v.v2 - v.v1) * local / v.rise_s;
                local -= v.rise_s;
                if (local < v.width_s) return v.v2;
                local -= v.width_s;
                if (local < v.fall_s) return v.v2 + (v.v1 - v.v2) * local / v.fall_s;
                return v.v1;
            } else {
                const auto& pts = v.points;
                if (pts.empty()) return 0.0;
                if (t <= pts.front().first) return pts.front().second;
                if (t >= pts.back().first) return pts.back().second;
                for (std::size_t i = 1; i < pts.size(); ++i) {
                    if (t <= pts[i].first) {
                        const auto& [t0, v0] = pts[i - 1];
                        const auto& [t1, v1] = pts[i];
                        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
                    }
                }
                return pts.back().second;
            }
        },
        w);
}

/// Times at which a waveform has a derivative discontinuity within [0, tstop].
inline void waveform_breakpoints(const Waveform& w, double tstop, std::vector<double>& out) {
    if (const auto* p = std::get_if<Pulse>(&w)) {
        for (int k = 0;; ++k) {
            const double base = p->delay_s + k * p->period_s;
            if (base > tstop) break;
            const double corners[] = {base, base + p->rise_s, base + p->rise_s + p->width_s,
                                      base + p->rise_s + p->width_s + p->fall_s};
            for (double c : corners)
                if (c > 0.0 && c < tstop) out.push_back(c);
            if (p->period_s <= 0.0) break;
        }
    } else if (const auto* pw = std::get_if<Pwl>(&w)) {
        for (const auto& [t, v] : pw->points)
            if (t > 0.0 && t < tstop) out.push_back(t);
    }
}

struct DcResult {
    std::vector<std::string> node_names;        // ground first
    std::vector<double> voltages;               // aligned with node_names
    std::vector<std::string> source_names;
    std::vector<double> source_currents;        // current n+ -> n- through the source

    double voltage(const std::string& node) const {
        for (std::size_t i = 0; i < node_names.size(); ++i)
            if (node_names[i] == node) return voltages[i];
        throw Error("unknown node '" + node + "'");
    }
};

struct TransientResult {
    std::vector<double> times;
    std::vector<std::string> node_names;               // ground first
    std::vector<std::vector<double>> node_voltages;    // [time][node]
    std::vector<std::string> source_names;
    std::vector<std::vector<double>> source_currents;  // [time][source]
    std::map<std::string, int> node_index;

    int node_column(const std::string& node) const {
        auto it = node_index.find(node);
        if (it == node_index.end()) throw Error("unknown node '" + node + "'");
        return it->second;
    }

    int source_column(const std::string& name) const {
        for (std::size_t i = 0; i < source_names.size(); ++i)
            if (source_names[i] == name) return static_cast<int>(i);
        throw Error("unknown source '" + name + "'");
    }

    /// Linear interpolation of one node voltage at time t.
    double voltage_at(int col, double t) const {
        if (times.empty()) throw Error("empty transient result");
        if (t <= times.front()) return node_voltages.front()[col];
        if (t >= times.back()) return node_voltages.back()[col];
        auto it = std::lower_bound(times.begin(), times.end(), t);
        const std::size_t i = static_cast<std::size_t>(it - times.begin());
        const double t1 = times[i], t0 = times[i - 1];
        const double v1 = node_voltages[i][col], v0 = node_voltages[i - 1][col];
        if (t1 == t0) return v1;
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
    }

    /// Full-precision CSV: time_s, one column per node, then I(Vname) columns.
    std::string to_csv() const {
        std::string out = "time_s";
        for (const auto& n : node_names) out += ",v(" + n + ")";
        for (const auto& s : source_names) out += ",I(" + s + ")";
        out += "\n";
        char buf[40];
        for (std::size_t i = 0; i < times.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", times[i]);
            out += buf;
            for (double v : node_voltages[i]) {
                std::snprintf(buf, sizeof(buf), ",%.17g", v);
                out += buf;
            }
            for (double v : source_currents[i]) {
                std::snprintf(buf, sizeof(buf), ",%.17g", v);
                out += buf;
            }
            out += "\n";
        }
        return out;
    }
};

namespace detail {

struct MosInst {
    int d = 0, g = 0, s = 0;
    double w = 0.0, l = 0.0;
    const ModelCard* model = nullptr;
    // Gate capacitances frozen at the last accepted time point.
    double cgs = 0.0, cgd = 0.0;
    // Companion-model state for the two gate capacitances.
    double v_gs = 0.0, v_gd = 0.0;
    double i_gs = 0.0, i_gd = 0.0;
};

struct ResInst { int a = 0, b = 0; double g = 0.0; };

struct CapInst {
    int a = 0, b = 0;
    double c = 0.0;
    double v = 0.0, i = 0.0;  // companion state
};

struct SrcInst {
    int p = 0, n = 0;
    const Waveform* waveform = nullptr;
    int row = 0;  // unknown index of the branch current
};

/// Dense MNA system over one compiled netlist. Unknowns are the non-ground
/// node voltages followed by the voltage-source branch currents.
class Mna {
public:
    Mna(const Netlist& net, const SolverOptions& opt) : net_(net), opt_(opt) {
        net.validate();
        names_ = net.node_names();
        for (std::size_t i = 0; i < names_.size(); ++i) index_[names_[i]] = static_cast<int>(i);
        for (const auto& dev : net.devices) {
            std::visit(
                [&](const auto& e) {
                    using T = std::decay_t<decltype(e)>;
                    if constexpr (std::is_same_v<T, Mosfet>) {
                        MosInst m;
                        m.d = index_.at(e.drain);
                        m.g = index_.at(e.gate);
                        m.s = index_.at(e.source);
                        m.w = e.width_m;
                        m.l = e.length_m;
                        m.model = &net_.models.at(e.model);
                        mosfets_.push_back(m);
                    } else if constexpr (std::is_same_v<T, Resistor>) {
                        resistors_.push_back({index_.at(e.n1), index_.at(e.n2), 1.0 / e.ohms});
                    } else if constexpr (std::is_same_v<T, Capacitor>) {
                        CapInst c;
                        c.a = index_.at(e.n1);
                        c.b = index_.at(e.n2);
                        c.c = e.farads;
                        caps_.push_back(c);
                    } else if constexpr (std::is_same_v<T, VSource>) {
                        SrcInst s;
                        s.p = index_.at(e.npos);
                        s.n = index_.at(e.nneg);
                        s.waveform = &e.waveform;
                        source_names_.push_back(e.name);
                        sources_.push_back(s);
                    }
                },
                dev);
        }
        n_nodes_ = static_cast<int>(names_.size());
        for (std::size_t k = 0; k < sources_.size(); ++k)
            sources_[k].row = n_nodes_ - 1 + static_cast<int>(k);
        n_ = n_nodes_ - 1 + static_cast<int>(sources_.size());
        x_ = Eigen::VectorXd::Zero(std::max(n_, 1));
    }

    const std::vector<std::string>& node_names() const { return names_; }
    const std::vector<std::string>& source_names() const { return source_names_; }

    /// Newton solve at one (quasi-)static configuration. Companion stamps for
    /// capacitors are enabled only when `h > 0`.
    ///
    /// Returns the name of the worst node on failure.
    bool newton(double time, double h, Integration method, double gmin, double source_scale,
                bool use_ics, bool check_residual, std::string* worst_node) {
        if (n_ == 0) return true;
        Eigen::MatrixXd a(n_, n_);
        Eigen::VectorXd b(n_);
        std::string worst;
        for (int iter = 0; iter < opt_.max_newton_iters; ++iter) {
            assemble(a, b, time, h, method, gmin, source_scale, use_ics);
            Eigen::VectorXd xn = a.partialPivLu().solve(b);
            if (!xn.allFinite()) {
                if (worst_node) *worst_node = worst.empty() ? names_.back() : worst;
                return false;
            }
            Eigen::VectorXd dx = xn - x_;
            bool converged = iter > 0;
            double worst_dv = 0.0;
            for (int i = 0; i < n_nodes_ - 1; ++i) {
                const double dv = std::fabs(dx[i]);
                if (dv > worst_dv) {
                    worst_dv = dv;
                    worst = names_[i + 1];
                }
                if (dv > opt_.reltol * std::fabs(xn[i]) + opt_.vabstol) converged = false;
                dx[i] = std::clamp(dx[i], -opt_.max_step_v, opt_.max_step_v);
            }
            x_ += dx;
            if (converged) {
                if (!check_residual) return true;
                assemble(a, b, time, h, method, gmin, source_scale, use_ics);
                Eigen::VectorXd r = a * x_ - b;
                double worst_res = 0.0;
                for (int i = 0; i < n_nodes_ - 1; ++i) {
                    if (std::fabs(r[i]) > worst_res) {
                        worst_res = std::fabs(r[i]);
                        worst = names_[i + 1];
                    }
                }
                if (worst_res <= opt_.iabstol) return true;
                // Residual still moving: keep iterating.
                continue;
            }
        }
        if (worst_node) *worst_node = worst;
        return false;
    }

    /// DC solve with gmin-stepping and source-stepping fallbacks.
    void solve_dc(double time, bool use_ics) {
        std::string worst;
        if (newton(time, 0.0, Integration::BackwardEuler, opt_.gmin, 1.0, use_ics, true, &worst))
            return;

        // gmin stepping: start heavily damped and relax.
        x_.setZero();
        bool ok = true;
        for (double g = 1e-3; g >= opt_.gmin; g *= 1e-1) {
            ok = newton(time, 0.0, Integration::BackwardEuler, g, 1.0, use_ics, false, &worst);
            if (!ok) break;
        }
        if (ok && newton(time, 0.0, Integration::BackwardEuler, opt_.gmin, 1.0, use_ics, true,
                         &worst))
            return;

        // Source stepping: ramp all sources from zero.
        x_.setZero();
        ok = true;
        for (int k = 1; k <= 20; ++k) {
            ok = newton(time, 0.0, Integration::BackwardEuler, opt_.gmin, k / 20.0, use_ics,
                        false, &worst);
            if (!ok) break;
        }
        if (ok && newton(time, 0.0, Integration::BackwardEuler, opt_.gmin, 1.0, use_ics, true,
                         &worst))
            return;

        throw NonConvergence(-1.0, worst, 0.0,
                             "DC operating point did not converge (worst node: " + worst + ")");
    }

    /// Refresh companion state and frozen MOSFET capacitances from the
    /// current solution.
    void accept_state() {
        for (auto& c : caps_) {
            // i was produced by the last companion update; on DC acceptance
            // reset it to zero (capacitor current is zero at DC).
            c.v = volt(c.a) - volt(c.b);
        }
        for (auto& m : mosfets_) {
            const OperatingPoint op = device_op(m);
            m.cgs = op.cgs;
            m.cgd = op.cgd;
            m.v_gs = volt(m.g) - volt(m.s);
            m.v_gd = volt(m.g) - volt(m.d);
        }
    }

    void reset_dynamic_currents() {
        for (auto& c : caps_) c.i = 0.0;
        for (auto& m : mosfets_) { m.i_gs = 0.0; m.i_gd = 0.0; }
    }

    /// Update companion branch currents after an accepted step of size h.
    void update_dynamic_currents(double h, Integration method) {
        auto advance = [&](double c, double v_old, double i_old, double v_new) {
            if (method == Integration::Trapezoidal) {
                const double geq = 2.0 * c / h;
                return geq * (v_new - v_old) - i_old;
            }
            return (c / h) * (v_new - v_old);
        };
        for (auto& c : caps_) {
            const double v_new = volt(c.a) - volt(c.b);
            c.i = advance(c.c, c.v, c.i, v_new);
            c.v = v_new;
        }
        for (auto& m : mosfets_) {
            const double vgs = volt(m.g) - volt(m.s);
            const double vgd = volt(m.g) - volt(m.d);
            m.i_gs = advance(m.cgs, m.v_gs, m.i_gs, vgs);
            m.i_gd = advance(m.cgd, m.v_gd, m.i_gd, vgd);
            m.v_gs = vgs;
            m.v_gd = vgd;
            const OperatingPoint op = device_op(m);
            m.cgs = op.cgs;
            m.cgd = op.cgd;
        }
    }

    double volt(int node) const { return node == 0 ? 0.0 : x_[node - 1]; }

    std::vector<double> node_voltage_row() const {
        std::vector<double> row(names_.size());
        for (int i = 0; i < n_nodes_; ++i) row[static_cast<std::size_t>(i)] = volt(i);
        return row;
    }

    std::vector<double> source_current_row() const {
        std::vector<double> row(sources_.size());
        for (std::size_t k = 0; k < sources_.size(); ++k) row[k] = x_[sources_[k].row];
        return row;
    }

    Eigen::VectorXd& state() { return x_; }

    /// Operating point of one compiled MOSFET at the current solution,
    /// with source-drain swap for reverse conduction.
    OperatingPoint device_op(const MosInst& m) const {
        const double vg = volt(m.g), vd = volt(m.d), vs = volt(m.s);
        const double sign = m.model->polarity == Polarity::Nmos ? 1.0 : -1.0;
        if (sign * (vd - vs) >= 0.0)
            return evaluate_mosfet(*m.model, m.w, m.l, vg - vs, vd - vs);
        OperatingPoint op = evaluate_mosfet(*m.model, m.w, m.l, vg - vd, vs - vd);
        op.ids = -op.ids;
        std::swap(op.cgs, op.cgd);
        return op;
    }

private:
    void stamp_conductance(Eigen::MatrixXd& a, int n1, int n2, double g) const {
        if (n1 > 0) a(n1 - 1, n1 - 1) += g;
        if (n2 > 0) a(n2 - 1, n2 - 1) += g;
        if (n1 > 0 && n2 > 0) {
            a(n1 - 1, n2 - 1) -= g;
            a(n2 - 1, n1 - 1) -= g;
        }
    }

    void stamp_current(Eigen::VectorXd& b, int from, int to, double i) const {
        // Current i flows from `from` into `to` through the device.
        if (from > 0) b[from - 1] -= i;
        if (to > 0) b[to - 1] += i;
    }

    void assemble(Eigen::MatrixXd& a, Eigen::VectorXd& b, double time, double h,
                  Integration method, double gmin, double source_scale, bool use_ics) {
        a.setZero();
        b.setZero();
        for (int i = 1; i < n_nodes_; ++i) a(i - 1, i - 1) += gmin;

        for (const auto& r : resistors_) stamp_conductance(a, r.a, r.b, r.g);

        for (const auto& s : sources_) {
            // Branch current flows from n+ through the source to n-.
            if (s.p > 0) {
                a(s.p - 1, s.row) += 1.0;
                a(s.row, s.p - 1) += 1.0;
            }
            if (s.n > 0) {
                a(s.n - 1, s.row) -= 1.0;
                a(s.row, s.n - 1) -= 1.0;
            }
            b[s.row] = source_scale * waveform_value(*s.waveform, time);
        }

        if (h > 0.0) {
            auto stamp_companion = [&](int na, int nb, double c, double v_old, double i_old) {
                double geq, ihist;
                if (method == Integration::Trapezoidal) {
                    geq = 2.0 * c / h;
                    ihist = geq * v_old + i_old;
                } else {
                    geq = c / h;
                    ihist = geq * v_old;
                }
                stamp_conductance(a, na, nb, geq);
                stamp_current(b, nb, na, ihist);  // history current drives a
            };
            for (const auto& c : caps_) stamp_companion(c.a, c.b, c.c, c.v, c.i);
            for (const auto& m : mosfets_) {
                stamp_companion(m.g, m.s, m.cgs, m.v_gs, m.i_gs);
                stamp_companion(m.g, m.d, m.cgd, m.v_gd, m.i_gd);
            }
        }

        for (const auto& m : mosfets_) {
            const double vg = volt(m.g), vd = volt(m.d), vs = volt(m.s);
            const double sign = m.model->polarity == Polarity::Nmos ? 1.0 : -1.0;
            double id, di_dvg, di_dvd, di_dvs;
            if (sign * (vd - vs) >= 0.0) {
                const OperatingPoint op = evaluate_mosfet(*m.model, m.w, m.l, vg - vs, vd - vs);
                id = op.ids;
                di_dvg = op.gm;
                di_dvd = op.gds;
                di_dvs = -(op.gm + op.gds);
            } else {
                // Source-drain swap for reverse conduction; square-law devices
                // are symmetric.
                const OperatingPoint op = evaluate_mosfet(*m.model, m.w, m.l, vg - vd, vs - vd);
                id = -op.ids;
                di_dvg = -op.gm;
                di_dvd = op.gm + op.gds;
                di_dvs = -op.gds;
            }
            if (m.d > 0) {
                if (m.g > 0) a(m.d - 1, m.g - 1) += di_dvg;
                a(m.d - 1, m.d - 1) += di_dvd;
                if (m.s > 0) a(m.d - 1, m.s - 1) += di_dvs;
            }
            if (m.s > 0) {
                if (m.g > 0) a(m.s - 1, m.g - 1) -= di_dvg;
                if (m.d > 0) a(m.s - 1, m.d - 1) -= di_dvd;
                a(m.s - 1, m.s - 1) -= di_dvs;
            }
            const double ieq = id - di_dvg * vg - di_dvd * vd - di_dvs * vs;
            stamp_current(b, m.d, m.s, ieq);
        }

        if (use_ics && !opt_.initial_conditions.empty()) {
            constexpr double g_ic = 1e3;
            for (const auto& [node, v] : opt_.initial_conditions) {
                auto it = index_.find(node);
                if (it == index_.end()) throw Error("initial condition on unknown node " + node);
                if (it->second == 0) continue;
                a(it->second - 1, it->second - 1) += g_ic;
                b[it->second - 1] += g_ic * v;
            }
        }
    }

    const Netlist& net_;
    const SolverOptions& opt_;
    std::vector<std::string> names_;
    std::map<std::string, int> index_;
    std::vector<MosInst> mosfets_;
    std::vector<ResInst> resistors_;
    std::vector<CapInst> caps_;
    std::vector<SrcInst> sources_;
    std::vector<std::string> source_names_;
    int n_nodes_ = 0;
    int n_ = 0;
    Eigen::VectorXd x_;
};

}  // namespace detail

/// DC operating point: capacitors open, waveform sources at their t=0 value.
inline DcResult dc_operating_point(const Netlist& net, const SolverOptions& opt = {}) {
    detail::Mna mna(net, opt);
    mna.solve_dc(0.0, !opt.initial_conditions.empty());
    DcResult res;
    res.node_names = mna.node_names();
    res.voltages = mna.node_voltage_row();
    res.source_names = mna.source_names();
    res.source_currents = mna.source_current_row();
    return res;
}

/// Fixed-grid transient analysis. The grid is dt_max-spaced between waveform
/// breakpoints, every breakpoint appears exactly, and each Newton failure
/// falls back to backward Euler and then to step halving.
inline TransientResult transient(const Netlist& net, const SolverOptions& opt = {}) {
    auto tran = net.tran_directive();
    if (!tran) throw Error("netlist has no .tran directive");
    const double tstop = tran->tstop_s;
    const double dt = opt.dt_max > 0.0 ? opt.dt_max : tran->tstep_max_s;
    if (dt <= 0.0 || dt >= tstop) throw Error("invalid transient step");

    detail::Mna mna(net, opt);

    // Grid: breakpoints split [0, tstop] into segments subdivided to <= dt,
    // or to a dt_window's finer ceiling where one covers the segment.
    std::vector<double> breakpoints{0.0, tstop};
    for (const auto& dev : net.devices)
        if (const auto* v = std::get_if<VSource>(&dev))
            waveform_breakpoints(v->waveform, tstop, breakpoints);
    for (const auto& w : opt.dt_windows) {
        if (w.t0 > 0.0 && w.t0 < tstop) breakpoints.push_back(w.t0);
        if (w.t1 > 0.0 && w.t1 < tstop) breakpoints.push_back(w.t1);
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    breakpoints.erase(std::unique(breakpoints.begin(), breakpoints.end()), breakpoints.end());

    std::vector<double> grid{0.0};
    for (std::size_t i = 1; i < breakpoints.size(); ++i) {
        const double a = breakpoints[i - 1], b = breakpoints[i];
        double dt_eff = dt;
        const double mid = 0.5 * (a + b);
        for (const auto& w : opt.dt_windows)
            if (mid >= w.t0 && mid <= w.t1 && w.dt > 0.0) dt_eff = std::min(dt_eff, w.dt);
        const int n = std::max(1, static_cast<int>(std::ceil((b - a) / dt_eff - 1e-9)));
        for (int j = 1; j < n; ++j) grid.push_back(a + (b - a) * j / n);
        grid.push_back(b);
    }

    mna.solve_dc(0.0, !opt.initial_conditions.empty());
    mna.accept_state();
    mna.reset_dynamic_currents();

    TransientResult res;
    res.node_names = mna.node_names();
    res.source_names = mna.source_names();
    for (std::size_t i = 0; i < res.node_names.size(); ++i)
        res.node_index[res.node_names[i]] = static_cast<int>(i);
    auto record = [&](double t) {
        res.times.push_back(t);
        res.node_voltages.push_back(mna.node_voltage_row());
        res.source_currents.push_back(mna.source_current_row());
    };
    record(0.0);

    const double h_min = dt / 1e6;
    double t = 0.0;
    Eigen::VectorXd saved = mna.state();
    for (std::size_t gi = 1; gi < grid.size(); ++gi) {
        const double target = grid[gi];
        while (t < target) {
            double h = target - t;
            for (;;) {
                const double t_next = (h >= target - t) ? target : t + h;
                saved = mna.state();
                std::string worst;
                bool ok = mna.newton(t_next, t_next - t, opt.integration, opt.gmin, 1.0, false,
                                     false, &worst);
                if (!ok) {
                    mna.state() = saved;
                    ok = mna.newton(t_next, t_next - t, Integration::BackwardEuler, opt.gmin,
                                    1.0, false, false, &worst);
                    if (ok && opt.integration == Integration::Trapezoidal) {
                        mna.update_dynamic_currents(t_next - t, Integration::BackwardEuler);
                        record(t_next);
                        t = t_next;
                        break;
                    }
                }
                if (ok) {
                    mna.update_dynamic_currents(t_next - t, opt.integration);
                    record(t_next);
                    t = t_next;
                    break;
                }
                mna.state() = saved;
                h /= 2.0;
                if (h < h_min) throw StepUnderflow(t, h);
            }
        }
        t = target;
    }
    return res;
}

/// Trapezoidal quadrature of one source current over [t0, t1].
inline double supply_current_integral(const TransientResult& res, const std::string& vsource,
                                      double t0, double t1) {
    if (t1 < t0) throw Error("inverted integration interval");
    if (res.times.empty() || t0 < res.times.front() - 1e-18 || t1 > res.times.back() + 1e-18)
        throw Error("integration interval outside the simulated span");
    const int col = res.source_column(vsource);

    auto current_at = [&](double t) {
        if (t <= res.times.front()) return res.source_currents.front()[col];
        if (t >= res.times.back()) return res.source_currents.back()[col];
        auto it = std::lower_bound(res.times.begin(), res.times.end(), t);
        std::size_t i = static_cast<std::size_t>(it - res.times.begin());
        if (res.times[i] == t) return res.source_currents[i][col];
        const double ta = res.times[i - 1], tb = res.times[i];
        const double ia = res.source_currents[i - 1][col], ib = res.source_currents[i][col];
        return ia + (ib - ia) * (t - ta) / (tb - ta);
    };

    double q = 0.0;
    double prev_t = t0, prev_i = current_at(t0);
    for (std::size_t i = 0; i < res.times.size(); ++i) {
        const double ti = res.times[i];
        if (ti <= t0) continue;
        if (ti >= t1) break;
        q += 0.5 * (prev_i + res.source_currents[i][col]) * (ti - prev_t);
        prev_t = ti;
        prev_i = res.source_currents[i][col];
    }
    q += 0.5 * (prev_i + current_at(t1)) * (t1 - prev_t);
    return q;
}

}  // namespace dlcsim
