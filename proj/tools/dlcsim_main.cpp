// dlcsim: generation, simulation, measurement and variation analysis of
// clocked dynamic-latch comparators.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dlcsim/dlcsim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct GlobalOpts {
    std::uint64_t seed = 0;
    std::string dt_max;
    std::string integration = "trap";
    std::string output;
    std::string format;
    int threads = 0;
};

double parse_si_or_die(const std::string& text, const std::string& flag) {
    auto v = dlcsim::si::parse(text);
    if (!v) throw CLI::ValidationError(flag, "malformed value '" + text + "'");
    return *v;
}

dlcsim::SolverOptions solver_options(const GlobalOpts& g) {
    dlcsim::SolverOptions opt;
    if (!g.dt_max.empty()) opt.dt_max = parse_si_or_die(g.dt_max, "--dt-max");
    if (g.integration == "be")
        opt.integration = dlcsim::Integration::BackwardEuler;
    else if (g.integration != "trap")
        throw CLI::ValidationError("--integration", "must be 'trap' or 'be'");
    return opt;
}

/// Writes to the -o path, or stdout when no path is given.
int emit(const GlobalOpts& g, const std::string& text) {
    if (g.output.empty()) {
        std::cout << text;
        return kExitOk;
    }
    std::ofstream out(g.output, std::ios::binary);
    if (!out) {
        std::cerr << "error: cannot write '" << g.output << "'\n";
        return kExitRuntime;
    }
    out << text;
    return out.good() ? kExitOk : kExitRuntime;
}

dlcsim::TopologyId topology_or_die(const std::string& name) {
    auto id = dlcsim::topology_from_string(name);
    if (!id)
        throw CLI::ValidationError(
            "topology", "unknown topology '" + name + "' (csdlc, msadlc, design1, design2, design3)");
    return *id;
}

std::string format_or(const GlobalOpts& g, const char* fallback) {
    return g.format.empty() ? fallback : g.format;
}

// --------------------------------------------------------------------------
// Bench flags shared by measure/report/mc/corners/sweep
// --------------------------------------------------------------------------

struct BenchFlags {
    std::string vdd, vref, fclk, cload, rsource, offset_step, offset_start, offset_stop;
    bool no_hysteresis = false;

    void add_to(CLI::App* cmd) {
        cmd->add_option("--vdd", vdd, "supply voltage [V]");
        cmd->add_option("--vref", vref, "reference voltage [V]");
        cmd->add_option("--f-clk", fclk, "clock frequency [Hz]");
        cmd->add_option("--c-load", cload, "output load capacitance [F]");
        cmd->add_option("--rsource", rsource, "kickback source resistance [Ohm]");
        cmd->add_option("--offset-step", offset_step, "offset ramp increment per period [V]");
        cmd->add_option("--offset-start", offset_start, "offset ramp start [V]");
        cmd->add_option("--offset-stop", offset_stop, "offset ramp stop [V]");
        cmd->add_flag("--no-hysteresis", no_hysteresis, "skip the falling-ramp offset diagnostic");
    }

    dlcsim::TestbenchSpec build() const {
        dlcsim::TestbenchSpec b;
        if (!vdd.empty()) b.vdd = parse_si_or_die(vdd, "--vdd");
        if (!vref.empty()) b.vref = parse_si_or_die(vref, "--vref");
        if (!fclk.empty()) b.f_clk = parse_si_or_die(fclk, "--f-clk");
        if (!cload.empty()) b.c_load = parse_si_or_die(cload, "--c-load");
        if (!rsource.empty()) b.kickback_rsource = parse_si_or_die(rsource, "--rsource");
        if (!offset_step.empty())
            b.offset_step_per_period = parse_si_or_die(offset_step, "--offset-step");
        if (!offset_start.empty()) b.offset_ramp_start = parse_si_or_die(offset_start, "--offset-start");
        if (!offset_stop.empty()) b.offset_ramp_stop = parse_si_or_die(offset_stop, "--offset-stop");
        if (no_hysteresis) b.measure_hysteresis = false;
        return b;
    }
};

std::string metrics_table_row(const std::string& name, const dlcsim::ComparatorMetrics& m) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-34s %10.2f %10.3f %10.3f %10.2f %10.3f %10.4f\n",
                  name.c_str(), m.avg_delay_s * 1e12, m.avg_power_w * 1e6, m.pdp_j * 1e15,
                  m.offset_v * 1e3, m.clock_feedthrough_v, m.kickback_v);
    return buf;
}

std::string metrics_table_header() {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-34s %10s %10s %10s %10s %10s %10s\n", "topology",
                  "delay/ps", "power/uW", "pdp/fJ", "offset/mV", "feedthru/V", "kickback/V");
    return buf;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"clocked dynamic-latch comparator simulation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "config file mirroring long flag names");

    GlobalOpts g;
    app.add_option("--seed", g.seed, "random seed for Monte-Carlo commands");
    app.add_option("--dt-max", g.dt_max, "maximum transient step (SI suffixes accepted)");
    app.add_option("--integration", g.integration, "integration method: trap|be");
    app.add_option("-o,--output", g.output, "output file (default stdout)");
    app.add_option("--format", g.format, "output format: table|json|csv");
    app.add_option("--threads", g.threads, "worker threads for Monte-Carlo");

    // gen ------------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a comparator netlist");
    std::string gen_topology;
    bool with_testbench = false;
    gen->add_option("topology", gen_topology, "csdlc|msadlc|design1|design2|design3")->required();
    gen->add_flag("--with-testbench", with_testbench, "include the stimulus sources");

    // tran -----------------------------------------------------------------
    auto* tran = app.add_subcommand("tran", "run a transient analysis, emit waveform CSV");
    std::string tran_path;
    tran->add_option("netlist", tran_path, "netlist file")->required();

    // measure ---------------------------------------------------------------
    auto* measure = app.add_subcommand("measure", "characterize one topology");
    std::string measure_topology;
    measure->add_option("topology", measure_topology)->required();
    BenchFlags measure_bench;
    measure_bench.add_to(measure);

    // report -----------------------------------------------------------------
    auto* report = app.add_subcommand("report", "benchmark table over topologies");
    std::vector<std::string> report_topologies;
    report->add_option("topologies", report_topologies, "default: all five");
    BenchFlags report_bench;
    report_bench.add_to(report);

    // analytic ----------------------------------------------------------------
    auto* analytic = app.add_subcommand("analytic", "closed-form delay/power/offset models");
    std::string a_cload = "10f", a_vthp = "0.45", a_itail = "100u", a_gmeff = "200u",
                a_vdd = "1.8", a_beta = "680u", a_dvin = "10m", a_charge = "0", a_fclk = "100meg",
                a_dvt = "0", a_ovd = "0.2", a_drl = "0", a_dbeta = "0";
    analytic->add_option("--c-load", a_cload, "load capacitance [F]");
    analytic->add_option("--v-thp", a_vthp, "|PMOS threshold| [V]");
    analytic->add_option("--i-tail", a_itail, "tail current [A]");
    analytic->add_option("--gm-eff", a_gmeff, "regeneration transconductance [S]");
    analytic->add_option("--vdd", a_vdd, "supply [V]");
    analytic->add_option("--beta", a_beta, "input-pair current factor [A/V^2]");
    analytic->add_option("--dv-in", a_dvin, "input differential voltage [V]");
    analytic->add_option("--supply-charge", a_charge, "charge per period [C]");
    analytic->add_option("--f-clk", a_fclk, "clock frequency [Hz]");
    analytic->add_option("--d-vt", a_dvt, "threshold mismatch [V]");
    analytic->add_option("--overdrive", a_ovd, "V_gs - V_T [V]");
    analytic->add_option("--d-rl-over-r", a_drl, "load mismatch ratio");
    analytic->add_option("--d-beta-over-beta", a_dbeta, "current-factor mismatch ratio");

    // mc ------------------------------------------------------------------
    auto* mc = app.add_subcommand("mc", "Monte-Carlo mismatch analysis");
    std::string mc_topology, mc_metric = "offset_v", mc_avt = "5n", mc_abeta = "10n";
    int mc_n = 100, mc_hist_bins = 0;
    std::vector<std::string> mc_devices;
    mc->add_option("topology", mc_topology)->required();
    mc->add_option("--metric", mc_metric, "one of the six metric fields");
    mc->add_option("--n", mc_n, "sample count");
    mc->add_option("--a-vt", mc_avt, "Pelgrom threshold coefficient [V*m]");
    mc->add_option("--a-beta", mc_abeta, "Pelgrom beta coefficient [m]");
    mc->add_option("--devices", mc_devices, "restrict mismatch to these devices")->delimiter(',');
    mc->add_option("--hist-bins", mc_hist_bins, "emit histogram data with this many bins");
    BenchFlags mc_bench;
    mc_bench.add_to(mc);

    // corners ----------------------------------------------------------------
    auto* corners_cmd = app.add_subcommand("corners", "process-corner analysis");
    std::string corners_topology;
    corners_cmd->add_option("topology", corners_topology)->required();
    BenchFlags corners_bench;
    corners_bench.add_to(corners_cmd);

    // sweep -----------------------------------------------------------------
    auto* sweep_cmd = app.add_subcommand("sweep", "parameter sweep");
    std::string sweep_topology, sweep_param, sweep_metric;
    std::vector<std::string> sweep_values;
    sweep_cmd->add_option("topology", sweep_topology)->required();
    sweep_cmd->add_option("--param", sweep_param, "device.w, model.kp or bench.vref")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--metric", sweep_metric, "restrict output to one metric");
    BenchFlags sweep_bench;
    sweep_bench.add_to(sweep_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            const dlcsim::TopologyId id = topology_or_die(gen_topology);
            dlcsim::TestbenchStimulus stim;
            const dlcsim::Netlist net =
                dlcsim::generate_topology(id, {}, with_testbench ? &stim : nullptr);
            return emit(g, dlcsim::print(net));
        }

        if (tran->parsed()) {
            std::ifstream in(tran_path);
            if (!in) {
                std::cerr << "error: cannot read '" << tran_path << "'\n";
                return kExitRuntime;
            }
            std::stringstream ss;
            ss << in.rdbuf();
            const dlcsim::Netlist net = dlcsim::parse(ss.str());
            if (!net.tran_directive()) {
                std::cerr << "error: netlist has no .tran directive\n";
                return kExitUsage;
            }
            const auto start = std::chrono::steady_clock::now();
            const dlcsim::TransientResult res = dlcsim::transient(net, solver_options(g));
            const auto wall =
                std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start);
            std::fprintf(stderr, "transient: %zu points, %.1f ms\n", res.times.size(),
                         wall.count());
            return emit(g, res.to_csv());
        }

        if (measure->parsed()) {
            const dlcsim::TopologyId id = topology_or_die(measure_topology);
            const dlcsim::TestbenchSpec bench = measure_bench.build();
            const dlcsim::Netlist bare = dlcsim::generate_topology(id);
            const dlcsim::CharacterizeResult r =
                dlcsim::characterize_netlist(bare, bench, solver_options(g));
            for (const auto& [proc, msg] : r.failures)
                std::cerr << "warning: " << proc << " failed: " << msg << "\n";
            if (format_or(g, "json") == "table") {
                std::string text = metrics_table_header() +
                                   metrics_table_row(dlcsim::topology_name(id), r.metrics);
                return emit(g, text);
            }
            return emit(g, dlcsim::metrics_to_json(r.metrics, dlcsim::topology_name(id)).dump(2) +
                               "\n");
        }

        if (report->parsed()) {
            std::vector<dlcsim::TopologyId> ids;
            if (report_topologies.empty())
                ids.assign(std::begin(dlcsim::kAllTopologies), std::end(dlcsim::kAllTopologies));
            else
                for (const auto& t : report_topologies) ids.push_back(topology_or_die(t));
            const dlcsim::BenchmarkReport rep =
                dlcsim::build_report(ids, report_bench.build(), solver_options(g));
            if (format_or(g, "table") == "json")
                return emit(g, dlcsim::report_to_json(rep).dump(2) + "\n");
            return emit(g, dlcsim::render_report(rep));
        }

        if (analytic->parsed()) {
            try {
                dlcsim::DelayModelInputs in;
                in.c_load = parse_si_or_die(a_cload, "--c-load");
                in.v_thp = parse_si_or_die(a_vthp, "--v-thp");
                in.i_tail = parse_si_or_die(a_itail, "--i-tail");
                in.gm_eff = parse_si_or_die(a_gmeff, "--gm-eff");
                in.vdd = parse_si_or_die(a_vdd, "--vdd");
                in.beta = parse_si_or_die(a_beta, "--beta");
                in.dv_in = parse_si_or_die(a_dvin, "--dv-in");
                dlcsim::OffsetModelInputs off;
                off.d_vt = parse_si_or_die(a_dvt, "--d-vt");
                off.vgs_minus_vt = parse_si_or_die(a_ovd, "--overdrive");
                off.d_rl_over_r = parse_si_or_die(a_drl, "--d-rl-over-r");
                off.d_beta_over_beta = parse_si_or_die(a_dbeta, "--d-beta-over-beta");
                const double charge = parse_si_or_die(a_charge, "--supply-charge");
                const double fclk = parse_si_or_die(a_fclk, "--f-clk");

                const double t0 = dlcsim::discharge_delay(in);
                const double dv0 = dlcsim::initial_imbalance(in);
                const double tl = dlcsim::latch_delay(in, dv0);
                const double tt = t0 + tl;
                const double pavg = dlcsim::average_power(charge, in.vdd, fclk);
                const double vos = dlcsim::offset_voltage(off);
                char buf[512];
                std::snprintf(buf, sizeof(buf),
                              "t0       = %.6g ps\n"
                              "dV0      = %.6g mV\n"
                              "t_latch  = %.6g ps\n"
                              "t_total  = %.6g ps\n"
                              "P_avg    = %.6g uW\n"
                              "V_os     = %.6g mV\n",
                              t0 * 1e12, dv0 * 1e3, tl * 1e12, tt * 1e12, pavg * 1e6, vos * 1e3);
                return emit(g, buf);
            } catch (const dlcsim::DegenerateImbalance& e) {
                std::cerr << "error: --dv-in: " << e.what() << "\n";
                return kExitUsage;
            } catch (const std::invalid_argument& e) {
                std::cerr << "error: " << e.what() << "\n";
                return kExitUsage;
            }
        }

        if (mc->parsed()) {
            const dlcsim::TopologyId id = topology_or_die(mc_topology);
            dlcsim::MismatchSpec spec;
            spec.seed = g.seed;
            spec.n_samples = mc_n;
            spec.a_vt = parse_si_or_die(mc_avt, "--a-vt");
            spec.a_beta = parse_si_or_die(mc_abeta, "--a-beta");
            spec.devices = mc_devices;
            const dlcsim::Distribution dist = dlcsim::monte_carlo(
                id, mc_bench.build(), spec, mc_metric, solver_options(g), g.threads);
            const auto summary = dlcsim::distribution_summary_json(dist, mc_metric, mc_hist_bins);
            if (format_or(g, "csv") == "json") return emit(g, summary.dump(2) + "\n");
            std::cerr << summary.dump() << "\n";
            return emit(g, dist.to_csv());
        }

        if (corners_cmd->parsed()) {
            const dlcsim::TopologyId id = topology_or_die(corners_topology);
            const auto set = dlcsim::default_corners();
            const auto rows =
                dlcsim::corners(id, corners_bench.build(), set, solver_options(g));
            if (format_or(g, "table") == "json") {
                nlohmann::json j;
                for (const auto& [corner, r] : rows)
                    j[corner.name] = dlcsim::metrics_to_json(r.metrics, dlcsim::topology_name(id));
                return emit(g, j.dump(2) + "\n");
            }
            std::string text = metrics_table_header();
            for (const auto& [corner, r] : rows) {
                text += metrics_table_row(corner.name, r.metrics);
                for (const auto& [proc, msg] : r.failures)
                    text += "    ! " + proc + ": " + msg + "\n";
            }
            return emit(g, text);
        }

        if (sweep_cmd->parsed()) {
            const dlcsim::TopologyId id = topology_or_die(sweep_topology);
            std::vector<double> values;
            for (const auto& v : sweep_values) values.push_back(parse_si_or_die(v, "--values"));
            unsigned mask = dlcsim::kAllProcedures;
            if (!sweep_metric.empty()) mask = dlcsim::procedure_mask_for_metric(sweep_metric);
            const auto rows = dlcsim::sweep(id, sweep_bench.build(), sweep_param, values,
                                            solver_options(g), mask);
            std::string csv = "value";
            if (sweep_metric.empty())
                for (const auto& f : dlcsim::ComparatorMetrics::field_names()) csv += "," + f;
            else
                csv += "," + sweep_metric;
            csv += "\n";
            char buf[64];
            for (const auto& [value, r] : rows) {
                std::snprintf(buf, sizeof(buf), "%.17g", value);
                csv += buf;
                if (sweep_metric.empty()) {
                    for (const auto& f : dlcsim::ComparatorMetrics::field_names()) {
                        std::snprintf(buf, sizeof(buf), ",%.17g", r.metrics.field(f));
                        csv += buf;
                    }
                } else {
                    std::snprintf(buf, sizeof(buf), ",%.17g", r.metrics.field(sweep_metric));
                    csv += buf;
                }
                csv += "\n";
            }
            return emit(g, csv);
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
