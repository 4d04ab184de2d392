// Command-line front end: scenario simulation, qualification runs, capacity
// sweeps, and trace statistics.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "thermoflex/capability.hpp"
#include "thermoflex/harness.hpp"
#include "thermoflex/log.hpp"

namespace tf = thermoflex;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw tf::Error("cannot write " + path);
    out << content;
}

int cmd_simulate(const std::string& scenario_path, const std::string& out_dir,
                 const std::string& dispatch_override, bool emit_plotdata) {
    tf::Scenario sc = tf::load_scenario(scenario_path);
    if (dispatch_override == "optimized") sc.dispatch_mode = tf::DispatchMode::optimized;
    if (dispatch_override == "proportional") sc.dispatch_mode = tf::DispatchMode::proportional;

    const tf::SimResult result = tf::run_simulation(sc);

    std::filesystem::create_directories(out_dir);
    {
        std::ofstream trace_out(out_dir + "/trace.csv", std::ios::binary);
        if (!trace_out) throw tf::Error("cannot write " + out_dir + "/trace.csv");
        tf::write_trace_csv(result.trace, trace_out);
    }
    write_file(out_dir + "/stats.json", tf::stats_json(result.stats));
    if (emit_plotdata) {
        std::ofstream plot_out(out_dir + "/plotdata.csv", std::ios::binary);
        if (!plot_out) throw tf::Error("cannot write " + out_dir + "/plotdata.csv");
        tf::write_plot_data(result.trace, plot_out);
    }

    std::printf("%zu ticks, %zu buildings -> %s/trace.csv\n", result.trace.size(),
                sc.buildings.size(), out_dir.c_str());
    std::printf("spinning reserve: total %.6g  mean %.6g  std %.6g  max %.6g  min %.6g\n",
                result.stats.total, result.stats.mean, result.stats.std_dev, result.stats.max,
                result.stats.min);
    return kExitOk;
}

int cmd_t50(const std::string& scenario_path, double r_r, const std::string& out_dir,
            bool emit_plotdata) {
    const tf::Scenario sc = tf::load_scenario(scenario_path);
    bool all_pass = true;
    for (const tf::BuildingSpec& b : sc.buildings) {
        const tf::T50Result res = tf::run_t50(b, r_r, sc.dt);
        all_pass = all_pass && res.pass;
        std::printf("%-12s %s  (max tracking error %.4g, tolerance %.4g%s)\n", b.name.c_str(),
                    res.pass ? "PASS" : "FAIL", res.max_tracking_err, res.tolerance * r_r,
                    res.any_saturation ? ", saturated" : "");
        for (const tf::T50Window& w : res.windows) {
            std::printf("    hold [%4.1f, %4.1f] min at %10.4g: start err %.4g, max err %.4g  %s\n",
                        w.t_begin, w.t_end, w.target, w.err_at_start, w.max_abs_err,
                        (w.rate_ok && w.sustain_ok) ? "ok" : "violated");
        }
        if (emit_plotdata) {
            std::filesystem::create_directories(out_dir);
            const std::string path = out_dir + "/t50_" + b.name + ".csv";
            std::ofstream plot_out(path, std::ios::binary);
            if (!plot_out) throw tf::Error("cannot write " + path);
            tf::write_t50_plot_data(res, plot_out);
        }
    }
    std::printf("overall: %s\n", all_pass ? "PASS" : "FAIL");
    return kExitOk;
}

int cmd_qualify(const std::string& scenario_path, double k_minutes) {
    const tf::Scenario sc = tf::load_scenario(scenario_path);
    for (const tf::BuildingSpec& b : sc.buildings) {
        const double limit = tf::qualification_limit(b.params, k_minutes);
        std::printf("%-12s qualification limit %.6g appliances (%.6g kW), sold r_r %.6g\n",
                    b.name.c_str(), limit, limit * b.params.rated_power, b.r_r);
    }
    return kExitOk;
}

int cmd_sweep(const std::string& scenario_path, double from, double to, int steps) {
    const tf::Scenario sc = tf::load_scenario(scenario_path);
    for (const tf::BuildingSpec& b : sc.buildings) {
        std::printf("%s:\n", b.name.c_str());
        for (int k = 0; k < steps; ++k) {
            const double r = from + (to - from) * k / (steps - 1);
            const tf::T50Result res = tf::run_t50(b, r, sc.dt);
            std::printf("  r_r %10.4g  %s  (max err %.4g)\n", r, res.pass ? "PASS" : "FAIL",
                        res.max_tracking_err);
        }
        const double boundary = tf::sweep_t50_boundary(b, from, to, steps, sc.dt);
        std::printf("  empirical pass/fail boundary ~ %.6g (closed-form limit %.6g)\n", boundary,
                    tf::qualification_limit(b.params));
    }
    return kExitOk;
}

int cmd_stats(const std::string& trace_path) {
    const tf::StatsTable stats = tf::stats_from_trace_csv(trace_path);
    std::fputs(tf::stats_json(stats).c_str(), stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermostatic fleet regulation simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string out_dir = "out";
    std::string dispatch_override;
    bool emit_plotdata = false;
    double rr = 0.0;
    double k_minutes = 5.0;
    double sweep_from = 0.0;
    double sweep_to = 0.0;
    int sweep_steps = 11;
    std::string trace_path;

    CLI::App* simulate = app.add_subcommand("simulate", "run a scenario end to end");
    simulate->add_option("scenario", scenario_path, "scenario JSON file")->required();
    simulate->add_option("--out", out_dir, "output directory (trace.csv, stats.json)");
    simulate->add_option("--dispatch", dispatch_override, "override dispatch mode")
        ->check(CLI::IsMember({"optimized", "proportional"}));
    simulate->add_flag("--emit-plotdata", emit_plotdata, "also write tidy plot series");

    CLI::App* t50 = app.add_subcommand("t50", "run the 50-minute qualification test");
    t50->add_option("scenario", scenario_path, "scenario JSON file")->required();
    t50->add_option("--rr", rr, "tested capacity")->required();
    t50->add_option("--out", out_dir, "output directory");
    t50->add_flag("--emit-plotdata", emit_plotdata, "also write tidy plot series");

    CLI::App* qualify = app.add_subcommand("qualify", "closed-form qualification limits");
    qualify->add_option("scenario", scenario_path, "scenario JSON file")->required();
    qualify->add_option("--k", k_minutes, "rate-of-response window, minutes");

    CLI::App* sweep = app.add_subcommand("sweep-rr", "sweep tested capacity for pass/fail");
    sweep->add_option("scenario", scenario_path, "scenario JSON file")->required();
    sweep->add_option("--from", sweep_from, "lowest capacity")->required();
    sweep->add_option("--to", sweep_to, "highest capacity")->required();
    sweep->add_option("--steps", sweep_steps, "number of sweep points");

    CLI::App* stats = app.add_subcommand("stats", "recompute statistics from a trace CSV");
    stats->add_option("trace", trace_path, "trace CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) {
            return cmd_simulate(scenario_path, out_dir, dispatch_override, emit_plotdata);
        }
        if (t50->parsed()) return cmd_t50(scenario_path, rr, out_dir, emit_plotdata);
        if (qualify->parsed()) return cmd_qualify(scenario_path, k_minutes);
        if (sweep->parsed()) return cmd_sweep(scenario_path, sweep_from, sweep_to, sweep_steps);
        if (stats->parsed()) return cmd_stats(trace_path);
    } catch (const tf::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const tf::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const tf::ParameterError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRuntime;
    }
    return kExitOk;
}
