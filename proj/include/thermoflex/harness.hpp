#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "thermoflex/capability.hpp"
#include "thermoflex/dispatch.hpp"
#include "thermoflex/scenario.hpp"

namespace thermoflex {

// One building's slice of a tick. The CSV schema carries the first block;
// the remaining fields support in-memory audits (observer error, state mass).
struct BuildingTick {
    double cx = 0.0;       // measured output at the start of the tick
    double u = 0.0;        // applied control
    double delta_r = 0.0;  // dispatched ramp
    double dr_min = 0.0;   // published provision thresholds
    double dr_max = 0.0;
    double t_set = 0.0;    // set point after the tick
    double s_accum = 0.0;  // accumulated regulation, appliance-min
    bool sat = false;
    bool sing = false;
    double x_n = 0.0;
    double x_2n = 0.0;
    double mass_sum = 1.0;
    double level = 0.0;      // dispatched regulation level
    double err_norm = 0.0;   // ||x - x_hat|| when the observer runs
    double epsilon = 0.0;    // observer contraction rate at this tick
};

struct IsoTick {
    double delta_p = 0.0;
    double p_spin = 0.0;
    double objective = 0.0;
};

struct SimTrace {
    double dt = 0.0;
    std::vector<std::string> names;
    std::vector<double> baselines;  // sold baseline per building
    std::vector<std::vector<BuildingTick>> ticks;  // [tick][building]
    std::vector<IsoTick> iso;
    std::vector<double> signal;  // aggregate R(t) per tick
    double worst_pre_clamp = 0.0;
    double worst_sum_err = 0.0;

    std::size_t size() const { return iso.size(); }
};

struct StatsTable {
    double total = 0.0;    // sum |p_spin| * dt
    double mean = 0.0;
    double std_dev = 0.0;  // population standard deviation
    double max = 0.0;
    double min = 0.0;
};

struct SimResult {
    SimTrace trace;
    StatsTable stats;
};

// Materialize the scenario's signal source (file, synthetic, or qualification
// profile) on the scenario tick grid.
RegulationSignal make_signal(const Scenario& sc);

// Closed-loop tick engine: publish capability, dispatch, track, step, observe.
SimResult run_simulation(const Scenario& sc);

StatsTable summarize(const SimTrace& trace);

// Fixed schema: tick,t_min,building,cx,u,delta_r,dr_min,dr_max,t_set,s_accum,sat,sing
// with one building=ISO row per tick carrying delta_p,p_spin,objective in the
// cx,u,delta_r slots. Floats at 9 significant digits.
void write_trace_csv(const SimTrace& trace, std::ostream& out);

std::string stats_json(const StatsTable& stats);

// Recompute the spinning statistics from a written trace file.
StatsTable stats_from_trace_csv(const std::string& path);

// Tidy long-format series (t_min,building,series,value) for plotting.
void write_plot_data(const SimTrace& trace, std::ostream& out);

// 50-minute qualification run for one building tracking the test signal with
// its output controller.
struct T50Window {
    double t_begin = 0.0;
    double t_end = 0.0;
    double target = 0.0;    // absolute consumption level
    double err_at_start = 0.0;
    double max_abs_err = 0.0;
    bool rate_ok = false;
    bool sustain_ok = false;
};

struct T50Sample {
    double t_min = 0.0;
    double target = 0.0;
    double cx = 0.0;
    double t_set = 0.0;
};

struct T50Result {
    bool pass = false;
    double r_r = 0.0;
    double tolerance = 0.0;
    std::vector<T50Window> windows;
    double max_tracking_err = 0.0;
    bool any_saturation = false;
    std::vector<T50Sample> series;
};

void write_t50_plot_data(const T50Result& result, std::ostream& out);

T50Result run_t50(const BuildingSpec& spec, double r_r, double dt, const T50Profile& profile,
                  double tolerance = 0.02);
T50Result run_t50(const BuildingSpec& spec, double r_r, double dt, double tolerance = 0.02);

// Bisect the pass/fail capacity between lo and hi (expects pass at lo and
// fail at hi after the initial scan). Returns the boundary estimate.
double sweep_t50_boundary(const BuildingSpec& spec, double lo, double hi, int steps, double dt,
                          double tolerance = 0.02);

}  // namespace thermoflex
