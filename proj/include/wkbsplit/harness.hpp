#pragma once

#include "wkbsplit/grid.hpp"
#include "wkbsplit/limits.hpp"
#include "wkbsplit/nonlinearity.hpp"
#include "wkbsplit/wavefunction.hpp"
#include "wkbsplit/wkb.hpp"

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace wkbsplit {

// A convergence-sweep scenario: fixed initial data and equation, a list of
// eps values and a list of step sizes, one evolution per (eps, dt) cell.
struct ScenarioConfig {
    Grid grid;

    // initial data: amplitude is the Gaussian exp(-|x|^2); the phase is one of
    //   zero, gaussian-bump (beta exp(-|x|^2/2)), cosine (-beta sum_i cos(2 pi x_i / L_i))
    std::string phase = "gaussian-bump";
    double beta = 0.3;

    // exactly one of these drives the kick step
    std::optional<NonlinearitySpec> nonlinearity;
    std::optional<PotentialSpec> potential;

    std::vector<double> eps_list;
    std::vector<double> dt_list;
    double T = 0.0;  // resolved at parse time; defaults to half the caustic estimate

    SchemeSpec::Composition scheme = SchemeSpec::Composition::Lie;
    std::string representation = "wkb";  // wavefunction | wkb | both
    std::string out_dir = "runs";
    double s = 4.0;           // Sobolev index for the error triple
    double ref_tol = 1e-7;    // wavefunction reference accuracy
    XFlowConfig xcfg;

    static ScenarioConfig from_file(const std::string& path);
    static ScenarioConfig from_json_text(const std::string& text);
    static ScenarioConfig preset(const std::string& name);
    static std::vector<std::string> preset_names();
};

// Initial data of the scenario at a given eps, in both representations.
WKBState initial_state(const ScenarioConfig& cfg, double eps);
WaveFunction initial_wave(const ScenarioConfig& cfg, double eps);

struct SweepCell {
    double eps = 0.0;
    double dt = 0.0;
    bool failed = false;
    std::string guard;  // which guard tripped, when failed

    // errors are NaN when not applicable to the representation or failed;
    // observable errors are max(L1, Linf) of the difference, J maxed over
    // components
    double err_l2_wave = 0.0;
    double err_amp = 0.0;
    double err_gradphase = 0.0;
    double err_phase_inf = 0.0;
    double err_rho = 0.0;
    double err_J = 0.0;

    double walltime_s = 0.0;
    long steps = 0;
};

struct RunResult {
    std::vector<SweepCell> cells;  // eps-major, dt-minor, both in config order
    // agreement of the two reference paths (reconstructed grenier_flow vs
    // reference_solution) at the largest eps; NaN when only one path runs
    double crosscheck_l2 = std::numeric_limits<double>::quiet_NaN();
};

// Runs every (eps, dt) cell, sharing one reference per eps. Cells run on a
// worker pool (capped by WKBSPLIT_THREADS); guard trips mark the cell failed
// without stopping the sweep. The assembled table is deterministic.
RunResult run_sweep(const ScenarioConfig& cfg);

struct OrderEstimate {
    double slope = 0.0;
    double r2 = 0.0;
    bool degenerate = false;  // zero spread in dt or in error
};

// Least-squares slope of log(error) against log(dt). Needs at least three
// pairs with positive entries.
OrderEstimate estimate_order(const std::vector<std::pair<double, double>>& pairs);

// CSV with the fixed header
//   eps,dt,err_l2_wave,err_amp,err_gradphase,err_phase_inf,err_rho,err_J,walltime_s,steps
// one row per cell, %.17g formatting, nan for unavailable entries.
void emit_csv(const RunResult& table, const std::string& path);

// Log-log error-vs-dt plot, one polyline per eps. Plots the summed WKB triple
// error when present, the wavefunction L2 error otherwise.
void emit_svg(const RunResult& table, const std::string& path);

// Minimal CSV reader for the files emit_csv writes (used by the orders
// subcommand); non-numeric fields parse as NaN.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
CsvTable read_csv(const std::string& path);

}  // namespace wkbsplit
