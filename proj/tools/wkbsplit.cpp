#include "wkbsplit/harness.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

using namespace wkbsplit;

namespace {

// slope per error column for each eps group; returns false when no column had
// enough usable points
bool print_orders(const std::vector<std::vector<double>>& rows,
                  const std::vector<std::string>& header) {
    // column 0 is eps, column 1 is dt
    std::vector<double> eps_values;
    for (const auto& r : rows) {
        if (r.size() < 2) continue;
        bool seen = false;
        for (double e : eps_values)
            if (e == r[0]) seen = true;
        if (!seen) eps_values.push_back(r[0]);
    }
    bool any = false;
    for (double eps : eps_values) {
        std::printf("eps = %g\n", eps);
        for (std::size_t col = 2; col < header.size(); ++col) {
            if (header[col] == "walltime_s" || header[col] == "steps") continue;
            std::vector<std::pair<double, double>> pairs;
            for (const auto& r : rows)
                if (r.size() > col && r[0] == eps && r[col] > 0.0 &&
                    std::isfinite(r[col]))
                    pairs.push_back({r[1], r[col]});
            if (pairs.size() < 3) {
                std::printf("  %-14s (not enough points)\n", header[col].c_str());
                continue;
            }
            OrderEstimate est = estimate_order(pairs);
            if (est.degenerate) {
                std::printf("  %-14s degenerate\n", header[col].c_str());
            } else {
                std::printf("  %-14s slope %.3f  (r2 %.4f)\n",
                            header[col].c_str(), est.slope, est.r2);
                any = true;
            }
        }
    }
    return any;
}

int cmd_run(const std::string& config_path, const std::string& scenario,
            const std::string& out_override) {
    ScenarioConfig cfg;
    if (!scenario.empty() && !config_path.empty()) {
        std::fprintf(stderr, "give a config file or --scenario, not both\n");
        return 2;
    }
    if (!scenario.empty())
        cfg = ScenarioConfig::preset(scenario);
    else if (!config_path.empty())
        cfg = ScenarioConfig::from_file(config_path);
    else {
        std::fprintf(stderr, "need a config file or --scenario NAME\n");
        return 2;
    }
    if (!out_override.empty()) cfg.out_dir = out_override;

    std::printf("T = %.6g, %zu eps x %zu dt cells, representation %s\n", cfg.T,
                cfg.eps_list.size(), cfg.dt_list.size(),
                cfg.representation.c_str());

    RunResult table = run_sweep(cfg);

    std::filesystem::create_directories(cfg.out_dir);
    std::string csv = cfg.out_dir + "/results.csv";
    std::string svg = cfg.out_dir + "/results.svg";
    emit_csv(table, csv);
    emit_svg(table, svg);

    std::size_t failed = 0;
    for (const SweepCell& c : table.cells) {
        if (c.failed) {
            ++failed;
            std::printf("eps %-8g dt %-10g FAILED (%s)\n", c.eps, c.dt,
                        c.guard.c_str());
            continue;
        }
        double triple = c.err_amp + c.err_gradphase + c.err_phase_inf;
        std::printf("eps %-8g dt %-10g steps %-6ld", c.eps, c.dt, c.steps);
        if (std::isfinite(triple)) std::printf("  wkb %.3e", triple);
        if (std::isfinite(c.err_l2_wave))
            std::printf("  wave %.3e", c.err_l2_wave);
        if (std::isfinite(c.err_rho))
            std::printf("  rho %.3e  J %.3e", c.err_rho, c.err_J);
        std::printf("  (%.2fs)\n", c.walltime_s);
    }
    if (std::isfinite(table.crosscheck_l2))
        std::printf("reference crosscheck L2 %.3e\n", table.crosscheck_l2);

    // per-eps order of the headline error
    for (double eps : cfg.eps_list) {
        std::vector<std::pair<double, double>> pairs;
        for (const SweepCell& c : table.cells) {
            if (c.failed || c.eps != eps) continue;
            double y = std::isfinite(c.err_amp)
                           ? c.err_amp + c.err_gradphase + c.err_phase_inf
                           : c.err_l2_wave;
            if (y > 0.0 && std::isfinite(y)) pairs.push_back({c.dt, y});
        }
        if (pairs.size() < 3) continue;
        OrderEstimate est = estimate_order(pairs);
        if (!est.degenerate)
            std::printf("eps %-8g observed order %.3f (r2 %.4f)\n", eps,
                        est.slope, est.r2);
    }

    std::printf("wrote %s and %s\n", csv.c_str(), svg.c_str());
    if (failed == table.cells.size()) {
        std::fprintf(stderr, "every cell tripped a guard\n");
        return 3;
    }
    return 0;
}

int cmd_orders(const std::string& csv_path) {
    CsvTable table;
    try {
        table = read_csv(csv_path);
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }
    if (table.header.empty()) {
        std::fprintf(stderr, "%s has no header\n", csv_path.c_str());
        return 2;
    }
    print_orders(table.rows, table.header);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"splitting-scheme convergence laboratory"};
    app.require_subcommand(1);

    std::string config_path, scenario, out_override, csv_path;

    CLI::App* run = app.add_subcommand("run", "run a convergence sweep");
    run->add_option("config", config_path, "scenario config JSON");
    run->add_option("--scenario", scenario, "built-in preset name");
    run->add_option("--out", out_override, "output directory override");

    CLI::App* orders =
        app.add_subcommand("orders", "order estimates from a results CSV");
    orders->add_option("csv", csv_path, "results.csv from a sweep")->required();

    CLI::App* presets = app.add_subcommand("presets", "list preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(config_path, scenario, out_override);
        if (orders->parsed()) return cmd_orders(csv_path);
        if (presets->parsed()) {
            for (const std::string& n : ScenarioConfig::preset_names())
                std::printf("%s\n", n.c_str());
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
