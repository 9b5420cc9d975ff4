#include "wkbsplit/harness.hpp"

#include "wkbsplit/errors.hpp"
#include "wkbsplit/svg_plot.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace wkbsplit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("harness: " + msg);
}

void check_keys(const json& j, const char* where,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok) fail(std::string(where) + ": unknown key '" + it.key() + "'");
    }
}

std::vector<double> per_axis(const json& j, int dim, const char* what) {
    std::vector<double> out;
    if (j.is_array()) {
        out = j.get<std::vector<double>>();
        if (static_cast<int>(out.size()) != dim)
            fail(std::string(what) + " needs one entry per axis");
    } else {
        out.assign(dim, j.get<double>());
    }
    return out;
}

Grid parse_grid(const json& j) {
    if (!j.is_object()) fail("grid must be an object");
    check_keys(j, "grid", {"dim", "n", "length", "xmin"});
    if (!j.contains("dim") || !j.contains("n") || !j.contains("length"))
        fail("grid needs dim, n, length");
    int dim = j.at("dim").get<int>();
    if (dim < 1 || dim > 3) fail("grid dim must be 1, 2 or 3");
    std::vector<int> n;
    if (j.at("n").is_array())
        n = j.at("n").get<std::vector<int>>();
    else
        n.assign(dim, j.at("n").get<int>());
    std::vector<double> len = per_axis(j.at("length"), dim, "grid length");
    std::vector<double> xmin;
    if (j.contains("xmin"))
        xmin = per_axis(j.at("xmin"), dim, "grid xmin");
    else
        for (double L : len) xmin.push_back(-0.5 * L);
    return Grid::make(dim, n, len, xmin);
}

NonlinearitySpec parse_nonlinearity(const json& j) {
    if (!j.is_object()) fail("nonlinearity must be an object");
    check_keys(j, "nonlinearity", {"alpha", "kernel", "local"});
    if (!j.contains("alpha")) fail("nonlinearity needs alpha");
    double alpha = j.at("alpha").get<double>();
    std::optional<KernelSpec> kernel;
    if (j.contains("kernel")) {
        const json& k = j.at("kernel");
        check_keys(k, "kernel", {"type", "lambda", "dim"});
        std::string type = k.at("type").get<std::string>();
        double lambda = k.value("lambda", 1.0);
        if (type == "smoothed")
            kernel = KernelSpec::smoothed(lambda);
        else if (type == "poisson")
            kernel = KernelSpec::poisson(lambda, k.value("dim", 3));
        else
            fail("kernel type must be smoothed or poisson");
    }
    std::optional<LocalTerm> local;
    if (j.contains("local")) {
        const json& l = j.at("local");
        check_keys(l, "local", {"type", "c"});
        if (l.at("type").get<std::string>() != "cubic")
            fail("local type must be cubic");
        local = LocalTerm::cubic(l.value("c", 1.0));
    }
    return NonlinearitySpec::make(std::move(kernel), std::move(local), alpha);
}

XFlowConfig parse_xflow(const json& j) {
    check_keys(j, "xflow",
               {"c_cfl", "dealias", "tol", "hessian_factor", "max_doublings"});
    XFlowConfig cfg;
    cfg.c_cfl = j.value("c_cfl", cfg.c_cfl);
    cfg.dealias = j.value("dealias", cfg.dealias);
    cfg.tol = j.value("tol", cfg.tol);
    cfg.hessian_factor = j.value("hessian_factor", cfg.hessian_factor);
    cfg.max_doublings = j.value("max_doublings", cfg.max_doublings);
    return cfg;
}

RealField initial_phase(const ScenarioConfig& cfg) {
    const Grid& g = cfg.grid;
    double beta = cfg.beta;
    if (cfg.phase == "zero") return RealField(g, 0.0);
    if (cfg.phase == "gaussian-bump")
        return sample_real(g, [&](const std::array<double, 3>& x) {
            double r2 = 0.0;
            for (int a = 0; a < g.dim(); ++a) r2 += x[a] * x[a];
            return beta * std::exp(-0.5 * r2);
        });
    if (cfg.phase == "cosine")
        return sample_real(g, [&](const std::array<double, 3>& x) {
            double s = 0.0;
            for (int a = 0; a < g.dim(); ++a)
                s += std::cos(2.0 * M_PI * x[a] / g.length(a));
            return -beta * s;
        });
    fail("phase must be zero, gaussian-bump or cosine");
}

// Resolves T (half the caustic estimate when unset) and dt_over_T divisors,
// then checks the sweep invariants. Shared by the parser and the presets.
void finalize(ScenarioConfig& cfg, const std::vector<double>& dt_over_T) {
    if (cfg.nonlinearity.has_value() == cfg.potential.has_value())
        fail("exactly one of nonlinearity and potential is required");
    if (cfg.potential && cfg.representation != "wavefunction")
        fail("a potential run needs representation wavefunction");
    if (cfg.representation != "wavefunction" && cfg.representation != "wkb" &&
        cfg.representation != "both")
        fail("representation must be wavefunction, wkb or both");
    if (cfg.phase != "zero" && cfg.phase != "gaussian-bump" &&
        cfg.phase != "cosine")
        fail("phase must be zero, gaussian-bump or cosine");
    if (cfg.eps_list.empty()) fail("eps list must not be empty");
    for (double e : cfg.eps_list)
        if (!(e > 0.0) || e > 1.0) fail("every eps must lie in (0, 1]");
    if (!(cfg.s > 0.0)) fail("s must be positive");
    if (!(cfg.ref_tol > 0.0)) fail("ref_tol must be positive");
    if (!(cfg.beta >= 0.0)) fail("beta must be nonnegative");

    if (cfg.T == 0.0) {
        double tstar = caustic_time(gradient(initial_phase(cfg)));
        if (!std::isfinite(tstar))
            fail("no caustic estimate for this phase, set T explicitly");
        cfg.T = 0.5 * tstar;
    }
    if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) fail("T must be positive");

    if (!dt_over_T.empty()) {
        if (!cfg.dt_list.empty()) fail("give either dt or dt_over_T, not both");
        for (double m : dt_over_T) {
            if (!(m >= 1.0) || m != std::floor(m))
                fail("dt_over_T entries must be positive integers");
            cfg.dt_list.push_back(cfg.T / m);
        }
    }
    if (cfg.dt_list.empty()) fail("dt list must not be empty");
    for (double dt : cfg.dt_list) {
        if (!(dt > 0.0) || dt > cfg.T * (1.0 + 1e-12))
            fail("every dt must lie in (0, T]");
        double k = cfg.T / dt;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k))
            fail("T must be an integer multiple of every dt");
    }
}

int thread_cap() {
    if (const char* env = std::getenv("WKBSPLIT_THREADS")) {
        int k = std::atoi(env);
        if (k >= 1) return k;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

double max_l1_linf(const RealField& d) {
    return std::max(norm(d, NormKind::L1()), norm(d, NormKind::Linf()));
}

// Per-eps shared data: references and the observable fields they induce.
struct EpsRefs {
    bool ok = false;
    std::string guard;
    WKBState wkb_ref;
    WaveFunction wave_ref;
    RealField rho_ref;
    std::vector<RealField> j_ref;
};

SchemeSpec cell_scheme(const ScenarioConfig& cfg, double dt) {
    SchemeSpec s = cfg.nonlinearity ? SchemeSpec::lie(dt, *cfg.nonlinearity)
                                    : SchemeSpec::lie(dt, *cfg.potential);
    s.composition = cfg.scheme;
    return s;
}

WKBState run_wkb_numeric(const ScenarioConfig& cfg, WKBState s, double dt,
                         long steps) {
    const NonlinearitySpec& nl = *cfg.nonlinearity;
    for (long k = 0; k < steps; ++k) {
        if (cfg.scheme == SchemeSpec::Composition::Lie) {
            s = lie_wkb_step(s, dt, nl, cfg.xcfg);
        } else {
            s = x_flow(s, 0.5 * dt, cfg.xcfg);
            s = y_flow(s, dt, nl);
            s = x_flow(s, 0.5 * dt, cfg.xcfg);
        }
    }
    return s;
}

ScenarioConfig parse_config(const std::string& text) {
    json j = json::parse(text);
    if (!j.is_object()) fail("config must be a JSON object");
    check_keys(j, "config",
               {"grid", "phase", "beta", "nonlinearity", "potential", "eps",
                "dt", "dt_over_T", "T", "scheme", "representation", "out_dir",
                "s", "ref_tol", "xflow"});
    if (!j.contains("grid")) fail("config needs a grid");
    if (!j.contains("eps")) fail("config needs an eps list");

    ScenarioConfig cfg;
    cfg.grid = parse_grid(j.at("grid"));
    cfg.phase = j.value("phase", cfg.phase);
    cfg.beta = j.value("beta", cfg.beta);
    if (j.contains("nonlinearity"))
        cfg.nonlinearity = parse_nonlinearity(j.at("nonlinearity"));
    if (j.contains("potential")) {
        if (j.at("potential").get<std::string>() != "harmonic")
            fail("potential must be \"harmonic\"");
        cfg.potential = PotentialSpec::harmonic();
    }
    cfg.eps_list = j.at("eps").get<std::vector<double>>();
    if (j.contains("dt")) cfg.dt_list = j.at("dt").get<std::vector<double>>();
    std::vector<double> dt_over_T;
    if (j.contains("dt_over_T"))
        dt_over_T = j.at("dt_over_T").get<std::vector<double>>();
    cfg.T = j.value("T", 0.0);
    std::string scheme = j.value("scheme", std::string("lie"));
    if (scheme == "lie")
        cfg.scheme = SchemeSpec::Composition::Lie;
    else if (scheme == "strang")
        cfg.scheme = SchemeSpec::Composition::Strang;
    else
        fail("scheme must be lie or strang");
    cfg.representation = j.value("representation", cfg.representation);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.s = j.value("s", std::ceil(0.5 * cfg.grid.dim() + 3.0));
    cfg.ref_tol = j.value("ref_tol", cfg.ref_tol);
    if (j.contains("xflow")) cfg.xcfg = parse_xflow(j.at("xflow"));

    finalize(cfg, dt_over_T);
    return cfg;
}

}  // namespace

ScenarioConfig ScenarioConfig::from_json_text(const std::string& text) {
    try {
        return parse_config(text);
    } catch (const json::exception& e) {
        fail(std::string("bad config: ") + e.what());
    }
}

ScenarioConfig ScenarioConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail("cannot open config file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::vector<std::string> ScenarioConfig::preset_names() {
    return {"smoothed1d", "poisson3d", "cubic-weak", "harmonic-linear"};
}

ScenarioConfig ScenarioConfig::preset(const std::string& name) {
    ScenarioConfig cfg;
    std::vector<double> over;
    if (name == "smoothed1d") {
        cfg.grid = Grid::make(1, {1024}, {32.0}, {-16.0});
        cfg.nonlinearity = NonlinearitySpec::make(KernelSpec::smoothed(1.0),
                                                  std::nullopt, 0.0);
        cfg.eps_list = {0.5, 0.1, 0.01};
        over = {20, 40, 80, 160, 320};
        cfg.out_dir = "runs/smoothed1d";
    } else if (name == "poisson3d") {
        cfg.grid = Grid::make(3, {16, 16, 16}, {16.0, 16.0, 16.0},
                              {-8.0, -8.0, -8.0});
        cfg.nonlinearity = NonlinearitySpec::make(KernelSpec::poisson(1.0, 3),
                                                  std::nullopt, 0.0);
        cfg.eps_list = {0.5, 0.25};
        cfg.T = 0.4;
        over = {10, 20, 40};
        cfg.out_dir = "runs/poisson3d";
    } else if (name == "cubic-weak") {
        cfg.grid = Grid::make(1, {512}, {32.0}, {-16.0});
        cfg.nonlinearity = NonlinearitySpec::make(
            std::nullopt, LocalTerm::cubic(1.0), 1.0);
        cfg.eps_list = {0.1, 0.01};
        over = {20, 40, 80, 160};
        cfg.out_dir = "runs/cubic-weak";
    } else if (name == "harmonic-linear") {
        cfg.grid = Grid::make(1, {512}, {32.0}, {-16.0});
        cfg.phase = "zero";
        cfg.potential = PotentialSpec::harmonic();
        cfg.representation = "wavefunction";
        cfg.eps_list = {0.5};
        cfg.T = 2.0 * M_PI;
        over = {20, 40, 80, 160};
        cfg.out_dir = "runs/harmonic-linear";
    } else {
        fail("unknown preset '" + name + "'");
    }
    cfg.s = std::ceil(0.5 * cfg.grid.dim() + 3.0);
    finalize(cfg, over);
    return cfg;
}

WKBState initial_state(const ScenarioConfig& cfg, double eps) {
    const Grid& g = cfg.grid;
    ComplexField amp = sample_complex(g, [&](const std::array<double, 3>& x) {
        double r2 = 0.0;
        for (int a = 0; a < g.dim(); ++a) r2 += x[a] * x[a];
        return cplx(std::exp(-r2), 0.0);
    });
    return WKBState::make(initial_phase(cfg), std::move(amp), eps);
}

WaveFunction initial_wave(const ScenarioConfig& cfg, double eps) {
    return reconstruct(initial_state(cfg, eps));
}

RunResult run_sweep(const ScenarioConfig& cfg_in) {
    // validate (and resolve a defaulted T) even when the struct was filled in
    // by hand rather than parsed
    ScenarioConfig cfg = cfg_in;
    finalize(cfg, {});

    const bool want_wkb =
        cfg.representation == "wkb" || cfg.representation == "both";
    const bool want_wave =
        cfg.representation == "wavefunction" || cfg.representation == "both";

    // one reference per eps, computed up front
    std::vector<EpsRefs> refs(cfg.eps_list.size());
    for (std::size_t ie = 0; ie < cfg.eps_list.size(); ++ie) {
        EpsRefs& r = refs[ie];
        double eps = cfg.eps_list[ie];
        try {
            if (want_wkb) {
                r.wkb_ref = grenier_flow(initial_state(cfg, eps), cfg.T, cfg.T,
                                         *cfg.nonlinearity, cfg.xcfg);
                r.rho_ref = wkb_density(r.wkb_ref);
                r.j_ref = wkb_current(r.wkb_ref);
            }
            if (want_wave) {
                r.wave_ref =
                    reference_solution(initial_wave(cfg, eps),
                                       cell_scheme(cfg, cfg.T), cfg.T, cfg.ref_tol);
                if (!want_wkb) {
                    r.rho_ref = density(r.wave_ref);
                    r.j_ref = current(r.wave_ref);
                }
            }
            r.ok = true;
        } catch (const GuardTrip& g) {
            r.guard = g.guard();
        }
    }

    RunResult out;
    out.cells.resize(cfg.eps_list.size() * cfg.dt_list.size());

    auto run_cell = [&](std::size_t flat) {
        std::size_t ie = flat / cfg.dt_list.size();
        std::size_t id = flat % cfg.dt_list.size();
        SweepCell& cell = out.cells[flat];
        cell.eps = cfg.eps_list[ie];
        cell.dt = cfg.dt_list[id];
        cell.steps = std::lround(cfg.T / cell.dt);
        const double nan = std::numeric_limits<double>::quiet_NaN();
        cell.err_l2_wave = cell.err_amp = cell.err_gradphase = nan;
        cell.err_phase_inf = cell.err_rho = cell.err_J = nan;

        const EpsRefs& r = refs[ie];
        if (!r.ok) {
            cell.failed = true;
            cell.guard = r.guard;
            return;
        }
        auto t0 = std::chrono::steady_clock::now();
        try {
            if (want_wkb) {
                WKBState s = run_wkb_numeric(cfg, initial_state(cfg, cell.eps),
                                             cell.dt, cell.steps);
                WkbError e = wkb_error(s, r.wkb_ref, cfg.s);
                cell.err_amp = e.e_amp;
                cell.err_gradphase = e.e_gradphase;
                cell.err_phase_inf = e.e_phase_inf;
                cell.err_rho = max_l1_linf(wkb_density(s) - r.rho_ref);
                double ej = 0.0;
                std::vector<RealField> j = wkb_current(s);
                for (std::size_t a = 0; a < j.size(); ++a)
                    ej = std::max(ej, max_l1_linf(j[a] - r.j_ref[a]));
                cell.err_J = ej;
            }
            if (want_wave) {
                EvolveResult res = evolve(initial_wave(cfg, cell.eps),
                                          cell_scheme(cfg, cell.dt), cfg.T);
                cell.err_l2_wave =
                    norm(res.state.field - r.wave_ref.field, NormKind::L2());
                if (!want_wkb) {
                    cell.err_rho = max_l1_linf(density(res.state) - r.rho_ref);
                    double ej = 0.0;
                    std::vector<RealField> j = current(res.state);
                    for (std::size_t a = 0; a < j.size(); ++a)
                        ej = std::max(ej, max_l1_linf(j[a] - r.j_ref[a]));
                    cell.err_J = ej;
                }
            }
        } catch (const GuardTrip& g) {
            cell.failed = true;
            cell.guard = g.guard();
            cell.err_l2_wave = cell.err_amp = cell.err_gradphase = nan;
            cell.err_phase_inf = cell.err_rho = cell.err_J = nan;
        }
        cell.walltime_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
    };

    int workers = std::min<int>(thread_cap(), static_cast<int>(out.cells.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < out.cells.size(); ++i) run_cell(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr first_error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= out.cells.size()) return;
                    try {
                        run_cell(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(error_mutex);
                        if (!first_error) first_error = std::current_exception();
                    }
                }
            });
        for (auto& t : pool) t.join();
        if (first_error) std::rethrow_exception(first_error);
    }

    // reconstruction of the phase/amplitude reference against the
    // wavefunction reference, at the cheapest (largest) eps
    if (want_wkb && cfg.nonlinearity) {
        std::size_t best = 0;
        for (std::size_t ie = 1; ie < cfg.eps_list.size(); ++ie)
            if (cfg.eps_list[ie] > cfg.eps_list[best]) best = ie;
        if (refs[best].ok) {
            try {
                double eps = cfg.eps_list[best];
                WaveFunction wref =
                    want_wave ? refs[best].wave_ref
                              : reference_solution(initial_wave(cfg, eps),
                                                   cell_scheme(cfg, cfg.T),
                                                   cfg.T, cfg.ref_tol);
                out.crosscheck_l2 =
                    norm(reconstruct(refs[best].wkb_ref).field - wref.field,
                         NormKind::L2());
            } catch (const GuardTrip&) {
            } catch (const std::runtime_error&) {
            }
        }
    }
    return out;
}

OrderEstimate estimate_order(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.size() < 3)
        throw std::invalid_argument("estimate_order: needs at least three pairs");
    OrderEstimate est;
    std::vector<double> lx, ly;
    for (const auto& [dt, err] : pairs) {
        if (!(dt > 0.0) || !std::isfinite(dt))
            throw std::invalid_argument("estimate_order: dt must be positive");
        if (!(err > 0.0) || !std::isfinite(err)) {
            est.degenerate = true;
            return est;
        }
        lx.push_back(std::log(dt));
        ly.push_back(std::log(err));
    }
    double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        est.degenerate = true;
        return est;
    }
    est.slope = sxy / sxx;
    double ssres = syy - sxy * sxy / sxx;
    est.r2 = 1.0 - ssres / syy;
    return est;
}

namespace {

std::string num_field(double x) {
    if (std::isnan(x)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

void emit_csv(const RunResult& table, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
    out << "eps,dt,err_l2_wave,err_amp,err_gradphase,err_phase_inf,"
           "err_rho,err_J,walltime_s,steps\n";
    for (const SweepCell& c : table.cells) {
        out << num_field(c.eps) << ',' << num_field(c.dt) << ','
            << num_field(c.err_l2_wave) << ',' << num_field(c.err_amp) << ','
            << num_field(c.err_gradphase) << ',' << num_field(c.err_phase_inf)
            << ',' << num_field(c.err_rho) << ',' << num_field(c.err_J) << ','
            << num_field(c.walltime_s) << ',' << c.steps << '\n';
    }
    if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

void emit_svg(const RunResult& table, const std::string& path) {
    bool wkbish = false;
    for (const SweepCell& c : table.cells)
        if (std::isfinite(c.err_amp)) wkbish = true;

    std::vector<SvgSeries> series;
    for (const SweepCell& c : table.cells) {
        double y = wkbish ? c.err_amp + c.err_gradphase + c.err_phase_inf
                          : c.err_l2_wave;
        char label[40];
        std::snprintf(label, sizeof label, "eps=%g", c.eps);
        SvgSeries* s = nullptr;
        for (auto& cand : series)
            if (cand.label == label) s = &cand;
        if (!s) {
            series.push_back({label, {}});
            s = &series.back();
        }
        s->points.push_back({c.dt, y});
    }
    for (auto& s : series)
        std::sort(s.points.begin(), s.points.end(),
                  [](const auto& a, const auto& b) { return a[0] < b[0]; });
    write_loglog_svg(path, "splitting error vs step size", "dt", "error",
                     series);
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_csv: cannot open " + path);
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::size_t start = 0;
        for (;;) {
            std::size_t comma = line.find(',', start);
            fields.push_back(line.substr(
                start, comma == std::string::npos ? comma : comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (first) {
            table.header = fields;
            first = false;
            continue;
        }
        std::vector<double> row;
        for (const std::string& f : fields) {
            char* end = nullptr;
            double x = std::strtod(f.c_str(), &end);
            row.push_back(end == f.c_str()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : x);
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace wkbsplit
