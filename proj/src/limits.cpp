#include "wkbsplit/limits.hpp"

#include "wkbsplit/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace wkbsplit {

namespace {

double vec_linf(const std::vector<RealField>& v) {
    double m = 0.0;
    for (const auto& c : v) m = std::max(m, max_abs(c));
    return m;
}

double grad_linf_all(const std::vector<RealField>& v) {
    double m = 0.0;
    for (const auto& c : v)
        for (const auto& g : gradient(c)) m = std::max(m, max_abs(g));
    return m;
}

std::vector<RealField> burgers_rhs(const std::vector<RealField>& v) {
    const int d = v[0].grid.dim();
    std::vector<RealField> out;
    out.reserve(d);
    for (int i = 0; i < d; ++i) {
        auto gi = gradient(v[i]);
        RealField acc(v[i].grid, 0.0);
        for (int j = 0; j < d; ++j)
            for (std::size_t p = 0; p < acc.size(); ++p)
                acc.v[p] -= v[j].v[p] * gi[j].v[p];
        out.push_back(std::move(acc));
    }
    return out;
}

std::vector<RealField> vadd_scaled(const std::vector<RealField>& a, double s,
                                   const std::vector<RealField>& b) {
    std::vector<RealField> r = a;
    for (std::size_t i = 0; i < r.size(); ++i) axpy(r[i], s, b[i]);
    return r;
}

// RK4 march of the velocity field alone. The observer sees (t, v) after every
// step and may stop the run by returning false; guard_cap bounds |grad v|_inf.
std::vector<RealField> burgers_march(
    std::vector<RealField> v, double T, double dt_int, double guard_cap,
    const std::function<bool(double, const std::vector<RealField>&)>& observer) {
    const Grid& g = v[0].grid;
    double t = 0.0;
    while (t < T - 1e-14 * std::max(1.0, T)) {
        const double cfl = g.min_dx() / (4.0 * std::max(1.0, vec_linf(v)));
        const double delta = std::min({dt_int, cfl, T - t});
        auto k1 = burgers_rhs(v);
        auto k2 = burgers_rhs(vadd_scaled(v, delta / 2, k1));
        auto k3 = burgers_rhs(vadd_scaled(v, delta / 2, k2));
        auto k4 = burgers_rhs(vadd_scaled(v, delta, k3));
        for (std::size_t i = 0; i < v.size(); ++i) {
            axpy(v[i], delta / 6, k1[i]);
            axpy(v[i], delta / 3, k2[i]);
            axpy(v[i], delta / 3, k3[i]);
            axpy(v[i], delta / 6, k4[i]);
        }
        t += delta;
        const double gv = grad_linf_all(v);
        if (!std::isfinite(gv) || gv > guard_cap)
            throw GuardTrip("shock", t,
                            "velocity gradient reached " + std::to_string(gv));
        if (observer && !observer(t, v)) break;
    }
    return v;
}

void check_time_args(double T, double dt_int, const char* what) {
    if (!std::isfinite(T) || T < 0.0)
        throw std::invalid_argument(std::string(what) + ": T must be finite and >= 0");
    if (!(dt_int > 0.0) || !std::isfinite(dt_int))
        throw std::invalid_argument(std::string(what) + ": dt_int must be positive");
}

}  // namespace

EulerState EulerState::make(RealField rho, std::vector<RealField> v) {
    const Grid& g = rho.grid;
    if (static_cast<int>(v.size()) != g.dim())
        throw std::invalid_argument("EulerState: need one velocity component per axis");
    for (const auto& c : v)
        if (!(c.grid == g))
            throw std::invalid_argument("EulerState: velocity grid differs from density grid");
    for (double x : rho.v)
        if (!std::isfinite(x))
            throw std::invalid_argument("EulerState: density has non-finite entries");
    for (const auto& c : v)
        for (double x : c.v)
            if (!std::isfinite(x))
                throw std::invalid_argument("EulerState: velocity has non-finite entries");
    EulerState s;
    s.rho = std::move(rho);
    s.v = std::move(v);
    return s;
}

EulerState euler_solve(const EulerState& init, double T, double dt_int,
                       const NonlinearitySpec& spec) {
    check_time_args(T, dt_int, "euler_solve");
    if (spec.alpha() != 0.0)
        throw std::invalid_argument(
            "euler_solve: the limit system couples through the phase equation; "
            "use a strong-coupling (alpha = 0) spec");
    const Grid& g = init.grid();
    const int d = g.dim();

    struct Sys {
        RealField rho;
        std::vector<RealField> v;
    };
    auto rhs = [&](const Sys& y) {
        Sys dy;
        std::vector<RealField> flux;
        flux.reserve(d);
        for (int j = 0; j < d; ++j) flux.push_back(y.rho * y.v[j]);
        dy.rho = -1.0 * divergence(flux);
        dy.v = burgers_rhs(y.v);
        auto gf = gradient(apply_f(spec, y.rho));
        for (int i = 0; i < d; ++i) axpy(dy.v[i], -1.0, gf[i]);
        return dy;
    };
    auto add_scaled = [&](const Sys& a, double s, const Sys& b) {
        Sys r{a.rho, a.v};
        axpy(r.rho, s, b.rho);
        for (int i = 0; i < d; ++i) axpy(r.v[i], s, b.v[i]);
        return r;
    };

    const double guard_cap = 10.0 * std::max(grad_linf_all(init.v), 1.0);
    Sys y{init.rho, init.v};
    double t = 0.0;
    while (t < T - 1e-14 * std::max(1.0, T)) {
        const double cfl = g.min_dx() / (4.0 * std::max(1.0, vec_linf(y.v)));
        const double delta = std::min({dt_int, cfl, T - t});
        Sys k1 = rhs(y);
        Sys k2 = rhs(add_scaled(y, delta / 2, k1));
        Sys k3 = rhs(add_scaled(y, delta / 2, k2));
        Sys k4 = rhs(add_scaled(y, delta, k3));
        axpy(y.rho, delta / 6, k1.rho);
        axpy(y.rho, delta / 3, k2.rho);
        axpy(y.rho, delta / 3, k3.rho);
        axpy(y.rho, delta / 6, k4.rho);
        for (int i = 0; i < d; ++i) {
            axpy(y.v[i], delta / 6, k1.v[i]);
            axpy(y.v[i], delta / 3, k2.v[i]);
            axpy(y.v[i], delta / 3, k3.v[i]);
            axpy(y.v[i], delta / 6, k4.v[i]);
        }
        t += delta;
        const double gv = grad_linf_all(y.v);
        if (!std::isfinite(gv) || gv > guard_cap)
            throw GuardTrip("gradient-blowup", t,
                            "velocity gradient reached " + std::to_string(gv));
    }
    return EulerState::make(std::move(y.rho), std::move(y.v));
}

std::vector<RealField> burgers_solve(const std::vector<RealField>& v0, double T,
                                     double dt_int) {
    check_time_args(T, dt_int, "burgers_solve");
    if (v0.empty()) throw std::invalid_argument("burgers_solve: empty velocity");
    EulerState::make(RealField(v0[0].grid, 0.0), v0);  // reuse the validation
    if (T == 0.0) return v0;
    const double cap = 10.0 * std::max(grad_linf_all(v0), 1.0);
    return burgers_march(v0, T, dt_int, cap, nullptr);
}

RealField eikonal_phase(const RealField& phi0, double T, double dt_int) {
    check_time_args(T, dt_int, "eikonal_phase");
    for (double x : phi0.v)
        if (!std::isfinite(x))
            throw std::invalid_argument("eikonal_phase: non-finite entries");
    if (T == 0.0) return phi0;
    const Grid& g = phi0.grid;
    const int d = g.dim();

    auto hess_linf = [&](const RealField& phi) {
        double m = 0.0;
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j) {
                std::array<int, 3> ord{0, 0, 0};
                ord[i] += 1;
                ord[j] += 1;
                m = std::max(m, max_abs(spectral_derivative(phi, ord)));
            }
        return m;
    };
    auto rhs = [&](const RealField& phi) {
        RealField out(g, 0.0);
        for (const auto& gr : gradient(phi))
            for (std::size_t p = 0; p < out.size(); ++p)
                out.v[p] -= 0.5 * gr.v[p] * gr.v[p];
        return out;
    };

    const double cap = 10.0 * std::max(hess_linf(phi0), 1.0);
    RealField phi = phi0;
    double t = 0.0;
    while (t < T - 1e-14 * std::max(1.0, T)) {
        double gmax = 0.0;
        for (const auto& gr : gradient(phi)) gmax = std::max(gmax, max_abs(gr));
        const double cfl = g.min_dx() / (4.0 * std::max(1.0, gmax));
        const double delta = std::min({dt_int, cfl, T - t});
        RealField k1 = rhs(phi);
        RealField t2 = phi;
        axpy(t2, delta / 2, k1);
        RealField k2 = rhs(t2);
        RealField t3 = phi;
        axpy(t3, delta / 2, k2);
        RealField k3 = rhs(t3);
        RealField t4 = phi;
        axpy(t4, delta, k3);
        RealField k4 = rhs(t4);
        axpy(phi, delta / 6, k1);
        axpy(phi, delta / 3, k2);
        axpy(phi, delta / 3, k3);
        axpy(phi, delta / 6, k4);
        t += delta;
        const double h = hess_linf(phi);
        if (!std::isfinite(h) || h > cap)
            throw GuardTrip("caustic", t, "phase Hessian reached " + std::to_string(h));
    }
    return phi;
}

double caustic_time(const std::vector<RealField>& v0) {
    if (v0.empty()) throw std::invalid_argument("caustic_time: empty velocity");
    const Grid& g = v0[0].grid;
    EulerState::make(RealField(g, 0.0), v0);

    if (g.dim() == 1) {
        RealField dv = spectral_derivative(v0[0], {1, 0, 0});
        double mn = 0.0;
        for (double x : dv.v) mn = std::min(mn, x);
        if (mn >= -1e-12) return std::numeric_limits<double>::infinity();
        return -1.0 / mn;
    }

    const double g0 = grad_linf_all(v0);
    if (g0 < 1e-12) return std::numeric_limits<double>::infinity();
    const double target = 16.0 * g0;
    const double horizon = 64.0 / g0;  // past 4 doublings of the linear timescale

    double hit = std::numeric_limits<double>::infinity();
    auto observer = [&](double t, const std::vector<RealField>& v) {
        if (grad_linf_all(v) >= target) {
            hit = t;
            return false;
        }
        return true;
    };
    const double dt_int = g.min_dx() / 4.0;
    burgers_march(v0, horizon, dt_int, std::numeric_limits<double>::infinity(),
                  observer);
    return hit;
}

}  // namespace wkbsplit
