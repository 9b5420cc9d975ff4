#include "wkbsplit/wkb.hpp"

#include "wkbsplit/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <utility>

namespace wkbsplit {

namespace {

void check_finite_real(const RealField& f, const char* what) {
    for (double x : f.v)
        if (!std::isfinite(x))
            throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

void check_finite_cplx(const ComplexField& f, const char* what) {
    for (const cplx& z : f.v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            throw std::invalid_argument(std::string(what) + " has non-finite entries");
}

// Im(conj(a) grad a), one RealField per axis
std::vector<RealField> amp_current(const ComplexField& a) {
    auto ga = gradient(a);
    std::vector<RealField> out;
    out.reserve(ga.size());
    for (auto& g : ga) {
        RealField c(a.grid, 0.0);
        for (std::size_t i = 0; i < c.size(); ++i)
            c.v[i] = std::imag(std::conj(a.v[i]) * g.v[i]);
        out.push_back(std::move(c));
    }
    return out;
}

double grad_linf(const RealField& phi) {
    double m = 0.0;
    for (const auto& g : gradient(phi)) m = std::max(m, max_abs(g));
    return m;
}

double hessian_linf(const RealField& phi) {
    const int d = phi.grid.dim();
    double m = 0.0;
    for (int i = 0; i < d; ++i) {
        for (int j = i; j < d; ++j) {
            std::array<int, 3> ord{0, 0, 0};
            ord[i] += 1;
            ord[j] += 1;
            m = std::max(m, max_abs(spectral_derivative(phi, ord)));
        }
    }
    return m;
}

// right-hand side of the phase/amplitude system minus the stiff i(eps/2) lap a
// term, which the propagator between stages applies exactly
using Rhs = std::function<WKBDelta(const RealField&, const ComplexField&)>;

WKBDelta transport_rhs(const RealField& phi, const ComplexField& amp) {
    auto gphi = gradient(phi);
    RealField lphi = laplacian(phi);
    auto gamp = gradient(amp);

    RealField nphi(phi.grid, 0.0);
    for (const auto& g : gphi)
        for (std::size_t i = 0; i < nphi.size(); ++i)
            nphi.v[i] -= 0.5 * g.v[i] * g.v[i];

    ComplexField namp(amp.grid, cplx(0.0, 0.0));
    for (std::size_t k = 0; k < gphi.size(); ++k)
        for (std::size_t i = 0; i < namp.size(); ++i)
            namp.v[i] -= gphi[k].v[i] * gamp[k].v[i];
    for (std::size_t i = 0; i < namp.size(); ++i)
        namp.v[i] -= 0.5 * lphi.v[i] * amp.v[i];
    return {std::move(nphi), std::move(namp)};
}

WKBDelta add_scaled(const WKBDelta& y, double s, const WKBDelta& k) {
    WKBDelta r{y.phi, y.amp};
    axpy(r.phi, s, k.phi);
    axpy(r.amp, cplx(s, 0.0), k.amp);
    return r;
}

// one Lawson-RK4 substep of size delta: classical RK4 applied to the
// integrating-factor transform, with E = exp((delta/2) i (eps/2) lap)
WKBDelta lawson_substep(const WKBDelta& y, double delta, double eps,
                        const Rhs& rhs, bool dealias) {
    const double half = eps * delta / 2.0;
    auto E = [&](WKBDelta v) {
        v.amp = free_propagate(v.amp, half);
        return v;
    };
    auto N = [&](const WKBDelta& v) {
        WKBDelta k = rhs(v.phi, v.amp);
        if (dealias) {
            k.phi = dealias_23(k.phi);
            k.amp = dealias_23(k.amp);
        }
        return k;
    };

    WKBDelta k1 = N(y);
    WKBDelta y2 = E(add_scaled(y, delta / 2, k1));
    WKBDelta k2 = N(y2);
    WKBDelta ey = E(y);
    WKBDelta k3 = N(add_scaled(ey, delta / 2, k2));
    WKBDelta y4 = E(add_scaled(ey, delta, k3));
    WKBDelta k4 = N(y4);

    WKBDelta acc = E(E(k1));
    WKBDelta ek2 = E(std::move(k2));
    WKBDelta ek3 = E(std::move(k3));
    axpy(acc.phi, 2.0, ek2.phi);
    axpy(acc.amp, cplx(2.0, 0.0), ek2.amp);
    axpy(acc.phi, 2.0, ek3.phi);
    axpy(acc.amp, cplx(2.0, 0.0), ek3.amp);
    axpy(acc.phi, 1.0, k4.phi);
    axpy(acc.amp, cplx(1.0, 0.0), k4.amp);

    WKBDelta out = E(std::move(ey));
    axpy(out.phi, delta / 6, acc.phi);
    axpy(out.amp, cplx(delta / 6, 0.0), acc.amp);
    return out;
}

void validate_cfg(const XFlowConfig& cfg) {
    if (!(cfg.c_cfl > 0.0 && cfg.c_cfl <= 1.0))
        throw std::invalid_argument("XFlowConfig: c_cfl must lie in (0, 1]");
    if (!(cfg.tol > 0.0) || !std::isfinite(cfg.tol))
        throw std::invalid_argument("XFlowConfig: tol must be positive");
    if (!(cfg.hessian_factor >= 1.0))
        throw std::invalid_argument("XFlowConfig: hessian_factor must be >= 1");
    if (cfg.max_doublings < 1)
        throw std::invalid_argument("XFlowConfig: max_doublings must be >= 1");
}

// integrates the system over [0, t] with m substeps, m doubled until the
// halving check passes; the caustic guard watches the phase Hessian
WKBState lawson_integrate(const WKBState& s0, double t, double dt_cap,
                          const XFlowConfig& cfg, const Rhs& rhs,
                          const char* what) {
    validate_cfg(cfg);
    if (!std::isfinite(t) || t < 0.0)
        throw std::invalid_argument(std::string(what) + ": time must be finite and >= 0");
    if (t == 0.0) return s0;

    const double hess_cap =
        cfg.hessian_factor * std::max(hessian_linf(s0.phi), 1.0);
    const double g0 = grad_linf(s0.phi);
    const double delta0 =
        std::min({cfg.c_cfl * s0.grid().min_dx() / std::max(1.0, g0), dt_cap, t});
    long m = std::max(1L, static_cast<long>(std::ceil(t / delta0 - 1e-9)));

    auto run = [&](long steps) {
        WKBDelta y{s0.phi, s0.amp};
        const double delta = t / static_cast<double>(steps);
        for (long i = 0; i < steps; ++i) {
            y = lawson_substep(y, delta, s0.eps, rhs, cfg.dealias);
            const double h = hessian_linf(y.phi);
            if (!std::isfinite(h) || h > hess_cap)
                throw GuardTrip("caustic", (i + 1) * delta,
                                std::string(what) + ": phase Hessian reached " +
                                    std::to_string(h) + " (cap " +
                                    std::to_string(hess_cap) + ")");
        }
        return y;
    };

    WKBDelta coarse = run(m);
    for (int k = 0; k < cfg.max_doublings; ++k) {
        m *= 2;
        WKBDelta fine = run(m);
        const double diff = norm(fine.amp - coarse.amp, NormKind::L2()) +
                            norm(gradient(fine.phi - coarse.phi), NormKind::L2()) +
                            norm(fine.phi - coarse.phi, NormKind::Linf());
        if (diff <= cfg.tol * t + 1e-13)
            return WKBState::make(std::move(fine.phi), std::move(fine.amp), s0.eps);
        coarse = std::move(fine);
    }
    throw std::runtime_error(std::string(what) +
                             ": substep refinement stalled (solution likely "
                             "under-resolved or close to a caustic)");
}

}  // namespace

WKBState WKBState::make(RealField phi, ComplexField amp, double eps) {
    if (!(phi.grid == amp.grid))
        throw std::invalid_argument("WKBState: phase and amplitude grids differ");
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("WKBState: eps must lie in (0, 1]");
    check_finite_real(phi, "WKBState phase");
    check_finite_cplx(amp, "WKBState amplitude");
    WKBState s;
    s.phi = std::move(phi);
    s.amp = std::move(amp);
    s.eps = eps;
    return s;
}

WaveFunction reconstruct(const WKBState& s) {
    ComplexField u = s.amp;
    for (std::size_t i = 0; i < u.size(); ++i)
        u.v[i] *= std::polar(1.0, s.phi.v[i] / s.eps);
    return WaveFunction::make(std::move(u), s.eps);
}

WKBState y_flow(const WKBState& s, double t, const NonlinearitySpec& spec) {
    if (!std::isfinite(t))
        throw std::invalid_argument("y_flow: time must be finite");
    RealField fval = apply_f(spec, abs2(s.amp));
    if (spec.alpha() == 0.0) {
        RealField phi = s.phi;
        axpy(phi, -t, fval);
        return WKBState::make(std::move(phi), s.amp, s.eps);
    }
    const double gamma = std::pow(s.eps, spec.alpha() - 1.0);
    ComplexField amp = s.amp;
    for (std::size_t i = 0; i < amp.size(); ++i)
        amp.v[i] *= std::polar(1.0, -gamma * t * fval.v[i]);
    return WKBState::make(s.phi, std::move(amp), s.eps);
}

WKBState x_flow(const WKBState& s, double t, const XFlowConfig& cfg) {
    return lawson_integrate(s, t, t > 0 ? t : 1.0, cfg, transport_rhs, "x_flow");
}

WKBState lie_wkb_step(const WKBState& s, double dt, const NonlinearitySpec& spec,
                      const XFlowConfig& cfg) {
    return y_flow(x_flow(s, dt, cfg), dt, spec);
}

WKBState grenier_flow(const WKBState& s, double t, double dt_int,
                      const NonlinearitySpec& spec, const XFlowConfig& cfg) {
    if (!(dt_int > 0.0) || !std::isfinite(dt_int))
        throw std::invalid_argument("grenier_flow: dt_int must be positive");
    Rhs rhs;
    if (spec.alpha() == 0.0) {
        rhs = [&spec](const RealField& phi, const ComplexField& amp) {
            WKBDelta d = transport_rhs(phi, amp);
            axpy(d.phi, -1.0, apply_f(spec, abs2(amp)));
            return d;
        };
    } else {
        const double gamma = std::pow(s.eps, spec.alpha() - 1.0);
        rhs = [&spec, gamma](const RealField& phi, const ComplexField& amp) {
            WKBDelta d = transport_rhs(phi, amp);
            RealField fval = apply_f(spec, abs2(amp));
            for (std::size_t i = 0; i < d.amp.size(); ++i)
                d.amp.v[i] -= cplx(0.0, gamma) * fval.v[i] * amp.v[i];
            return d;
        };
    }
    return lawson_integrate(s, t, dt_int, cfg, rhs, "grenier_flow");
}

WKBDelta apply_generator_A(const WKBState& s) {
    WKBDelta d = transport_rhs(s.phi, s.amp);
    ComplexField lap = laplacian(s.amp);
    axpy(d.amp, cplx(0.0, s.eps / 2.0), lap);
    return d;
}

WKBDelta apply_generator_B(const WKBState& s, const NonlinearitySpec& spec) {
    RealField fval = apply_f(spec, abs2(s.amp));
    if (spec.alpha() == 0.0) {
        RealField nphi = -1.0 * fval;
        return {std::move(nphi), ComplexField(s.grid(), cplx(0.0, 0.0))};
    }
    const double gamma = std::pow(s.eps, spec.alpha() - 1.0);
    ComplexField namp(s.grid(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < namp.size(); ++i)
        namp.v[i] = -cplx(0.0, gamma) * fval.v[i] * s.amp.v[i];
    return {RealField(s.grid(), 0.0), std::move(namp)};
}

CommutatorOutput commutator_AB(const WKBState& s, const NonlinearitySpec& spec) {
    const Grid& g = s.grid();
    RealField rho = abs2(s.amp);
    auto gphi = gradient(s.phi);
    auto gamp = gradient(s.amp);
    const int d = g.dim();

    if (spec.alpha() == 0.0) {
        // strong coupling, kernel-only f:
        //   phi part: grad phi . grad f - div K*(rho grad phi) - eps div K*(Im conj(a) grad a)
        //   amp part: grad a . grad f + a lap f / 2
        const KernelSpec& K = spec.kernel();
        RealField fval = apply_kernel(K, rho);
        auto gf = gradient(fval);
        RealField lf = laplacian(fval);

        RealField phi_c(g, 0.0);
        for (int k = 0; k < d; ++k)
            for (std::size_t i = 0; i < phi_c.size(); ++i)
                phi_c.v[i] += gphi[k].v[i] * gf[k].v[i];

        std::vector<RealField> rgp;
        rgp.reserve(d);
        for (int k = 0; k < d; ++k) rgp.push_back(rho * gphi[k]);
        phi_c -= divergence(apply_kernel(K, rgp));

        RealField dj = divergence(apply_kernel(K, amp_current(s.amp)));
        axpy(phi_c, -s.eps, dj);

        ComplexField amp_c(g, cplx(0.0, 0.0));
        for (int k = 0; k < d; ++k)
            for (std::size_t i = 0; i < amp_c.size(); ++i)
                amp_c.v[i] += gf[k].v[i] * gamp[k].v[i];
        for (std::size_t i = 0; i < amp_c.size(); ++i)
            amp_c.v[i] += 0.5 * lf.v[i] * s.amp.v[i];

        return {std::move(phi_c), std::move(amp_c)};
    }

    // weak coupling: [A,B] = i eps^(alpha-1) (0, F) with
    //   F = grad phi . grad(f a) + (f a) lap phi / 2 - i (eps/2) lap(f a)
    //       + f b_A - a (K*D + f2'(rho) D),
    //   b_A = -grad phi . grad a - a lap phi / 2 + i (eps/2) lap a,
    //   D = div(rho grad phi + eps Im(conj a grad a)).
    const double gamma = std::pow(s.eps, spec.alpha() - 1.0);
    RealField fval = apply_f(spec, rho);
    RealField lphi = laplacian(s.phi);

    ComplexField fa = fval * s.amp;
    auto gfa = gradient(fa);
    ComplexField lfa = laplacian(fa);

    ComplexField b_a(g, cplx(0.0, 0.0));
    {
        ComplexField la = laplacian(s.amp);
        for (int k = 0; k < d; ++k)
            for (std::size_t i = 0; i < b_a.size(); ++i)
                b_a.v[i] -= gphi[k].v[i] * gamp[k].v[i];
        for (std::size_t i = 0; i < b_a.size(); ++i)
            b_a.v[i] += -0.5 * lphi.v[i] * s.amp.v[i] +
                        cplx(0.0, s.eps / 2.0) * la.v[i];
    }

    std::vector<RealField> jvec = amp_current(s.amp);
    for (int k = 0; k < d; ++k) {
        RealField t = rho * gphi[k];
        axpy(t, s.eps, jvec[k]);
        jvec[k] = std::move(t);
    }
    RealField D = divergence(jvec);

    RealField kd(g, 0.0);
    if (spec.has_kernel()) kd = apply_kernel(spec.kernel(), D);
    RealField f2d(g, 0.0);
    if (spec.has_local()) {
        for (std::size_t i = 0; i < f2d.size(); ++i)
            f2d.v[i] = spec.local().df(rho.v[i]) * D.v[i];
    }

    ComplexField F(g, cplx(0.0, 0.0));
    for (int k = 0; k < d; ++k)
        for (std::size_t i = 0; i < F.size(); ++i)
            F.v[i] += gphi[k].v[i] * gfa[k].v[i];
    for (std::size_t i = 0; i < F.size(); ++i) {
        F.v[i] += 0.5 * lphi.v[i] * fa.v[i];
        F.v[i] -= cplx(0.0, s.eps / 2.0) * lfa.v[i];
        F.v[i] += fval.v[i] * b_a.v[i];
        F.v[i] -= s.amp.v[i] * (kd.v[i] + f2d.v[i]);
    }

    ComplexField amp_c(g, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < amp_c.size(); ++i)
        amp_c.v[i] = cplx(0.0, gamma) * F.v[i];

    return {RealField(g, 0.0), std::move(amp_c)};
}

WkbError wkb_error(const WKBState& numeric, const WKBState& exact, double s) {
    if (!(numeric.grid() == exact.grid()))
        throw std::invalid_argument("wkb_error: grids differ");
    if (numeric.eps != exact.eps)
        throw std::invalid_argument("wkb_error: eps differs");
    RealField dphi = numeric.phi - exact.phi;
    ComplexField damp = numeric.amp - exact.amp;
    WkbError e;
    e.e_amp = norm(damp, NormKind::Hs(s - 1.0));
    e.e_gradphase = norm(gradient(dphi), NormKind::Hs(s));
    e.e_phase_inf = norm(dphi, NormKind::Linf());
    return e;
}

double wave_l2_error(const WKBState& numeric, const WKBState& exact) {
    if (!(numeric.grid() == exact.grid()))
        throw std::invalid_argument("wave_l2_error: grids differ");
    if (numeric.eps != exact.eps)
        throw std::invalid_argument("wave_l2_error: eps differs");
    ComplexField diff(numeric.grid(), cplx(0.0, 0.0));
    for (std::size_t i = 0; i < diff.size(); ++i) {
        const double dphi = numeric.phi.v[i] - exact.phi.v[i];
        diff.v[i] = numeric.amp.v[i] * std::polar(1.0, dphi / numeric.eps) -
                    exact.amp.v[i];
    }
    return norm(diff, NormKind::L2());
}

RealField wkb_density(const WKBState& s) { return abs2(s.amp); }

std::vector<RealField> wkb_current(const WKBState& s) {
    RealField rho = abs2(s.amp);
    auto gphi = gradient(s.phi);
    auto j = amp_current(s.amp);
    for (std::size_t k = 0; k < j.size(); ++k) {
        RealField t = rho * gphi[k];
        axpy(t, s.eps, j[k]);
        j[k] = std::move(t);
    }
    return j;
}

void write_snapshot(const std::string& prefix, const WKBState& s) {
    write_fld1(prefix + ".phi.fld", s.phi);
    write_fld1(prefix + ".amp.fld", s.amp);
    nlohmann::json meta;
    meta["eps"] = s.eps;
    std::ofstream out(prefix + ".json");
    if (!out)
        throw std::runtime_error("write_snapshot: cannot open " + prefix + ".json");
    out << meta.dump() << "\n";
    if (!out)
        throw std::runtime_error("write_snapshot: write failed for " + prefix + ".json");
}

WKBState read_snapshot(const std::string& prefix) {
    RealField phi = read_fld1_real(prefix + ".phi.fld");
    ComplexField amp = read_fld1_complex(prefix + ".amp.fld");
    std::ifstream in(prefix + ".json");
    if (!in)
        throw std::runtime_error("read_snapshot: cannot open " + prefix + ".json");
    nlohmann::json meta = nlohmann::json::parse(in);
    if (!meta.contains("eps"))
        throw std::runtime_error("read_snapshot: missing eps in " + prefix + ".json");
    return WKBState::make(std::move(phi), std::move(amp), meta["eps"].get<double>());
}

}  // namespace wkbsplit
