#include "wkbsplit/wavefunction.hpp"

#include <cmath>
#include <stdexcept>

namespace wkbsplit {

namespace {

[[noreturn]] void fail(const std::string& msg) {
    throw std::invalid_argument("wavefunction: " + msg);
}

}  // namespace

WaveFunction WaveFunction::make(ComplexField field, double eps) {
    if (!(eps > 0.0) || eps > 1.0 || !std::isfinite(eps))
        fail("eps must lie in (0, 1]");
    for (const cplx& z : field.v)
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            fail("field has non-finite entries");
    return WaveFunction{std::move(field), eps};
}

PotentialSpec PotentialSpec::make(
    std::function<double(double, const std::array<double, 3>&)> V,
    double derivative_bound) {
    if (!V) fail("potential needs a callable");
    if (!(derivative_bound > 0.0)) fail("derivative bound must be positive");
    return PotentialSpec{std::move(V), derivative_bound};
}

PotentialSpec PotentialSpec::harmonic() {
    return make([](double, const std::array<double, 3>& x) {
        return 0.5 * (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
    });
}

RealField PotentialSpec::sample(const Grid& g, double t) const {
    return sample_real(g, [&](const std::array<double, 3>& x) { return V(t, x); });
}

void PotentialSpec::validate_on(const Grid& g, double t) const {
    RealField v = sample(g, t);
    for (int a = 0; a < g.dim(); ++a) {
        const double h = g.dx(a);
        const int N = g.n(a);
        auto at = [&](std::array<int, 3> idx, int shift) {
            idx[a] += shift;
            return v.v[g.index(idx[0], idx[1], idx[2])];
        };
        double worst2 = 0.0, worst3 = 0.0;
        for (std::size_t flat = 0; flat < g.size(); ++flat) {
            auto idx = g.unravel(flat);
            if (idx[a] >= 2 && idx[a] <= N - 3) {
                double d2 = (at(idx, 1) - 2 * at(idx, 0) + at(idx, -1)) / (h * h);
                double d3 = (at(idx, 2) - 2 * at(idx, 1) + 2 * at(idx, -1) -
                             at(idx, -2)) / (2 * h * h * h);
                worst2 = std::max(worst2, std::abs(d2));
                worst3 = std::max(worst3, std::abs(d3));
            }
        }
        if (worst2 > derivative_bound || worst3 > derivative_bound)
            fail("potential is not subquadratic on the grid (sampled derivative " +
                 std::to_string(std::max(worst2, worst3)) + " exceeds bound)");
    }
}

namespace {

SchemeSpec make_scheme(SchemeSpec::Composition comp, double dt,
                       std::optional<NonlinearitySpec> nl,
                       std::optional<PotentialSpec> pot) {
    if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be positive");
    SchemeSpec s;
    s.composition = comp;
    s.dt = dt;
    s.nonlinearity = std::move(nl);
    s.potential = std::move(pot);
    return s;
}

}  // namespace

SchemeSpec SchemeSpec::lie(double dt, NonlinearitySpec nl) {
    return make_scheme(Composition::Lie, dt, std::move(nl), std::nullopt);
}
SchemeSpec SchemeSpec::lie(double dt, PotentialSpec pot) {
    return make_scheme(Composition::Lie, dt, std::nullopt, std::move(pot));
}
SchemeSpec SchemeSpec::strang(double dt, NonlinearitySpec nl) {
    return make_scheme(Composition::Strang, dt, std::move(nl), std::nullopt);
}
SchemeSpec SchemeSpec::strang(double dt, PotentialSpec pot) {
    return make_scheme(Composition::Strang, dt, std::nullopt, std::move(pot));
}

SchemeSpec SchemeSpec::with_adjoint(bool on) const {
    SchemeSpec s = *this;
    s.adjoint = on;
    return s;
}

ComplexField free_propagate(const ComplexField& u, double theta) {
    ComplexField hat = fft_forward(u);
    for_each_mode(u.grid, [&](std::size_t flat, const std::array<double, 3>& xi,
                              const std::array<bool, 3>&) {
        const double xi2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
        hat.v[flat] *= std::polar(1.0, -0.5 * theta * xi2);
    });
    return fft_inverse(hat);
}

WaveFunction free_step(const WaveFunction& u, double t) {
    return WaveFunction{free_propagate(u.field, u.eps * t), u.eps};
}

WaveFunction nonlinear_step(const WaveFunction& u, double t,
                            const NonlinearitySpec& spec) {
    RealField f = apply_f(spec, abs2(u.field));
    const double strength = std::pow(u.eps, spec.alpha() - 1.0);
    WaveFunction out{ComplexField(u.field.grid), u.eps};
    for (std::size_t i = 0; i < f.size(); ++i)
        out.field.v[i] = u.field.v[i] * std::polar(1.0, -strength * t * f.v[i]);
    return out;
}

WaveFunction potential_step(const WaveFunction& u, double t,
                            const PotentialSpec& pot, double t_now) {
    RealField v = pot.sample(u.field.grid, t_now);
    WaveFunction out{ComplexField(u.field.grid), u.eps};
    for (std::size_t i = 0; i < v.size(); ++i)
        out.field.v[i] = u.field.v[i] * std::polar(1.0, -t * v.v[i] / u.eps);
    return out;
}

namespace {

WaveFunction kick(const WaveFunction& u, double t, const SchemeSpec& s,
                  double freeze_time) {
    if (s.nonlinearity) return nonlinear_step(u, t, *s.nonlinearity);
    if (s.potential) return potential_step(u, t, *s.potential, freeze_time);
    fail("scheme needs a nonlinearity or a potential");
}

}  // namespace

WaveFunction lie_step(const WaveFunction& u, const SchemeSpec& s, double t_now) {
    if (s.adjoint) return free_step(kick(u, s.dt, s, t_now), s.dt);
    return kick(free_step(u, s.dt), s.dt, s, t_now);
}

WaveFunction strang_step(const WaveFunction& u, const SchemeSpec& s, double t_now) {
    WaveFunction half = free_step(u, 0.5 * s.dt);
    WaveFunction kicked = kick(half, s.dt, s, t_now + 0.5 * s.dt);
    return free_step(kicked, 0.5 * s.dt);
}

EvolveResult evolve(const WaveFunction& u0, const SchemeSpec& s, double T,
                    double t0) {
    if (!(T > 0.0)) fail("evolve needs T > 0");
    const double ratio = T / s.dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    if (steps == 0 || std::abs(ratio - static_cast<double>(steps)) >
                          1e-9 * std::max(1.0, ratio))
        fail("T must be an integer multiple of dt");

    EvolveResult res;
    res.state = u0;
    res.trace.push_back(
        {t0, norm(u0.field, NormKind::L2()), max_abs(u0.field)});
    const double linf0 = res.trace.front().linf;

    for (std::size_t k = 0; k < steps; ++k) {
        const double t_now = t0 + static_cast<double>(k) * s.dt;
        res.state = s.composition == SchemeSpec::Composition::Lie
                        ? lie_step(res.state, s, t_now)
                        : strang_step(res.state, s, t_now);
        const double linf = max_abs(res.state.field);
        res.trace.push_back(
            {t_now + s.dt, norm(res.state.field, NormKind::L2()), linf});
        if (linf > s.blowup_factor * linf0)
            throw GuardTrip("blow-up", t_now + s.dt,
                            "sup norm grew by more than the configured factor");
        ++res.steps;
    }
    return res;
}

WaveFunction reference_solution(const WaveFunction& u0, const SchemeSpec& s,
                                double T, double tol, int max_halvings) {
    if (!(tol > 0.0)) fail("reference tolerance must be positive");
    SchemeSpec fine = s;
    fine.composition = SchemeSpec::Composition::Strang;
    fine.dt = T / 16.0;

    WaveFunction prev = evolve(u0, fine, T).state;
    for (int h = 0; h < max_halvings; ++h) {
        fine.dt *= 0.5;
        WaveFunction next = evolve(u0, fine, T).state;
        if (norm(next.field - prev.field, NormKind::L2()) < tol) return next;
        prev = std::move(next);
    }
    throw std::runtime_error(
        "wavefunction: reference solution did not converge within " +
        std::to_string(max_halvings) + " halvings");
}

RealField density(const WaveFunction& u) { return abs2(u.field); }

std::vector<RealField> current(const WaveFunction& u) {
    auto grad = gradient(u.field);
    std::vector<RealField> out;
    out.reserve(grad.size());
    for (const ComplexField& du : grad) {
        RealField j(u.field.grid);
        for (std::size_t i = 0; i < j.size(); ++i)
            j.v[i] = u.eps * std::imag(std::conj(u.field.v[i]) * du.v[i]);
        out.push_back(std::move(j));
    }
    return out;
}

}  // namespace wkbsplit
