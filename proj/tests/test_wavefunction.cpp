#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wkbsplit/wavefunction.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace wkbsplit;
constexpr double pi = std::numbers::pi;

namespace {

Grid box1d(int n = 512, double length = 32.0, double x0 = -16.0) {
    return Grid::make(1, {n}, {length}, {x0});
}

WaveFunction gaussian_wave(const Grid& g, double eps) {
    ComplexField f = sample_complex(g, [](const std::array<double, 3>& x) {
        return std::exp(-x[0] * x[0] / 2);
    });
    return WaveFunction::make(std::move(f), eps);
}

NonlinearitySpec smoothed_strong(double lambda = 1.0) {
    return NonlinearitySpec::make(KernelSpec::smoothed(lambda), std::nullopt, 0.0);
}

double l2_diff(const ComplexField& a, const ComplexField& b) {
    return norm(a - b, NormKind::L2());
}

// closed-form coherent state for V = x^2/2, ground-state width
ComplexField coherent_exact(const Grid& g, double eps, double t, double q0,
                            double p0) {
    const double c = std::cos(t), s = std::sin(t);
    const double q = q0 * c + p0 * s;
    const double p = p0 * c - q0 * s;
    const double S = (p0 * p0 - q0 * q0) * std::sin(2 * t) / 4 -
                     p0 * q0 * (1 - std::cos(2 * t)) / 2;
    const double amp = std::pow(pi * eps, -0.25);
    return sample_complex(g, [&](const std::array<double, 3>& x) {
        const double y = x[0] - q;
        return amp * std::exp(-y * y / (2 * eps)) *
               std::exp(cplx(0, (p * y + S) / eps - t / 2));
    });
}

}  // namespace

TEST_CASE("wavefunction construction validates inputs") {
    Grid g = box1d(8, 1.0, 0.0);
    ComplexField f(g, 1.0);
    CHECK_NOTHROW(WaveFunction::make(f, 1.0));
    CHECK_NOTHROW(WaveFunction::make(f, 1e-3));
    CHECK_THROWS_AS(WaveFunction::make(f, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(WaveFunction::make(f, 1.5), std::invalid_argument);
    ComplexField bad = f;
    bad.v[3] = cplx(std::nan(""), 0.0);
    CHECK_THROWS_AS(WaveFunction::make(bad, 0.5), std::invalid_argument);
}

TEST_CASE("free step: zero time is the identity") {
    WaveFunction u = gaussian_wave(box1d(), 0.5);
    WaveFunction v = free_step(u, 0.0);
    CHECK(l2_diff(u.field, v.field) < 1e-14);
}

TEST_CASE("free step advances a plane wave by the exact phase") {
    Grid g = Grid::make(1, {64}, {2 * pi}, {0.0});
    ComplexField f = sample_complex(g, [](const std::array<double, 3>& x) {
        return std::exp(cplx(0, 3 * x[0]));
    });
    WaveFunction u = WaveFunction::make(f, 0.5);
    WaveFunction v = free_step(u, 0.7);
    const cplx phase = std::polar(1.0, -0.5 * 0.7 * 9.0 / 2.0 * 2.0);
    // exp(-i eps t xi^2 / 2) with eps=0.5, t=0.7, xi=3
    const cplx want = std::polar(1.0, -0.5 * 0.7 * 9.0 / 2.0);
    (void)phase;
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::abs(v.field.v[i] - want * f.v[i]) < 1e-13);
}

TEST_CASE("free step matches the closed-form Gaussian evolution") {
    Grid g = box1d();
    WaveFunction u = gaussian_wave(g, 0.5);
    WaveFunction v = free_step(u, 1.0);
    // uhat ~ e^{-xi^2/2} evolves to e^{-(1+i eps t) xi^2/2}
    const cplx w = cplx(1.0, 0.5 * 1.0);
    double worst = 0.0;
    for (int i = 0; i < g.n(0); ++i) {
        double x = g.coord(0, i);
        cplx want = std::exp(-x * x / (2.0 * w)) / std::sqrt(w);
        worst = std::max(worst, std::abs(v.field.v[i] - want));
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("free flow is a group: X^s X^t = X^{s+t}") {
    WaveFunction u = gaussian_wave(box1d(), 0.3);
    WaveFunction a = free_step(free_step(u, 0.3), 0.45);
    WaveFunction b = free_step(u, 0.75);
    CHECK(l2_diff(a.field, b.field) < 1e-13);
}

TEST_CASE("nonlinear step with a zero kernel is the identity") {
    WaveFunction u = gaussian_wave(box1d(), 0.5);
    WaveFunction v = nonlinear_step(u, 0.2, smoothed_strong(0.0));
    for (std::size_t i = 0; i < u.field.size(); ++i)
        CHECK(v.field.v[i] == u.field.v[i]);
}

TEST_CASE("nonlinear step preserves the modulus pointwise") {
    Grid g = box1d(256);
    ComplexField f = oracles::band_limited_complex(g, 3);
    WaveFunction u = WaveFunction::make(f, 0.2);
    WaveFunction v = nonlinear_step(u, 0.13, smoothed_strong(1.0));
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::abs(std::abs(v.field.v[i]) - std::abs(u.field.v[i])) < 1e-14);
}

TEST_CASE("weak cubic step on a constant field applies exp(-i t |c|^2)") {
    Grid g = box1d(8, 1.0, 0.0);
    const cplx c0(0.8, -0.3);
    ComplexField f(g, c0);
    WaveFunction u = WaveFunction::make(f, 0.37);  // eps drops out at alpha = 1
    auto spec = NonlinearitySpec::make(std::nullopt, LocalTerm::cubic(1.0), 1.0);
    WaveFunction v = nonlinear_step(u, 0.5, spec);
    const cplx want = c0 * std::polar(1.0, -0.5 * std::norm(c0));
    for (std::size_t i = 0; i < f.size(); ++i)
        CHECK(std::abs(v.field.v[i] - want) < 1e-14);
}

TEST_CASE("strong-regime phase matches the direct convolution sum") {
    Grid g = box1d(256);
    WaveFunction u = gaussian_wave(g, 0.1);
    const double t = 0.01;
    WaveFunction v = nonlinear_step(u, t, smoothed_strong(1.0));
    RealField f_direct = oracles::direct_kernel_convolution(
        KernelSpec::smoothed(1.0), abs2(u.field));
    double worst = 0.0;
    for (std::size_t i = 0; i < u.field.size(); ++i) {
        cplx want = u.field.v[i] * std::polar(1.0, -(t / 0.1) * f_direct.v[i]);
        worst = std::max(worst, std::abs(v.field.v[i] - want));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("potential step applies the frozen-time phase") {
    Grid g = box1d();
    WaveFunction u = gaussian_wave(g, 0.5);
    auto pot = PotentialSpec::harmonic();
    WaveFunction v = potential_step(u, 0.2, pot, 0.0);
    double worst = 0.0;
    for (int i = 0; i < g.n(0); ++i) {
        double x = g.coord(0, i);
        cplx want = u.field.v[i] * std::polar(1.0, -0.2 * (x * x / 2) / 0.5);
        worst = std::max(worst, std::abs(v.field.v[i] - want));
    }
    CHECK(worst < 1e-13);

    // time dependence is frozen at t_now
    auto tv = PotentialSpec::make([](double t, const std::array<double, 3>& x) {
        return std::cos(t) * x[0];
    });
    WaveFunction w0 = potential_step(u, 0.1, tv, 0.0);
    WaveFunction wpi = potential_step(u, 0.1, tv, pi);
    for (int i = 0; i < g.n(0); i += 37) {
        double x = g.coord(0, i);
        CHECK(std::abs(w0.field.v[i] -
                       u.field.v[i] * std::polar(1.0, -0.1 * x / 0.5)) < 1e-13);
        CHECK(std::abs(wpi.field.v[i] -
                       u.field.v[i] * std::polar(1.0, +0.1 * x / 0.5)) < 1e-12);
    }
}

TEST_CASE("subquadratic sampling accepts tame potentials and rejects others") {
    Grid g = box1d();
    CHECK_NOTHROW(PotentialSpec::harmonic().validate_on(g));
    auto linear = PotentialSpec::make(
        [](double, const std::array<double, 3>& x) { return 3.0 * x[0]; });
    CHECK_NOTHROW(linear.validate_on(g));

    auto expv = PotentialSpec::make(
        [](double, const std::array<double, 3>& x) { return std::exp(x[0]); });
    CHECK_THROWS_AS(expv.validate_on(g), std::invalid_argument);

    auto quartic = PotentialSpec::make(
        [](double, const std::array<double, 3>& x) { return std::pow(x[0], 4); });
    CHECK_THROWS_AS(quartic.validate_on(g), std::invalid_argument);
}

TEST_CASE("lie and strang steps preserve the L2 norm") {
    Grid g = box1d(256);
    auto scheme = SchemeSpec::lie(0.05, smoothed_strong(1.0));
    auto scheme2 = SchemeSpec::strang(0.05, smoothed_strong(1.0));
    for (unsigned seed = 0; seed < 50; ++seed) {
        ComplexField f = oracles::band_limited_complex(g, 200 + seed);
        WaveFunction u = WaveFunction::make(f, 0.25);
        double m0 = norm(u.field, NormKind::L2());
        for (const WaveFunction& v :
             {free_step(u, 0.05), nonlinear_step(u, 0.05, smoothed_strong(1.0)),
              potential_step(u, 0.05, PotentialSpec::harmonic(), 0.0),
              lie_step(u, scheme), strang_step(u, scheme2)}) {
            CHECK(std::abs(norm(v.field, NormKind::L2()) - m0) <= 1e-12 * m0);
        }
    }
}

TEST_CASE("splitting with a zero kick reduces to the free flow") {
    WaveFunction u = gaussian_wave(box1d(), 0.5);
    auto scheme = SchemeSpec::lie(0.25, smoothed_strong(0.0));
    WaveFunction a = lie_step(u, scheme);
    WaveFunction b = free_step(u, 0.25);
    CHECK(l2_diff(a.field, b.field) < 1e-13);
    auto sch2 = SchemeSpec::strang(0.25, smoothed_strong(0.0));
    WaveFunction c = strang_step(u, sch2);
    CHECK(l2_diff(c.field, b.field) < 1e-13);
}

TEST_CASE("adjoint lie applies the kick first") {
    Grid g = box1d(256);
    WaveFunction u = gaussian_wave(g, 0.5);
    auto scheme = SchemeSpec::lie(0.1, smoothed_strong(1.0));
    WaveFunction a = lie_step(u, scheme.with_adjoint(true));
    WaveFunction manual =
        free_step(nonlinear_step(u, 0.1, smoothed_strong(1.0)), 0.1);
    CHECK(l2_diff(a.field, manual.field) < 1e-14);
    // differs from the default order at O(dt^2)
    WaveFunction b = lie_step(u, scheme);
    CHECK(l2_diff(a.field, b.field) > 1e-6);
}

TEST_CASE("evolve enforces the step-count contract and records the trace") {
    WaveFunction u = gaussian_wave(box1d(256), 0.5);
    auto scheme = SchemeSpec::lie(0.1, smoothed_strong(1.0));
    CHECK_THROWS_AS(evolve(u, scheme, 1.05), std::invalid_argument);

    auto res = evolve(u, scheme, 1.0);
    CHECK(res.steps == 10);
    REQUIRE(res.trace.size() == 11);
    CHECK(res.trace.front().t == doctest::Approx(0.0));
    CHECK(res.trace.back().t == doctest::Approx(1.0));
    const double m0 = res.trace.front().mass;
    for (const auto& rec : res.trace)
        CHECK(std::abs(rec.mass - m0) <= 1e-12 * m0);
}

TEST_CASE("blow-up guard trips on a refocusing Gaussian") {
    Grid g = Grid::make(1, {512}, {64.0}, {-32.0});
    const double eps = 1.0, tau = 8.0;
    // start from the time-reversed spread Gaussian; free flow refocuses it
    const cplx w(1.0, -eps * tau);
    ComplexField f = sample_complex(g, [&](const std::array<double, 3>& x) {
        return std::exp(-x[0] * x[0] / (2.0 * w)) / std::sqrt(w);
    });
    WaveFunction u = WaveFunction::make(std::move(f), eps);
    auto scheme = SchemeSpec::lie(1.0, smoothed_strong(0.0));
    scheme.blowup_factor = 1.5;
    CHECK_THROWS_AS(evolve(u, scheme, tau), GuardTrip);
    // with the default factor the same run is fine
    auto relaxed = SchemeSpec::lie(1.0, smoothed_strong(0.0));
    CHECK_NOTHROW(evolve(u, relaxed, tau));
}

TEST_CASE("reference solution reduces to the free flow when the kick vanishes") {
    WaveFunction u = gaussian_wave(box1d(), 0.5);
    auto scheme = SchemeSpec::strang(0.1, smoothed_strong(0.0));
    WaveFunction ref = reference_solution(u, scheme, 0.8, 1e-10);
    WaveFunction fr = free_step(u, 0.8);
    CHECK(l2_diff(ref.field, fr.field) < 1e-12);
}

TEST_CASE("reference solution passes its Richardson self-test") {
    WaveFunction u = gaussian_wave(box1d(256), 0.5);
    auto scheme = SchemeSpec::strang(0.05, smoothed_strong(1.0));
    WaveFunction coarse = reference_solution(u, scheme, 0.5, 1e-7);
    WaveFunction fine = reference_solution(u, scheme, 0.5, 1e-9);
    CHECK(l2_diff(coarse.field, fine.field) < 1e-7);
}

TEST_CASE("density and current of a plane wave") {
    Grid g = Grid::make(1, {64}, {2 * pi}, {0.0});
    ComplexField f = sample_complex(g, [](const std::array<double, 3>& x) {
        return std::exp(cplx(0, 5 * x[0]));
    });
    WaveFunction u = WaveFunction::make(std::move(f), 0.25);
    RealField rho = density(u);
    auto J = current(u);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        CHECK(rho.v[i] == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(J[0].v[i] == doctest::Approx(0.25 * 5.0).epsilon(1e-12));
    }
}

TEST_CASE("current of oscillatory data matches the phase/amplitude formula") {
    Grid g = box1d();
    const double eps = 0.5;
    ComplexField f = sample_complex(g, [&](const std::array<double, 3>& x) {
        double a = std::exp(-x[0] * x[0] / 2);
        double phi = 0.3 * std::exp(-x[0] * x[0] / 4);
        return a * std::exp(cplx(0, phi / eps));
    });
    WaveFunction u = WaveFunction::make(std::move(f), eps);
    auto J = current(u);
    double worst = 0.0;
    for (int i = 0; i < g.n(0); ++i) {
        double x = g.coord(0, i);
        double a = std::exp(-x * x / 2);
        double dphi = 0.3 * (-x / 2) * std::exp(-x * x / 4);
        worst = std::max(worst, std::abs(J[0].v[i] - a * a * dphi));
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("free flow conserves mass and momentum integrals") {
    Grid g = box1d();
    WaveFunction u = WaveFunction::make(
        sample_complex(g, [](const std::array<double, 3>& x) {
            return std::exp(-x[0] * x[0] / 2) * std::exp(cplx(0, 2 * x[0]));
        }), 0.5);
    WaveFunction v = free_step(u, 0.9);
    CHECK(integral(density(v)) == doctest::Approx(integral(density(u))).epsilon(1e-12));
    CHECK(integral(current(v)[0]) ==
          doctest::Approx(integral(current(u)[0])).epsilon(1e-12));
}

TEST_CASE("harmonic coherent state: oracle satisfies the equation, Strang tracks it") {
    Grid g = box1d();
    const double eps = 0.5, q0 = 1.0, p0 = 0.0;

    // residual check of the closed form itself: i eps dt u + eps^2/2 lap u - V u
    const double t0 = 0.4, dt = 1e-5;
    ComplexField um = coherent_exact(g, eps, t0 - dt, q0, p0);
    ComplexField up = coherent_exact(g, eps, t0 + dt, q0, p0);
    ComplexField uc = coherent_exact(g, eps, t0, q0, p0);
    ComplexField dudt = (cplx(1.0 / (2 * dt)) * (up - um));
    ComplexField lap = laplacian(uc);
    RealField V = PotentialSpec::harmonic().sample(g, 0.0);
    double worst = 0.0;
    for (std::size_t i = 0; i < uc.size(); ++i) {
        cplx res = cplx(0, eps) * dudt.v[i] + 0.5 * eps * eps * lap.v[i] -
                   V.v[i] * uc.v[i];
        worst = std::max(worst, std::abs(res));
    }
    CHECK(worst < 1e-6);

    // Strang splitting against the oracle over one unit of time
    WaveFunction u = WaveFunction::make(coherent_exact(g, eps, 0.0, q0, p0), eps);
    auto scheme = SchemeSpec::strang(1e-3, PotentialSpec::harmonic());
    auto res = evolve(u, scheme, 1.0);
    CHECK(l2_diff(res.state.field, coherent_exact(g, eps, 1.0, q0, p0)) < 1e-4);
}
