#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "wkbsplit/errors.hpp"
#include "wkbsplit/limits.hpp"
#include "wkbsplit/wkb.hpp"

#include "oracles.hpp"

#include <cmath>
#include <numbers>

using namespace wkbsplit;
constexpr double pi = std::numbers::pi;

namespace {

Grid circle(int n = 128) { return Grid::make(1, {n}, {2 * pi}, {0.0}); }

NonlinearitySpec smoothed_strong(double lambda = 1.0) {
    return NonlinearitySpec::make(KernelSpec::smoothed(lambda), std::nullopt, 0.0);
}

}  // namespace

TEST_CASE("euler state construction validates inputs") {
    Grid g = circle(64);
    RealField rho(g, 1.0);
    std::vector<RealField> v{RealField(g, 0.0)};
    CHECK_NOTHROW(EulerState::make(rho, v));
    CHECK_THROWS_AS(EulerState::make(rho, {}), std::invalid_argument);
    CHECK_THROWS_AS(EulerState::make(rho, {RealField(g), RealField(g)}),
                    std::invalid_argument);
    Grid g2 = circle(32);
    CHECK_THROWS_AS(EulerState::make(rho, {RealField(g2)}), std::invalid_argument);
    RealField bad = rho;
    bad.v[0] = std::nan("");
    CHECK_THROWS_AS(EulerState::make(bad, v), std::invalid_argument);
}

TEST_CASE("constant states are stationary") {
    Grid g = circle(64);
    EulerState s0 = EulerState::make(RealField(g, 0.7), {RealField(g, 0.0)});
    EulerState s1 = euler_solve(s0, 0.5, 0.01, smoothed_strong(1.0));
    CHECK(norm(s1.rho - s0.rho, NormKind::Linf()) < 1e-12);
    CHECK(norm(s1.v[0] - s0.v[0], NormKind::Linf()) < 1e-12);

    // Poisson kernel with its zero-mode convention, three dimensions
    Grid g3 = Grid::make(3, {8, 8, 8}, {2 * pi, 2 * pi, 2 * pi}, {0.0, 0.0, 0.0});
    auto poisson = NonlinearitySpec::make(KernelSpec::poisson(1.0, 3), std::nullopt, 0.0);
    EulerState p0 = EulerState::make(
        RealField(g3, 0.4), {RealField(g3), RealField(g3), RealField(g3)});
    EulerState p1 = euler_solve(p0, 0.3, 0.05, poisson);
    CHECK(norm(p1.rho - p0.rho, NormKind::Linf()) < 1e-12);
    for (int i = 0; i < 3; ++i)
        CHECK(norm(p1.v[i], NormKind::Linf()) < 1e-12);
}

TEST_CASE("zero density decouples the system into Burgers") {
    Grid g = circle(128);
    RealField v0 = sample_real(g, [](const std::array<double, 3>& x) {
        return 0.2 * std::sin(x[0]);
    });
    EulerState s0 = EulerState::make(RealField(g, 0.0), {v0});
    EulerState s1 = euler_solve(s0, 0.5, 0.01, smoothed_strong(1.0));
    auto vb = burgers_solve({v0}, 0.5, 0.01);
    CHECK(norm(s1.v[0] - vb[0], NormKind::Linf()) < 1e-10);
    CHECK(norm(s1.rho, NormKind::Linf()) < 1e-14);
}

TEST_CASE("euler conserves total mass") {
    Grid g = circle(256);
    RealField rho0 = sample_real(g, [](const std::array<double, 3>& x) {
        return 1.0 + 0.3 * std::cos(x[0]);
    });
    RealField v0 = sample_real(g, [](const std::array<double, 3>& x) {
        return 0.2 * std::sin(x[0]);
    });
    EulerState s0 = EulerState::make(rho0, {v0});
    EulerState s1 = euler_solve(s0, 0.6, 0.005, smoothed_strong(1.0));
    CHECK(integral(s1.rho) == doctest::Approx(integral(s0.rho)).epsilon(1e-10));
}

TEST_CASE("euler rejects weak-coupling specs") {
    Grid g = circle(64);
    EulerState s0 = EulerState::make(RealField(g, 1.0), {RealField(g, 0.0)});
    auto weak = NonlinearitySpec::make(std::nullopt, LocalTerm::cubic(1.0), 1.0);
    CHECK_THROWS_AS(euler_solve(s0, 0.1, 0.01, weak), std::invalid_argument);
}

TEST_CASE("burgers keeps constants constant and T=0 is the identity") {
    Grid g = circle(64);
    std::vector<RealField> vc{RealField(g, 0.37)};
    auto out = burgers_solve(vc, 1.0, 0.05);
    CHECK(norm(out[0] - vc[0], NormKind::Linf()) < 1e-13);
    RealField v0 = sample_real(g, [](const std::array<double, 3>& x) {
        return std::sin(x[0]);
    });
    auto id = burgers_solve({v0}, 0.0, 0.05);
    CHECK(norm(id[0] - v0, NormKind::Linf()) == 0.0);
}

TEST_CASE("burgers matches the method of characteristics") {
    Grid g = circle(128);
    RealField v0 = sample_real(g, [](const std::array<double, 3>& x) {
        return -std::sin(x[0]);
    });
    auto vt = burgers_solve({v0}, 0.5, 0.002);
    auto v0f = [](double x) { return -std::sin(x); };
    double worst = 0.0;
    for (int i = 0; i < g.n(0); ++i) {
        double x = g.coord(0, i);
        // characteristics contract toward x = pi; bracket the foot point
        double want = oracles::burgers_characteristic_value(v0f, 0.5, x,
                                                            x - 0.6, x + 0.6);
        worst = std::max(worst, std::abs(vt[0].v[i] - want));
    }
    CHECK(worst < 1e-8);
}

TEST_CASE("burgers keeps gradient data curl-free") {
    Grid g = Grid::make(2, {64, 64}, {2 * pi, 2 * pi}, {0.0, 0.0});
    RealField phi0 = sample_real(g, [](const std::array<double, 3>& x) {
        return 0.2 * std::sin(x[0]) * std::sin(x[1]);
    });
    auto v0 = gradient(phi0);
    auto vt = burgers_solve(v0, 0.4, 0.01);
    RealField curl = spectral_derivative(vt[1], {1, 0, 0}) -
                     spectral_derivative(vt[0], {0, 1, 0});
    CHECK(norm(curl, NormKind::Linf()) < 1e-10);
}

TEST_CASE("burgers shock guard trips before the gradient blows up") {
    Grid g = circle(256);
    RealField v0 = sample_real(g, [](const std::array<double, 3>& x) {
        return -2.0 * std::sin(x[0]);
    });
    // shock at t = 0.5; the guard cap of 10 max(2, 1) = 20 is reached at 0.45
    CHECK_THROWS_AS(burgers_solve({v0}, 0.49, 0.002), GuardTrip);
    CHECK_NOTHROW(burgers_solve({v0}, 0.40, 0.002));
}

TEST_CASE("eikonal phase is consistent with its gradient flow") {
    Grid g = Grid::make(1, {256}, {32.0}, {-16.0});
    RealField phi0 = sample_real(g, [](const std::array<double, 3>& x) {
        return 0.3 * std::exp(-x[0] * x[0] / 2);
    });
    RealField id = eikonal_phase(phi0, 0.0, 0.01);
    CHECK(norm(id - phi0, NormKind::Linf()) == 0.0);
    RealField flat = eikonal_phase(RealField(g, 0.9), 1.0, 0.01);
    CHECK(norm(flat - RealField(g, 0.9), NormKind::Linf()) < 1e-13);

    RealField phiT = eikonal_phase(phi0, 0.5, 0.005);
    auto vT = burgers_solve(gradient(phi0), 0.5, 0.005);
    auto gphiT = gradient(phiT);
    CHECK(norm(gphiT[0] - vT[0], NormKind::Linf()) < 1e-9);
}

TEST_CASE("caustic time in one dimension uses the exact formula") {
    Grid g = circle(128);
    RealField vm = sample_real(g, [](const std::array<double, 3>& x) {
        return -std::sin(x[0]);
    });
    CHECK(caustic_time({vm}) == doctest::Approx(1.0).epsilon(1e-12));
    RealField vp = sample_real(g, [](const std::array<double, 3>& x) {
        return std::sin(x[0]);
    });
    CHECK(caustic_time({vp}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isinf(caustic_time({RealField(g, 0.4)})));

    Grid gc = Grid::make(1, {1024}, {32.0}, {-16.0});
    RealField vg = sample_real(gc, [](const std::array<double, 3>& x) {
        return -0.3 * x[0] * std::exp(-x[0] * x[0] / 2);
    });
    CHECK(caustic_time({vg}) == doctest::Approx(10.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("multidimensional caustic estimate lands near the Riccati time") {
    Grid g = Grid::make(2, {128, 128}, {2 * pi, 2 * pi}, {0.0, 0.0});
    RealField phi0 = sample_real(g, [](const std::array<double, 3>& x) {
        return 0.2 * std::sin(x[0]) * std::sin(x[1]);
    });
    // gradient doubles four times from 0.2 at t = (1 - 1/16)/0.2 = 4.6875,
    // ahead of the crossing at t = 5
    double est = caustic_time(gradient(phi0));
    CHECK(est > 4.4);
    CHECK(est < 4.9);
}

TEST_CASE("grenier flow approaches the fluid limit as eps shrinks") {
    Grid g = Grid::make(1, {512}, {32.0}, {-16.0});
    RealField phi0 = sample_real(g, [](const std::array<double, 3>& x) {
        return 0.3 * std::exp(-x[0] * x[0] / 2);
    });
    ComplexField a0 = sample_complex(g, [](const std::array<double, 3>& x) {
        return std::exp(-x[0] * x[0]);
    });
    auto nl = smoothed_strong(1.0);
    const double T = 0.8;

    EulerState f0 = EulerState::make(abs2(a0), gradient(phi0));
    EulerState fT = euler_solve(f0, T, 0.01, nl);

    auto err_at = [&](double eps) {
        WKBState s = WKBState::make(phi0, a0, eps);
        WKBState w = grenier_flow(s, T, T, nl);
        double e = norm(wkb_density(w) - fT.rho, NormKind::Linf());
        auto gw = gradient(w.phi);
        e = std::max(e, norm(gw[0] - fT.v[0], NormKind::Linf()));
        return e;
    };
    double e_big = err_at(0.1);
    double e_small = err_at(0.02);
    CHECK(e_small < e_big);
    CHECK(e_small < 0.01);
}
