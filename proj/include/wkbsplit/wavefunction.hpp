#pragma once

#include "wkbsplit/errors.hpp"
#include "wkbsplit/grid.hpp"
#include "wkbsplit/nonlinearity.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace wkbsplit {

// Semiclassical wavefunction: iε ∂t u + (ε²/2) Δu = ε^α f(|u|²) u, or with an
// external potential V in place of the nonlinearity.
struct WaveFunction {
    ComplexField field;
    double eps = 1.0;

    static WaveFunction make(ComplexField field, double eps);
};

// Scalar potential V(t, x). Must be subquadratic: second and third spatial
// derivatives bounded, checked by centered-difference sampling on the grid
// interior against derivative_bound.
struct PotentialSpec {
    std::function<double(double, const std::array<double, 3>&)> V;
    double derivative_bound = 1e3;

    static PotentialSpec make(
        std::function<double(double, const std::array<double, 3>&)> V,
        double derivative_bound = 1e3);
    static PotentialSpec harmonic();  // |x|^2 / 2

    void validate_on(const Grid& g, double t = 0.0) const;
    RealField sample(const Grid& g, double t) const;
};

struct SchemeSpec {
    enum class Composition { Lie, Strang };

    Composition composition = Composition::Lie;
    bool adjoint = false;  // Lie only: kick before the free flight
    double dt = 0.0;
    std::optional<NonlinearitySpec> nonlinearity;
    std::optional<PotentialSpec> potential;
    double blowup_factor = 1e6;

    static SchemeSpec lie(double dt, NonlinearitySpec nl);
    static SchemeSpec lie(double dt, PotentialSpec pot);
    static SchemeSpec strang(double dt, NonlinearitySpec nl);
    static SchemeSpec strang(double dt, PotentialSpec pot);
    SchemeSpec with_adjoint(bool on) const;
};

// Multiply the spectrum by exp(-i theta |xi|^2 / 2); the free flow of a
// wavefunction over time t is theta = eps * t.
ComplexField free_propagate(const ComplexField& u, double theta);

WaveFunction free_step(const WaveFunction& u, double t);
WaveFunction nonlinear_step(const WaveFunction& u, double t,
                            const NonlinearitySpec& spec);
WaveFunction potential_step(const WaveFunction& u, double t,
                            const PotentialSpec& pot, double t_now);

WaveFunction lie_step(const WaveFunction& u, const SchemeSpec& scheme,
                      double t_now = 0.0);
WaveFunction strang_step(const WaveFunction& u, const SchemeSpec& scheme,
                         double t_now = 0.0);

struct EvolveRecord {
    double t = 0.0;
    double mass = 0.0;  // L2 norm
    double linf = 0.0;
};

struct EvolveResult {
    WaveFunction state;
    std::vector<EvolveRecord> trace;  // initial state plus one record per step
    std::size_t steps = 0;
};

// Runs round(T/dt) steps; T must be an integer multiple of dt to 1e-9
// relative. Throws GuardTrip when the sup norm grows past blowup_factor.
EvolveResult evolve(const WaveFunction& u0, const SchemeSpec& scheme, double T,
                    double t0 = 0.0);

// Strang run with dt halved (from T/16) until two successive resolutions are
// within tol in L2. Throws after max_halvings without convergence.
WaveFunction reference_solution(const WaveFunction& u0, const SchemeSpec& scheme,
                                double T, double tol, int max_halvings = 14);

RealField density(const WaveFunction& u);                // |u|^2
std::vector<RealField> current(const WaveFunction& u);   // eps Im(conj u grad u)

}  // namespace wkbsplit
