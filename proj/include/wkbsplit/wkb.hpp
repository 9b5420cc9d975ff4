#pragma once

#include "wkbsplit/grid.hpp"
#include "wkbsplit/nonlinearity.hpp"
#include "wkbsplit/wavefunction.hpp"

#include <string>
#include <vector>

namespace wkbsplit {

// Phase/amplitude pair representing u = amp * exp(i phi / eps). The phase is
// real; the order-eps correction is carried by the complex amplitude.
struct WKBState {
    RealField phi;
    ComplexField amp;
    double eps = 1.0;

    // validates: same grid, finite entries, eps in (0, 1]
    static WKBState make(RealField phi, ComplexField amp, double eps);

    const Grid& grid() const { return phi.grid; }
};

// Generator output / linear-combination carrier for (phi, amp) pairs.
struct WKBDelta {
    RealField phi;
    ComplexField amp;
};

// Controls for the exponential-RK4 integrator behind x_flow/grenier_flow.
// Substeps obey delta <= c_cfl * dx / max(1, |grad phi_0|_inf) and the count
// is doubled until two runs at m and 2m substeps differ by at most
// tol * t + 1e-13 in |da|_L2 + |grad dphi|_L2 + |dphi|_Linf.
struct XFlowConfig {
    double c_cfl = 0.5;
    bool dealias = false;          // 2/3-rule filter on the nonlinear stage terms
    double tol = 1e-8;
    double hessian_factor = 10.0;  // caustic guard threshold multiplier
    int max_doublings = 14;
};

// u = amp * exp(i phi / eps)
WaveFunction reconstruct(const WKBState& s);

// Kick flow on phase/amplitude data. Strong coupling (alpha = 0) moves the
// phase: phi -= t * f(|a|^2). Weak coupling (alpha >= 1) rotates the
// amplitude: a *= exp(-i eps^(alpha-1) t f(|a|^2)). Exact, no time stepping.
WKBState y_flow(const WKBState& s, double t, const NonlinearitySpec& spec);

// Transport flow of the phase/amplitude system
//   d/dt phi = -|grad phi|^2 / 2
//   d/dt a   = -grad phi . grad a - a lap phi / 2 + i (eps/2) lap a
// with the stiff Laplacian term applied exactly in Fourier space between the
// RK4 stages. Throws GuardTrip when the phase Hessian indicates a caustic.
WKBState x_flow(const WKBState& s, double t, const XFlowConfig& cfg = {});

// One first-order step: transport over dt, then kick over dt.
WKBState lie_wkb_step(const WKBState& s, double dt, const NonlinearitySpec& spec,
                      const XFlowConfig& cfg = {});

// Unsplit flow of the full coupled system, used as the phase/amplitude-side
// reference. Strong coupling puts f(|a|^2) in the phase equation; weak
// coupling leaves the phase equation free and adds -i eps^(alpha-1) f(|a|^2) a
// to the amplitude equation. dt_int caps the substep on top of the CFL rule.
WKBState grenier_flow(const WKBState& s, double t, double dt_int,
                      const NonlinearitySpec& spec, const XFlowConfig& cfg = {});

// Right-hand sides of the two flows at a state (A: transport, B: kick).
WKBDelta apply_generator_A(const WKBState& s);
WKBDelta apply_generator_B(const WKBState& s, const NonlinearitySpec& spec);

// Commutator [A, B] evaluated at a state, spectral derivatives throughout.
struct CommutatorOutput {
    RealField phi_c;
    ComplexField amp_c;
};
CommutatorOutput commutator_AB(const WKBState& s, const NonlinearitySpec& spec);

// Error triple between a numerical and a reference state on the same grid:
// amplitude in Hs(s-1), phase gradient in Hs(s), phase in Linf.
struct WkbError {
    double e_amp = 0.0;
    double e_gradphase = 0.0;
    double e_phase_inf = 0.0;
    double total() const { return e_amp + e_gradphase + e_phase_inf; }
};
WkbError wkb_error(const WKBState& numeric, const WKBState& exact, double s);

// L2 distance of the reconstructed wavefunctions, evaluated in the gauge
// |a_n exp(i (phi_n - phi_ref)/eps) - a_ref|_L2 so only the phase difference
// is exponentiated (safe for small eps where exp(i phi/eps) itself is
// unresolvable).
double wave_l2_error(const WKBState& numeric, const WKBState& exact);

RealField wkb_density(const WKBState& s);               // |a|^2
std::vector<RealField> wkb_current(const WKBState& s);  // |a|^2 grad phi + eps Im(conj a grad a)

// Snapshot I/O: <prefix>.phi.fld, <prefix>.amp.fld, <prefix>.json (eps).
void write_snapshot(const std::string& prefix, const WKBState& s);
WKBState read_snapshot(const std::string& prefix);

}  // namespace wkbsplit
