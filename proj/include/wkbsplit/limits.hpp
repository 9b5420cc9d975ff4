#pragma once

#include "wkbsplit/grid.hpp"
#include "wkbsplit/nonlinearity.hpp"

#include <vector>

namespace wkbsplit {

// Density/velocity pair for the limiting fluid system in (rho, v) = (|a|^2, grad phi).
struct EulerState {
    RealField rho;
    std::vector<RealField> v;

    // validates: one velocity component per axis, shared grid, finite entries
    static EulerState make(RealField rho, std::vector<RealField> v);

    const Grid& grid() const { return rho.grid; }
};

// Integrates d/dt rho = -div(rho v), d/dt v = -(v . grad) v - grad f(rho)
// over [0, T] with classical RK4 and spectral derivatives. The step is
// min(dt_int, dx / (4 max(1, |v|_inf))). Strong-coupling spec only (alpha = 0);
// pass a zero kernel for the pressureless system. Throws GuardTrip when
// |grad v|_inf exceeds 10 max(initial, 1).
EulerState euler_solve(const EulerState& init, double T, double dt_int,
                       const NonlinearitySpec& spec);

// d/dt v = -(v . grad) v, same stepper and guard.
std::vector<RealField> burgers_solve(const std::vector<RealField>& v0, double T,
                                     double dt_int);

// d/dt phi = -|grad phi|^2 / 2; guard watches the phase Hessian.
RealField eikonal_phase(const RealField& phi0, double T, double dt_int);

// Lower-bound estimate of the first characteristic-crossing time for
// d/dt v = -(v . grad) v from v0. In one dimension this is the exact formula
// -1 / min(v0') (infinity when v0' >= 0). In higher dimensions the Burgers
// system is integrated until |grad v|_inf has doubled four times and that
// time is reported; +infinity when it never does within the search horizon.
double caustic_time(const std::vector<RealField>& v0);

}  // namespace wkbsplit
