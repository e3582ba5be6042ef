#pragma once
// Adaptive stiff integrator: Rosenbrock pair of orders 2(3) (Shampine's ode23s)
// with a finite-difference Jacobian and cubic Hermite dense output.

#include "gfi/fdjac.hpp"

#include <vector>

namespace gfi {

struct IntegratorOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    double h0 = 0.0; // 0 picks an initial step from the rhs scale
    double h_max = 0.0;
    long max_steps = 2000000;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec> x;
    long steps = 0, rejected = 0, rhs_evals = 0;
};

// Samples the solution at the requested (increasing) times within [t0, t_end].
Trajectory integrate_stiff(const VecField &f, const Vec &x0, double t0, double t_end,
                           const std::vector<double> &sample_times,
                           const IntegratorOptions &opt = {});

} // namespace gfi
