#pragma once
// Per-unit power flow: fixed-point solver, existence margin, equilibria.

#include "gfi/dynamics.hpp"
#include "gfi/netgraph.hpp"

#include <functional>
#include <ostream>
#include <vector>

namespace gfi {

struct PowerFlowProblem {
    const ReducedNetwork *red = nullptr;
    BlockVector s_ref;
};

struct PowerFlowSolution {
    BlockVector v_hat, i_hat;
    int iterations = 0;
    double residual = 0;       // last iterate difference, C-inf norm
    double res_power = 0;      // || s_ref - 3/2 D(v) i ||_inf
    double res_current = 0;    // || i - Y_red v - Y_g v_g ||_inf
    bool in_ball = false;      // final iterate in Omega
    bool iterates_in_ball = true;
    bool certified = false;    // existence margin <= 3/8
    double margin = 0;
    std::vector<double> step_history;
};

struct Equilibrium {
    std::vector<int> alpha;
    Vec state;
    Vec delta_ref;
};

double existence_margin(const PowerFlowProblem &p);
// uniform-injection shortcut p_hat ||Y_red^-1||_{C,inf}
double uniform_margin(const ReducedNetwork &red, double p_hat);

PowerFlowSolution solve_fixed_point(const PowerFlowProblem &p, double tol = 1e-12, int max_iter = 1000);

Vec delta_ref_of(const BlockVector &v_hat);
Equilibrium build_equilibrium(const DynamicsSystem &sys, const PowerFlowSolution &sol,
                              const std::vector<int> &alpha = {});

struct StaticSPL {
    int spl = 0;
    bool capped = false;
};
// generator maps n to the reduced network of the n-th family member
StaticSPL static_spl(const std::function<ReducedNetwork(int)> &family, double p_hat, int n_max);

void write_powerflow_csv(std::ostream &os, const PowerFlowSolution &sol);

} // namespace gfi
