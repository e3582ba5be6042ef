#pragma once
// Full-order dimensionless network dynamics and the reduced (eta) dynamics.
//
// State layout (n inverters, m lines), 13n + 2m entries:
//   v_pll[n] phi_pll[n] delta[n] s_avg[2n] phi_s[2n] gamma[2n] i_l[2n] v_o[2n] xi[2m]
// delta is stored unwrapped.

#include "gfi/integrator.hpp"
#include "gfi/inverter.hpp"
#include "gfi/netgraph.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace gfi {

struct Layout {
    int n = 0, m = 0;
    int vpll = 0, phipll = 0, delta = 0, savg = 0, phis = 0, gam = 0, il = 0, vo = 0, xi = 0, dim = 0;
    Layout() = default;
    Layout(int n_, int m_);
};

struct DynamicsSystem {
    NetworkModel model;
    AdmittanceDecomposition adm;
    ReducedNetwork red;
    std::vector<InverterParams> inv;
    BlockVector s_ref;
    Layout lay;
    // per-inverter rates
    Vec tPLL, tpPLL, TPLL, ts, tps, Ts, tc, Tc, kl, ko, tpp;
    Vec RL_hat; // per-unit load resistances
    Eigen::Vector2d vg_hat{0.0, 1.0};

    int n() const { return lay.n; }
    int m() const { return lay.m; }
    int dim() const { return lay.dim; }
};

DynamicsSystem make_system(const NetworkModel &model, const std::vector<InverterParams> &inv,
                           const BlockVector &s_ref);

// current reference R(-delta) H (T_s phi_s' + phi_s); shared by rhs and the equilibrium builder
inline Eigen::Vector2d current_reference(double delta, double T_s, const Eigen::Vector2d &dphis,
                                         const Eigen::Vector2d &phis)
{
    return rot(-delta) * Hmat() * (T_s * dphis + phis);
}

BlockVector instantaneous_power(const BlockVector &v_o, const BlockVector &i_o);

// inverter output currents (B_I x I) xi
BlockVector output_currents(const DynamicsSystem &sys, const Vec &x);

Vec rhs(const DynamicsSystem &sys, const Vec &x);

std::vector<std::string> state_names(const DynamicsSystem &sys);

Trajectory simulate(const DynamicsSystem &sys, const Vec &x0, double t_end, int n_samples,
                    const IntegratorOptions &opt = {});
void write_trajectory_csv(std::ostream &os, const DynamicsSystem &sys, const Trajectory &tr);

struct ReducedOrderData {
    BlockMatrix Yh_red, Yh_Cred;
    BlockVector v_ref, i_ref, s_ref;
    Vec delta_ref, tau_p_s;
};

// eta' = R(-delta) H [tau'_s]^-1 (s_ref - 3/2 D(Yc^-1 eta + v) (Y Yc^-1 eta + i))
Vec reduced_order_rhs(const ReducedOrderData &data, const Vec &eta);

} // namespace gfi
