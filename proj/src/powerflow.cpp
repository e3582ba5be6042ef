#include "gfi/powerflow.hpp"

#include <cmath>
#include <sstream>

namespace gfi {

static void check_problem(const PowerFlowProblem &p)
{
    if (!p.red)
        throw std::invalid_argument("power flow: no network");
    if (p.s_ref.size() != 2 * p.red->n)
        throw std::invalid_argument("power flow: s_ref must have 2n entries");
}

double existence_margin(const PowerFlowProblem &p)
{
    check_problem(p);
    const ReducedNetwork &r = *p.red;
    for (int k = 0; k < r.n; ++k)
        if (blk(r.w_hat, k).norm() == 0.0)
            throw NumericalError("degenerate no-load voltage");
    const BlockMatrix Dw = dpmat(r.w_hat);
    BlockMatrix Dwinv = BlockMatrix::Zero(2 * r.n, 2 * r.n);
    for (int k = 0; k < r.n; ++k)
        Dwinv.block<2, 2>(2 * k, 2 * k) = Dw.block<2, 2>(2 * k, 2 * k).inverse();
    const BlockMatrix T = Dw * r.Yh_red.partialPivLu().solve(Dwinv * dpmat(p.s_ref));
    return cnorm_inf_mat(T);
}

double uniform_margin(const ReducedNetwork &red, double p_hat)
{
    const Mat inv = red.Yh_red.partialPivLu().inverse();
    return p_hat * cnorm_inf_mat(inv);
}

PowerFlowSolution solve_fixed_point(const PowerFlowProblem &p, double tol, int max_iter)
{
    check_problem(p);
    const ReducedNetwork &r = *p.red;
    const int n = r.n;
    PowerFlowSolution sol;
    sol.margin = existence_margin(p);
    sol.certified = sol.margin <= 0.375;
    const double rad = 0.5 * cnorm_inf(r.w_hat);
    Eigen::PartialPivLU<Mat> lu(r.Yh_red);

    Vec v = r.w_hat;
    Vec dinv(2 * n);
    bool converged = false;
    for (int it = 1; it <= max_iter; ++it) {
        for (int k = 0; k < n; ++k) {
            const Eigen::Vector2d u = blk(v, k);
            const double q = u.squaredNorm();
            if (q == 0.0)
                throw NumericalError("power flow: zero voltage block");
            dinv.segment<2>(2 * k) = dmat(u) * p.s_ref.segment<2>(2 * k) / q;
        }
        Vec vn = r.w_hat + (2.0 / 3.0) * lu.solve(dinv);
        if (!vn.allFinite())
            throw NumericalError("power flow: non-finite iterate");
        const double step = cnorm_inf(Vec(vn - v));
        sol.step_history.push_back(step);
        v = vn;
        sol.iterations = it;
        sol.residual = step;
        if (cnorm_inf(Vec(v - r.w_hat)) > rad) {
            sol.iterates_in_ball = false;
            if (sol.certified)
                throw NumericalError("power flow: iterate left the ball although the margin holds");
        }
        if (step <= tol) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        std::ostringstream os;
        os << "power flow: no convergence in " << max_iter << " iterations (last step " << sol.residual << ")";
        throw NumericalError(os.str());
    }
    // polish down to the rounding floor; the tolerance only decides convergence
    for (int extra = 0; extra < 100; ++extra) {
        for (int k = 0; k < n; ++k) {
            const Eigen::Vector2d u = blk(v, k);
            dinv.segment<2>(2 * k) = dmat(u) * p.s_ref.segment<2>(2 * k) / u.squaredNorm();
        }
        const Vec vn = r.w_hat + (2.0 / 3.0) * lu.solve(dinv);
        const double step = cnorm_inf(Vec(vn - v));
        if (!(step < sol.residual))
            break;
        v = vn;
        sol.residual = step;
    }
    sol.v_hat = v;
    sol.i_hat = r.Yh_red * (v - r.w_hat);
    sol.in_ball = cnorm_inf(Vec(v - r.w_hat)) <= rad;
    sol.res_power = (p.s_ref - instantaneous_power(v, sol.i_hat)).cwiseAbs().maxCoeff();
    const Eigen::Vector2d vg(0.0, 1.0);
    sol.res_current = (sol.i_hat - r.Yh_red * v - r.Yh_g * vg).cwiseAbs().maxCoeff();
    return sol;
}

Vec delta_ref_of(const BlockVector &v_hat)
{
    const Eigen::Index n = v_hat.size() / 2;
    Vec d(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (v_hat(2 * k) == 0.0 && v_hat(2 * k + 1) == 0.0)
            throw NumericalError("equilibrium: zero voltage, angle undefined");
        // v_D cos(d) + v_Q sin(d) = 0 with positive local q-component
        d(k) = std::atan2(-v_hat(2 * k), v_hat(2 * k + 1));
    }
    return d;
}

Equilibrium build_equilibrium(const DynamicsSystem &sys, const PowerFlowSolution &sol,
                              const std::vector<int> &alpha_in)
{
    const int n = sys.n();
    const Layout &L = sys.lay;
    std::vector<int> alpha = alpha_in;
    alpha.resize(n, 0);
    Equilibrium eq;
    eq.alpha = alpha;
    eq.delta_ref = delta_ref_of(sol.v_hat);
    Vec x = Vec::Zero(L.dim);
    const Block2 &J = Jmat();
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d v = blk(sol.v_hat, k);
        const double d = eq.delta_ref(k);
        const double dk = d + (alpha[k] ? M_PI : 0.0);
        const double sign = alpha[k] ? -1.0 : 1.0;
        const Eigen::Vector2d phis = sign * (Hmat() * rot(d) * (sys.tpp(k) * J * v + blk(sol.i_hat, k)));
        // re-evaluate i_l through the controller's own expression so the rounding matches rhs
        const Eigen::Vector2d il = current_reference(dk, sys.Ts(k), Eigen::Vector2d::Zero(), phis);
        x(L.delta + k) = dk;
        x.segment<2>(L.savg + 2 * k) = sys.s_ref.segment<2>(2 * k);
        x.segment<2>(L.phis + 2 * k) = phis;
        x.segment<2>(L.gam + 2 * k) = v;
        x.segment<2>(L.il + 2 * k) = il;
        x.segment<2>(L.vo + 2 * k) = v;
    }
    // Z_L xi = (B_0^T x I) v_g + (B_I^T x I) v_o
    const Vec rhs_v = kron_i2(sys.adm.B0.transpose()) * sys.vg_hat + kron_i2(sys.adm.BI.transpose()) * sol.v_hat;
    Eigen::PartialPivLU<Mat> zlu(sys.red.Zh_L);
    Vec xi = zlu.solve(rhs_v);
    xi += zlu.solve(Vec(rhs_v - sys.red.Zh_L * xi));
    x.segment(L.xi, 2 * sys.m()) = xi;
    eq.state = x;
    return eq;
}

StaticSPL static_spl(const std::function<ReducedNetwork(int)> &family, double p_hat, int n_max)
{
    if (!(p_hat > 0))
        return {n_max, true};
    StaticSPL out;
    int fails = 0;
    for (int n = 1; n <= n_max; ++n) {
        const ReducedNetwork r = family(n);
        PowerFlowProblem p{&r, kron_i2(Vec::Ones(n)) * Eigen::Vector2d(p_hat, 0.0)};
        if (existence_margin(p) <= 0.375) {
            out.spl = n;
            fails = 0;
        } else if (++fails >= 3) {
            return out;
        }
    }
    out.capped = fails == 0;
    return out;
}

void write_powerflow_csv(std::ostream &os, const PowerFlowSolution &sol)
{
    os << "inverter,v_D,v_Q,i_D,i_Q,res_power,res_current\n";
    os.precision(17);
    for (Eigen::Index k = 0; k < sol.v_hat.size() / 2; ++k)
        os << k << ',' << sol.v_hat(2 * k) << ',' << sol.v_hat(2 * k + 1) << ',' << sol.i_hat(2 * k) << ','
           << sol.i_hat(2 * k + 1) << ',' << sol.res_power << ',' << sol.res_current << '\n';
}

} // namespace gfi
