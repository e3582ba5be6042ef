#include "gfi/dynamics.hpp"

#include <cmath>

namespace gfi {

Layout::Layout(int n_, int m_) : n(n_), m(m_)
{
    vpll = 0;
    phipll = n;
    delta = 2 * n;
    savg = 3 * n;
    phis = 5 * n;
    gam = 7 * n;
    il = 9 * n;
    vo = 11 * n;
    xi = 13 * n;
    dim = 13 * n + 2 * m;
}

DynamicsSystem make_system(const NetworkModel &model, const std::vector<InverterParams> &inv,
                           const BlockVector &s_ref)
{
    const int n = model.n_inverters;
    if (int(inv.size()) != n)
        throw std::invalid_argument("make_system: one InverterParams per inverter required");
    if (s_ref.size() != 2 * n)
        throw std::invalid_argument("make_system: s_ref must have 2n entries");
    for (const auto &ln : model.lines)
        if (!(ln.L > 0))
            throw std::invalid_argument("make_system: dynamics need inductive lines (L > 0)");
    DynamicsSystem s;
    s.model = model;
    s.adm = assemble_admittance(model);
    Vec Cf(n);
    for (int k = 0; k < n; ++k)
        Cf(k) = inv[k].C_f;
    s.red = kron_reduce(s.adm, model, Cf);
    s.inv = inv;
    s.s_ref = s_ref;
    s.lay = Layout(n, model.n_lines());
    const double base = model.V_g * model.V_g / model.s_nom;
    auto fill = [&](Vec &v, auto get) {
        v.resize(n);
        for (int k = 0; k < n; ++k)
            v(k) = get(inv[k]);
    };
    fill(s.tPLL, [](const InverterParams &p) { return p.tc.tau_PLL; });
    fill(s.tpPLL, [](const InverterParams &p) { return p.tc.tau_p_PLL; });
    fill(s.TPLL, [](const InverterParams &p) { return p.tc.T_PLL; });
    fill(s.ts, [](const InverterParams &p) { return p.tc.tau_s; });
    fill(s.tps, [](const InverterParams &p) { return p.tc.tau_p_s; });
    fill(s.Ts, [](const InverterParams &p) { return p.tc.T_s; });
    fill(s.tc, [](const InverterParams &p) { return p.tc.tau_c; });
    fill(s.Tc, [](const InverterParams &p) { return p.tc.T_c; });
    fill(s.kl, [&](const InverterParams &p) { return base / p.L_f; });
    fill(s.ko, [&](const InverterParams &p) { return 1.0 / (base * p.C_f); });
    s.tpp = s.red.tau_pp_LC;
    s.RL_hat.resize(model.n_loads);
    for (int k = 0; k < model.n_loads; ++k)
        s.RL_hat(k) = model.load_resistances[k] / base;
    return s;
}

BlockVector instantaneous_power(const BlockVector &v_o, const BlockVector &i_o)
{
    BlockVector s(v_o.size());
    for (Eigen::Index k = 0; k < v_o.size() / 2; ++k)
        s.segment<2>(2 * k) = 1.5 * dmat(Eigen::Vector2d(blk(v_o, k))) * blk(i_o, k);
    return s;
}

BlockVector output_currents(const DynamicsSystem &sys, const Vec &x)
{
    const int n = sys.n(), off = 1 + sys.model.n_loads;
    BlockVector io = BlockVector::Zero(2 * n);
    for (int e = 0; e < sys.m(); ++e) {
        const Line &ln = sys.model.lines[e];
        const Eigen::Vector2d xe = x.segment<2>(sys.lay.xi + 2 * e);
        if (ln.from >= off)
            io.segment<2>(2 * (ln.from - off)) += xe;
        if (ln.to >= off)
            io.segment<2>(2 * (ln.to - off)) -= xe;
    }
    return io;
}

Vec rhs(const DynamicsSystem &sys, const Vec &x)
{
    const Layout &L = sys.lay;
    if (x.size() != L.dim)
        throw std::invalid_argument("rhs: state dimension mismatch");
    const int n = L.n, nl = sys.model.n_loads;
    const Block2 &J = Jmat();
    Vec f(L.dim);

    const BlockVector io = output_currents(sys, x);
    for (int k = 0; k < n; ++k) {
        const double vpll = x(L.vpll + k), phipll = x(L.phipll + k), d = x(L.delta + k);
        const Eigen::Vector2d savg = x.segment<2>(L.savg + 2 * k);
        const Eigen::Vector2d phis = x.segment<2>(L.phis + 2 * k);
        const Eigen::Vector2d gam = x.segment<2>(L.gam + 2 * k);
        const Eigen::Vector2d il = x.segment<2>(L.il + 2 * k);
        const Eigen::Vector2d vo = x.segment<2>(L.vo + 2 * k);
        const Eigen::Vector2d iok = io.segment<2>(2 * k);
        const Block2 Rd = rot(d);

        const double vod = (Rd * vo)(0);
        f(L.vpll + k) = (vod - vpll) / sys.tPLL(k);
        f(L.phipll + k) = -vpll / sys.TPLL(k);
        const double dd = (phipll - vpll) / sys.tpPLL(k);
        f(L.delta + k) = dd;

        const Eigen::Vector2d sh = 1.5 * dmat(vo) * iok;
        f.segment<2>(L.savg + 2 * k) = (sh - savg) / sys.ts(k);
        const Eigen::Vector2d dphis = (sys.s_ref.segment<2>(2 * k) - savg) / sys.tps(k);
        f.segment<2>(L.phis + 2 * k) = dphis;

        const Eigen::Vector2d itil = current_reference(d, sys.Ts(k), dphis, phis);
        const Eigen::Vector2d err = (itil - il) / sys.tc(k);
        f.segment<2>(L.gam + 2 * k) = err + dd * J * gam;
        const Eigen::Vector2d vl = sys.Tc(k) * err + gam;
        f.segment<2>(L.il + 2 * k) = sys.kl(k) * (vl - vo) + dd * J * il;
        f.segment<2>(L.vo + 2 * k) = sys.ko(k) * (il - iok - sys.tpp(k) * J * vo);
    }

    // load-bus voltages v_L = -[R_L] (B_L xi)
    Vec vload = Vec::Zero(2 * nl);
    for (int e = 0; e < sys.m(); ++e) {
        const Line &ln = sys.model.lines[e];
        const Eigen::Vector2d xe = x.segment<2>(L.xi + 2 * e);
        if (ln.from >= 1 && ln.from <= nl)
            vload.segment<2>(2 * (ln.from - 1)) -= xe;
        if (ln.to >= 1 && ln.to <= nl)
            vload.segment<2>(2 * (ln.to - 1)) += xe;
    }
    for (int k = 0; k < nl; ++k)
        vload.segment<2>(2 * k) *= sys.RL_hat(k);
    auto bus_v = [&](int b) -> Eigen::Vector2d {
        if (b == 0)
            return sys.vg_hat;
        if (b <= nl)
            return vload.segment<2>(2 * (b - 1));
        return x.segment<2>(L.vo + 2 * (b - 1 - nl));
    };
    for (int e = 0; e < sys.m(); ++e) {
        const Line &ln = sys.model.lines[e];
        const Eigen::Vector2d xe = x.segment<2>(L.xi + 2 * e);
        const Block2 z = sys.red.Zh.block<2, 2>(2 * e, 2 * e);
        f.segment<2>(L.xi + 2 * e) = sys.red.line_rate(e) * (bus_v(ln.from) - bus_v(ln.to) - z * xe);
    }
    return f;
}

std::vector<std::string> state_names(const DynamicsSystem &sys)
{
    const int n = sys.n();
    std::vector<std::string> s(sys.dim());
    const Layout &L = sys.lay;
    for (int k = 0; k < n; ++k) {
        const std::string p = "inv" + std::to_string(k) + ".";
        s[L.vpll + k] = p + "v_pll";
        s[L.phipll + k] = p + "phi_pll";
        s[L.delta + k] = p + "delta";
        s[L.savg + 2 * k] = p + "s_avg_p";
        s[L.savg + 2 * k + 1] = p + "s_avg_q";
        s[L.phis + 2 * k] = p + "phi_s_1";
        s[L.phis + 2 * k + 1] = p + "phi_s_2";
        s[L.gam + 2 * k] = p + "gamma_D";
        s[L.gam + 2 * k + 1] = p + "gamma_Q";
        s[L.il + 2 * k] = p + "i_l_D";
        s[L.il + 2 * k + 1] = p + "i_l_Q";
        s[L.vo + 2 * k] = p + "v_o_D";
        s[L.vo + 2 * k + 1] = p + "v_o_Q";
    }
    for (int e = 0; e < sys.m(); ++e) {
        s[L.xi + 2 * e] = "line" + std::to_string(e) + ".xi_D";
        s[L.xi + 2 * e + 1] = "line" + std::to_string(e) + ".xi_Q";
    }
    return s;
}

Trajectory simulate(const DynamicsSystem &sys, const Vec &x0, double t_end, int n_samples,
                    const IntegratorOptions &opt)
{
    if (x0.size() != sys.dim())
        throw std::invalid_argument("simulate: state dimension mismatch");
    if (n_samples < 2)
        n_samples = 2;
    std::vector<double> ts(n_samples);
    for (int i = 0; i < n_samples; ++i)
        ts[i] = t_end * i / (n_samples - 1);
    return integrate_stiff([&sys](const Vec &x) { return rhs(sys, x); }, x0, 0.0, t_end, ts, opt);
}

void write_trajectory_csv(std::ostream &os, const DynamicsSystem &sys, const Trajectory &tr)
{
    os << "t";
    for (const auto &nm : state_names(sys))
        os << ',' << nm;
    os << '\n';
    os.precision(17);
    for (size_t i = 0; i < tr.t.size(); ++i) {
        os << tr.t[i];
        for (Eigen::Index j = 0; j < tr.x[i].size(); ++j)
            os << ',' << tr.x[i](j);
        os << '\n';
    }
}

Vec reduced_order_rhs(const ReducedOrderData &d, const Vec &eta)
{
    const Eigen::Index n2 = d.v_ref.size();
    if (eta.size() != n2)
        throw std::invalid_argument("reduced_order_rhs: dimension mismatch");
    Eigen::PartialPivLU<Mat> lu(d.Yh_Cred);
    if (!(lu.rcond() > 1e-14))
        throw NumericalError("reduced_order_rhs: Y_Cred singular");
    const Vec u = lu.solve(eta);
    const Vec v = u + d.v_ref;
    const Vec i = d.Yh_red * u + d.i_ref;
    const Vec s = instantaneous_power(v, i);
    Vec out(n2);
    for (Eigen::Index k = 0; k < n2 / 2; ++k)
        out.segment<2>(2 * k) =
            rot(-d.delta_ref(k)) * Hmat() * (d.s_ref.segment<2>(2 * k) - s.segment<2>(2 * k)) / d.tau_p_s(k);
    return out;
}

} // namespace gfi
