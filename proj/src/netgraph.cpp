#include "gfi/netgraph.hpp"

#include <cmath>
#include <queue>
#include <sstream>

namespace gfi {

void NetworkModel::validate() const
{
    if (n_inverters < 1)
        throw std::invalid_argument("network needs at least one inverter");
    if (n_loads < 0 || int(load_resistances.size()) != n_loads)
        throw std::invalid_argument("one load resistance per load bus required");
    if (!(V_g > 0) || !(s_nom > 0) || !(omega_nom > 0))
        throw std::invalid_argument("V_g, s_nom and omega_nom must be positive");
    for (double r : load_resistances)
        if (!(r > 0))
            throw std::invalid_argument("load resistances must be positive");
    const int N = n_buses();
    std::vector<std::vector<int>> adj(N);
    for (const auto &ln : lines) {
        if (ln.from < 0 || ln.to < 0 || ln.from >= N || ln.to >= N || ln.from == ln.to)
            throw std::invalid_argument("line references an invalid bus pair");
        if (ln.R < 0 || ln.L < 0)
            throw std::invalid_argument("line R and L must be nonnegative");
        if (ln.R == 0 && ln.L == 0)
            throw std::invalid_argument("line with zero impedance");
        adj[ln.from].push_back(ln.to);
        adj[ln.to].push_back(ln.from);
    }
    std::vector<char> seen(N, 0);
    std::queue<int> q;
    q.push(0);
    seen[0] = 1;
    while (!q.empty()) {
        int b = q.front();
        q.pop();
        for (int c : adj[b])
            if (!seen[c]) {
                seen[c] = 1;
                q.push(c);
            }
    }
    for (int b = 0; b < N; ++b)
        if (!seen[b])
            throw std::invalid_argument("network graph is disconnected (bus " + std::to_string(b) + ")");
}

AdmittanceDecomposition assemble_admittance(const NetworkModel &model)
{
    model.validate();
    const int N = model.n_buses(), m = model.n_lines();
    const int l = model.n_loads, n = model.n_inverters;
    AdmittanceDecomposition a;
    a.B = Mat::Zero(N, m);
    a.A = BlockMatrix::Zero(2 * m, 2 * m);
    for (int e = 0; e < m; ++e) {
        const Line &ln = model.lines[e];
        a.B(ln.from, e) = 1.0;
        a.B(ln.to, e) = -1.0;
        const double x = model.omega_nom * ln.L;
        const double d = ln.R * ln.R + x * x;
        // (R I + x J)^-1 = (R I - x J)/(R^2 + x^2)
        a.A.block<2, 2>(2 * e, 2 * e) = (ln.R * Block2::Identity() - x * Jmat()) / d;
    }
    const BlockMatrix Bk = kron_i2(a.B);
    a.Y = Bk * a.A * Bk.transpose();
    a.B0 = a.B.topRows(1);
    a.BL = a.B.middleRows(1, l);
    a.BI = a.B.bottomRows(n);
    const int i0 = 0, iL = 2, iI = 2 + 2 * l;
    a.Y00 = a.Y.block(i0, i0, 2, 2);
    a.Y0L = a.Y.block(i0, iL, 2, 2 * l);
    a.Y0I = a.Y.block(i0, iI, 2, 2 * n);
    a.YL0 = a.Y.block(iL, i0, 2 * l, 2);
    a.YLL = a.Y.block(iL, iL, 2 * l, 2 * l);
    a.YLI = a.Y.block(iL, iI, 2 * l, 2 * n);
    a.YI0 = a.Y.block(iI, i0, 2 * n, 2);
    a.YIL = a.Y.block(iI, iL, 2 * n, 2 * l);
    a.YII = a.Y.block(iI, iI, 2 * n, 2 * n);
    return a;
}

ReducedNetwork kron_reduce(const AdmittanceDecomposition &adm, const NetworkModel &model,
                           const Vec &C_f)
{
    const int n = model.n_inverters, l = model.n_loads, m = model.n_lines();
    if (C_f.size() != n)
        throw std::invalid_argument("kron_reduce: one filter capacitance per inverter required");
    ReducedNetwork r;
    r.n = n;
    r.m = m;
    r.l = l;
    r.V_g = model.V_g;
    r.s_nom = model.s_nom;
    r.omega_nom = model.omega_nom;

    r.Y_red = adm.YII;
    r.Y_g = adm.YI0;
    if (l > 0) {
        BlockMatrix S = adm.YLL;
        for (int k = 0; k < l; ++k)
            S.block<2, 2>(2 * k, 2 * k) += Block2::Identity() / model.load_resistances[k];
        Eigen::FullPivLU<Mat> flu(S);
        if (!flu.isInvertible()) {
            Vec ker = flu.kernel().col(0);
            Eigen::Index at;
            ker.cwiseAbs().maxCoeff(&at);
            throw NumericalError("kron_reduce: singular Schur complement at load block " +
                                 std::to_string(at / 2) + " (bus " + std::to_string(1 + at / 2) + ")");
        }
        Eigen::PartialPivLU<Mat> lu(S);
        if (lu.rcond() < 1e-12)
            r.warnings.push_back("kron_reduce: load block ill-conditioned");
        r.Y_red -= adm.YIL * lu.solve(adm.YLI);
        r.Y_g -= adm.YIL * lu.solve(adm.YL0);
    }
    Eigen::PartialPivLU<Mat> lured(r.Y_red);
    if (lured.rcond() < 1e-12)
        r.warnings.push_back("kron_reduce: Y_red ill-conditioned");
    const Eigen::Vector2d vg(0.0, model.V_g);
    r.w = -lured.solve(r.Y_g * vg);

    r.Y_Cred = r.Y_red;
    for (int k = 0; k < n; ++k)
        r.Y_Cred.block<2, 2>(2 * k, 2 * k) += model.omega_nom * C_f(k) * Jmat();

    const double base = model.V_g * model.V_g / model.s_nom;
    r.Yh_red = base * r.Y_red;
    r.Yh_g = base * r.Y_g;
    r.w_hat = r.w / model.V_g;
    r.tau_pp_LC = C_f * model.omega_nom * base;
    r.Yh_Cred = r.Yh_red;
    for (int k = 0; k < n; ++k)
        r.Yh_Cred.block<2, 2>(2 * k, 2 * k) += r.tau_pp_LC(k) * Jmat();

    // line matrices
    Mat coupling = Mat::Zero(m, m);
    if (l > 0) {
        Vec rl = Eigen::Map<const Vec>(model.load_resistances.data(), l);
        coupling = adm.BL.transpose() * rl.asDiagonal() * adm.BL;
    }
    r.Zh = BlockMatrix::Zero(2 * m, 2 * m);
    r.line_rate = Vec::Zero(m);
    bool inductive = true;
    for (int e = 0; e < m; ++e) {
        const Line &ln = model.lines[e];
        r.Zh.block<2, 2>(2 * e, 2 * e) =
            (ln.R * Block2::Identity() + model.omega_nom * ln.L * Jmat()) / base;
        r.line_rate(e) = ln.L > 0 ? base / ln.L : 0.0;
        inductive = inductive && ln.L > 0;
    }
    r.Zh_L = r.Zh + kron_i2(coupling / base);
    if (inductive) {
        Vec wl(m);
        r.Z = BlockMatrix::Zero(2 * m, 2 * m);
        for (int e = 0; e < m; ++e) {
            const Line &ln = model.lines[e];
            wl(e) = model.omega_nom * ln.L;
            r.Z.block<2, 2>(2 * e, 2 * e) = (ln.R / wl(e)) * Block2::Identity() + Jmat();
        }
        r.Z_L = r.Z + kron_i2(wl.cwiseInverse().asDiagonal() * coupling);
    }
    return r;
}

ResistiveReduction purely_resistive_reduction(const AdmittanceDecomposition &adm,
                                              const NetworkModel &model)
{
    for (const auto &ln : model.lines)
        if (ln.L > 0)
            throw std::invalid_argument("network not purely resistive");
    const int n = model.n_inverters, l = model.n_loads;
    const double base = model.V_g * model.V_g / model.s_nom;
    Vec g(model.n_lines());
    for (int e = 0; e < model.n_lines(); ++e)
        g(e) = base / model.lines[e].R;
    const Mat Lap = adm.B * g.asDiagonal() * adm.B.transpose();
    Mat Lred = Lap.bottomRightCorner(n, n);
    Vec Lg = Lap.bottomLeftCorner(n, 1);
    if (l > 0) {
        Mat S = Lap.block(1, 1, l, l);
        for (int k = 0; k < l; ++k)
            S(k, k) += base / model.load_resistances[k];
        Eigen::PartialPivLU<Mat> lu(S);
        Lred -= Lap.block(1 + l, 1, n, l) * lu.solve(Lap.block(1, 1 + l, l, n));
        Lg -= Lap.block(1 + l, 1, n, l) * lu.solve(Lap.block(1, 0, l, 1));
    }
    ResistiveReduction rr;
    rr.L_red_hat = Lred;
    rr.u_hat = -Lred.partialPivLu().solve(Lg);
    return rr;
}

} // namespace gfi
