#include "gfi/linstab.hpp"

#include "json.hpp"

#include <lapacke.h>

#include <chrono>
#include <cmath>
#include <vector>

namespace gfi {

// dgeev balances first; the stiff Jacobians span ~10 decades and Eigen's solver does not.
CVec eigenvalues(const Mat &A)
{
    const lapack_int n = static_cast<lapack_int>(A.rows());
    if (n == 0)
        return CVec();
    Mat work = A;
    std::vector<double> wr(n), wi(n);
    const lapack_int info = LAPACKE_dgeev(LAPACK_COL_MAJOR, 'N', 'N', n, work.data(), n, wr.data(), wi.data(),
                                          nullptr, 1, nullptr, 1);
    if (info != 0)
        throw NumericalError("eigensolver did not converge");
    CVec ev(n);
    for (lapack_int i = 0; i < n; ++i)
        ev(i) = {wr[i], wi[i]};
    return ev;
}

double spectral_abscissa(const Mat &A) { return eigenvalues(A).real().maxCoeff(); }

Linearization analyze(const Mat &J)
{
    Linearization lin;
    lin.J = J;
    lin.eigenvalues = eigenvalues(J);
    Eigen::Index at;
    lin.spectral_abscissa = lin.eigenvalues.real().maxCoeff(&at);
    lin.dominant = lin.eigenvalues(at);
    return lin;
}

Linearization jacobian(const VecField &f, const Vec &x, double step_scale)
{
    return analyze(fd_jacobian(f, x, step_scale));
}

Linearization jacobian(const DynamicsSystem &sys, const Vec &x, double step_scale)
{
    return jacobian([&sys](const Vec &y) { return rhs(sys, y); }, x, step_scale);
}

BlockMatrix build_M(const PowerFlowSolution &sol, const ReducedNetwork &red, const Vec &delta_ref,
                    const Vec &tau_p_s)
{
    const int n = red.n;
    Eigen::PartialPivLU<Mat> lu(red.Yh_Cred);
    if (!(lu.rcond() > 1e-14))
        throw NumericalError("build_M: Y_Cred singular");
    BlockMatrix RH = BlockMatrix::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k)
        RH.block<2, 2>(2 * k, 2 * k) = rot(-delta_ref(k)) * Hmat() / tau_p_s(k);
    return -(dmat(sol.v_hat) * red.Yh_red + dpmat(sol.i_hat)) * lu.solve(RH);
}

ReducedOrderData reduced_order_data(const PowerFlowSolution &sol, const ReducedNetwork &red,
                                    const Vec &delta_ref, const Vec &tau_p_s, const BlockVector &s_ref)
{
    return {red.Yh_red, red.Yh_Cred, sol.v_hat, sol.i_hat, s_ref, delta_ref, tau_p_s};
}

Mat build_N(const ResistiveReduction &rr, const PowerFlowSolution &sol, const Vec &tau_p_s)
{
    const Eigen::Index n = rr.L_red_hat.rows();
    Vec vq(n), iq(n);
    const Vec d = delta_ref_of(sol.v_hat);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (std::abs(sol.v_hat(2 * k)) > 1e-9 || std::abs(sol.i_hat(2 * k)) > 1e-9)
            throw std::invalid_argument("build_N: injections must be purely active on a resistive network");
        const Block2 R = rot(d(k));
        vq(k) = (R * blk(sol.v_hat, k))(1);
        iq(k) = (R * blk(sol.i_hat, k))(1);
    }
    const Vec tinv = tau_p_s.cwiseInverse();
    const Mat Linv = rr.L_red_hat.partialPivLu().inverse();
    Mat N = -Mat(vq.cwiseProduct(tinv).asDiagonal()) + iq.asDiagonal() * Linv * tinv.asDiagonal();
    if (!is_metzler(N, 1e-12 * std::max(1.0, N.cwiseAbs().maxCoeff())))
        throw NumericalError("build_N: result is not Metzler");
    return N;
}

bool is_metzler(const Mat &N, double tol)
{
    for (Eigen::Index i = 0; i < N.rows(); ++i)
        for (Eigen::Index j = 0; j < N.cols(); ++j)
            if (i != j && N(i, j) < -tol)
                return false;
    return true;
}

namespace {

// Phase-one simplex on  -N xi - s + a = 1,  xi, s, a >= 0,  min sum(a).
// Bland's rule. Returns the optimal phase-one objective.
double phase_one(const Mat &N)
{
    const int n = int(N.rows());
    const int nv = 3 * n; // xi, s, a
    Mat T = Mat::Zero(n + 1, nv + 1);
    T.block(0, 0, n, n) = -N;
    T.block(0, n, n, n) = -Mat::Identity(n, n);
    T.block(0, 2 * n, n, n) = Mat::Identity(n, n);
    T.col(nv).head(n).setOnes();
    std::vector<int> basis(n);
    for (int i = 0; i < n; ++i)
        basis[i] = 2 * n + i;
    // reduced costs of min sum(a): c_j - c_B B^-1 A_j
    for (int j = 0; j <= nv; ++j)
        T(n, j) = (j >= 2 * n && j < nv) ? 0.0 : -T.col(j).head(n).sum();
    const double eps = 1e-12;
    for (int iter = 0; iter < 50 * nv; ++iter) {
        int enter = -1;
        for (int j = 0; j < nv; ++j)
            if (T(n, j) < -eps) {
                enter = j;
                break;
            }
        if (enter < 0)
            break;
        int leave = -1;
        double best = INFINITY;
        for (int i = 0; i < n; ++i)
            if (T(i, enter) > eps) {
                const double r = T(i, nv) / T(i, enter);
                if (r < best - 1e-15 || (std::abs(r - best) <= 1e-15 && leave >= 0 && basis[i] < basis[leave])) {
                    best = r;
                    leave = i;
                }
            }
        if (leave < 0)
            break; // unbounded direction cannot occur in phase one
        T.row(leave) /= T(leave, enter);
        for (int i = 0; i <= n; ++i)
            if (i != leave && T(i, enter) != 0.0)
                T.row(i) -= T(i, enter) * T.row(leave);
        basis[leave] = enter;
    }
    return -T(n, nv);
}

} // namespace

bool metzler_hurwitz_lp(const Mat &N)
{
    if (N.rows() != N.cols() || N.rows() == 0)
        throw std::invalid_argument("metzler_hurwitz_lp: square nonempty matrix required");
    const double scale = N.cwiseAbs().maxCoeff();
    if (!is_metzler(N, 1e-12 * std::max(1.0, scale)))
        throw std::invalid_argument("metzler_hurwitz_lp: matrix is not Metzler");
    if (scale == 0.0)
        return false;
    // N xi <= -1 with xi >= 0 forces xi > 0 for Metzler N; the cone is scale free.
    return phase_one(N / scale) <= 1e-9;
}

std::string to_string(Method m)
{
    switch (m) {
    case Method::FullEig: return "full-eig";
    case Method::MMatrix: return "m-matrix";
    case Method::NMetzlerLP: return "n-metzler-lp";
    case Method::StaticOnly: return "static-only";
    }
    return "?";
}

std::string to_string(Verdict v)
{
    switch (v) {
    case Verdict::Stable: return "stable";
    case Verdict::Unstable: return "unstable";
    case Verdict::Uncertified: return "uncertified";
    }
    return "?";
}

Method parse_method(const std::string &s)
{
    if (s == "full-eig") return Method::FullEig;
    if (s == "m-matrix") return Method::MMatrix;
    if (s == "n-metzler-lp") return Method::NMetzlerLP;
    if (s == "static" || s == "static-only") return Method::StaticOnly;
    throw std::invalid_argument("unknown method '" + s + "'");
}

Verdict verdict_from_abscissa(double a)
{
    if (a < -1e-9) return Verdict::Stable;
    if (a > 1e-9) return Verdict::Unstable;
    return Verdict::Uncertified;
}

StabilityCertificate certify(const DynamicsSystem &sys, const PowerFlowSolution &sol, Method method)
{
    StabilityCertificate c;
    c.kind = method;
    std::vector<TimeConstants> tcs;
    for (const auto &p : sys.inv)
        tcs.push_back(p.tc);
    for (bool ok : check_pll_condition(tcs))
        c.pll_condition = c.pll_condition && ok;
    c.eps = epsilon(tcs, line_time_constants(sys.model));
    c.existence_margin = sol.margin;

    const auto t0 = std::chrono::steady_clock::now();
    const Vec d = delta_ref_of(sol.v_hat);
    switch (method) {
    case Method::FullEig: {
        const Equilibrium eq = build_equilibrium(sys, sol);
        c.margin = jacobian(sys, eq.state).spectral_abscissa;
        c.verdict = verdict_from_abscissa(c.margin);
        break;
    }
    case Method::MMatrix: {
        c.margin = spectral_abscissa(build_M(sol, sys.red, d, sys.tps));
        c.verdict = verdict_from_abscissa(c.margin);
        c.caveat = "sufficient-condition, valid for eps <= eps* (eps* not computed)";
        break;
    }
    case Method::NMetzlerLP: {
        const ResistiveReduction rr = purely_resistive_reduction(sys.adm, sys.model);
        const Mat N = build_N(rr, sol, sys.tps);
        const bool ok = metzler_hurwitz_lp(N);
        c.margin = ok ? -1.0 : 1.0;
        c.verdict = ok ? Verdict::Stable : Verdict::Unstable;
        c.caveat = "sufficient-condition, valid for eps <= eps* (eps* not computed)";
        break;
    }
    case Method::StaticOnly: {
        c.margin = sol.margin - 0.375;
        c.verdict = sol.certified ? Verdict::Stable : Verdict::Uncertified;
        c.caveat = "existence of a power-flow solution only; says nothing about dynamic stability";
        break;
    }
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (method != Method::FullEig && method != Method::StaticOnly && !c.pll_condition)
        c.verdict = Verdict::Uncertified;
    return c;
}

std::string certificate_json(const StabilityCertificate &c)
{
    nlohmann::json j;
    j["method"] = to_string(c.kind);
    j["verdict"] = to_string(c.verdict);
    j["margin"] = c.margin;
    j["assumptions"] = {{"pll_T_gt_tau", c.pll_condition},
                        {"eps_I", c.eps.eps_I},
                        {"eps_E", c.eps.eps_E},
                        {"eps", c.eps.eps},
                        {"existence_margin", c.existence_margin},
                        {"existence_holds", c.existence_margin <= 0.375}};
    if (!c.caveat.empty())
        j["caveat"] = c.caveat;
    j["seconds"] = c.seconds;
    return j.dump(2);
}

namespace {

double match_multisets(const CVec &a, const CVec &b)
{
    if (a.size() != b.size())
        return INFINITY;
    std::vector<char> used(b.size(), 0);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        double best = INFINITY;
        Eigen::Index at = -1;
        for (Eigen::Index j = 0; j < b.size(); ++j)
            if (!used[j] && std::abs(a(i) - b(j)) < best) {
                best = std::abs(a(i) - b(j));
                at = j;
            }
        used[at] = 1;
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace

TensorEigsResult tensor_eigs_oracle(const Mat &A, const Mat &B, const Mat &C, double tol)
{
    if (A.rows() != A.cols() || B.rows() != B.cols() || A.rows() != B.rows() || C.rows() != C.cols())
        throw std::invalid_argument("tensor_eigs_oracle: size mismatch");
    const Eigen::Index n = A.rows(), m = C.rows();
    Mat K = Mat::Zero(n * m, n * m);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            K.block(i * m, j * m, m, m) = A(i, j) * Mat::Identity(m, m) + B(i, j) * C;
    TensorEigsResult r;
    r.direct = eigenvalues(K);
    const CVec eta = eigenvalues(C);
    r.via_blocks.resize(n * m);
    for (Eigen::Index k = 0; k < m; ++k) {
        Eigen::ComplexEigenSolver<Eigen::MatrixXcd> ces(A.cast<std::complex<double>>() + eta(k) * B.cast<std::complex<double>>(), false);
        if (ces.info() != Eigen::Success)
            throw NumericalError("tensor_eigs_oracle: eigensolver failed");
        r.via_blocks.segment(k * n, n) = ces.eigenvalues();
    }
    const double scale = std::max(1.0, K.cwiseAbs().maxCoeff());
    r.mismatch = match_multisets(r.direct, r.via_blocks);
    r.equal = r.mismatch <= tol * scale;
    return r;
}

Lemma3Matrices lemma3_matrices(const Vec &G, const Vec &Pi, const Vec &Xi, const Vec &U, const Vec &S,
                               const Vec &Th, const Mat &K, const Mat &P, const Mat &Z)
{
    const Eigen::Index n = G.size(), m = Th.size();
    Lemma3Matrices r;
    r.A = Mat::Zero(3 * n, 3 * n);
    r.A.block(0, 0, n, n) = -Mat(G.asDiagonal());
    r.A.block(0, 2 * n, n, n) = U.asDiagonal();
    r.A.block(n, 0, n, n) = -Mat(S.asDiagonal());
    r.A.block(2 * n, 0, n, n) = -Mat(Xi.asDiagonal());
    r.A.block(2 * n, n, n, n) = Xi.asDiagonal();

    r.B = Mat::Zero(3 * n + m, 3 * n + m);
    r.B.block(0, n, n, n) = -Mat(G.asDiagonal());
    r.B.block(n, 0, n, n) = Xi.asDiagonal();
    r.B.block(n, n, n, n) = -Mat(U.asDiagonal());
    r.B.block(n, 2 * n, n, n) = -Mat(Xi.asDiagonal());
    r.B.block(2 * n, n, n, n) = Pi.asDiagonal();
    r.B.block(2 * n, 2 * n, n, n) = Pi.asDiagonal() * P;
    r.B.block(2 * n, 3 * n, n, m) = -(Pi.asDiagonal() * K.transpose());
    r.B.block(3 * n, 2 * n, m, n) = Th.asDiagonal() * K;
    r.B.block(3 * n, 3 * n, m, m) = Th.asDiagonal() * Z;
    return r;
}

bool lemma3_oracle(const Vec &G, const Vec &Pi, const Vec &Xi, const Vec &U, const Vec &S, const Vec &Th,
                   const Mat &K, const Mat &P, const Mat &Z)
{
    const Eigen::Index n = G.size(), m = Th.size();
    if (Pi.size() != n || Xi.size() != n || U.size() != n || S.size() != n)
        throw std::invalid_argument("lemma3: diagonal sizes differ");
    if (K.rows() != m || K.cols() != n || P.rows() != n || P.cols() != n || Z.rows() != m || Z.cols() != m)
        throw std::invalid_argument("lemma3: matrix sizes differ");
    for (const Vec *v : {&G, &Pi, &Xi, &U, &S, &Th})
        if ((v->array() <= 0).any())
            throw std::invalid_argument("lemma3: diagonal matrices must be positive");
    if ((G.array() <= S.array()).any())
        throw std::invalid_argument("lemma3: Gamma > Sigma violated");
    if (Eigen::FullPivLU<Mat>(K).rank() < n)
        throw std::invalid_argument("lemma3: Ker(K) is nontrivial");
    if ((P + P.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, P.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("lemma3: P is not skew-symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> se(Z + Z.transpose());
    if (se.eigenvalues().maxCoeff() >= 0)
        throw std::invalid_argument("lemma3: Z + Z^T is not negative definite");
    const Lemma3Matrices mm = lemma3_matrices(G, Pi, Xi, U, S, Th, K, P, Z);
    return spectral_abscissa(mm.A) < 0 && spectral_abscissa(mm.B) < 0;
}

} // namespace gfi
