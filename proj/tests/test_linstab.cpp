#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "common.hpp"
#include "json.hpp"

using namespace gfi;
using namespace testutil;

namespace {

const double Vg = 120.0 * std::sqrt(2.0), W = 120.0 * M_PI, S = 1000.0;

Mat random_metzler(int n)
{
    Mat N = rand_mat(n, n, 0, 1);
    for (int i = 0; i < n; ++i)
        N(i, i) = -uni(0.2, 1.5) * N.row(i).sum();
    if (irand(0, 4) == 0)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j && irand(0, 2) == 0)
                    N(i, j) = 0;
    return N;
}

struct ResistiveCase {
    NetworkModel model;
    ReducedNetwork red;
    ResistiveReduction rr;
    PowerFlowSolution sol;
    Vec tps;
};

ResistiveCase resistive(int n, int l, double frac)
{
    ResistiveCase c;
    c.model = random_network(n, l, false);
    const auto adm = assemble_admittance(c.model);
    c.red = kron_reduce(adm, c.model, Vec::Zero(n));
    c.rr = purely_resistive_reduction(adm, c.model);
    // purely active injections
    BlockVector s = BlockVector::Zero(2 * n);
    for (int k = 0; k < n; ++k)
        s(2 * k) = uni(0.1, 1.0);
    s *= 0.375 * frac / existence_margin({&c.red, s});
    c.sol = solve_fixed_point({&c.red, s});
    c.tps = rand_vec(n, 5, 30);
    return c;
}

} // namespace

TEST_CASE("finite differences recover a linear system")
{
    for (int t = 0; t < 20; ++t) {
        const int n = irand(2, 40);
        const Mat A = rand_mat(n, n, -100, 100);
        const Vec x = rand_vec(n, -10, 10);
        const auto lin = jacobian([&](const Vec &y) { return Vec(A * y); }, x);
        CHECK(max_abs(lin.J - A) <= 1e-7 * max_abs(A));
        CHECK(max_abs(fd_jacobian_serial([&](const Vec &y) { return Vec(A * y); }, x) - lin.J) < 1e-12 * max_abs(A));
    }
}

TEST_CASE("spectral abscissa and verdicts")
{
    Mat A(2, 2);
    A << -1, 5, 0, -2;
    CHECK(spectral_abscissa(A) == doctest::Approx(-1));
    const auto lin = analyze(A);
    CHECK(lin.dominant.real() == doctest::Approx(-1));
    CHECK(verdict_from_abscissa(-1e-3) == Verdict::Stable);
    CHECK(verdict_from_abscissa(1e-3) == Verdict::Unstable);
    CHECK(verdict_from_abscissa(1e-10) == Verdict::Uncertified);
    CHECK(verdict_from_abscissa(-1e-10) == Verdict::Uncertified);
    for (auto m : {Method::FullEig, Method::MMatrix, Method::NMetzlerLP, Method::StaticOnly})
        CHECK(parse_method(to_string(m)) == m);
    CHECK_THROWS(parse_method("lyapunov"));
}

TEST_CASE("full-order linearization is stable for a small radial feeder")
{
    RadialFamilySpec spec;
    const auto sys = make_radial_system(spec, 5);
    const auto sol = solve_fixed_point({&sys.red, sys.s_ref});
    const auto eq = build_equilibrium(sys, sol);
    const auto lin = jacobian(sys, eq.state);
    CHECK(lin.spectral_abscissa < 0);
    CHECK(jacobian(sys, eq.state, 0.5).spectral_abscissa == doctest::Approx(lin.spectral_abscissa).epsilon(1e-6));
}

TEST_CASE("M for a single inverter")
{
    // no load, lossless: v = (0,1), i = 0
    NetworkModel m;
    m.n_inverters = 1;
    m.lines = {{0, 1, 0.0, 1e-4}};
    const auto red = kron_reduce(assemble_admittance(m), m, Vec::Zero(1));
    const auto sol = solve_fixed_point({&red, BlockVector::Zero(2)});
    const double tp = 17.0;
    const Mat M = build_M(sol, red, delta_ref_of(sol.v_hat), Vec::Constant(1, tp));
    CHECK(M.determinant() * tp * tp == doctest::Approx(1.0));
    CHECK(M.trace() * tp == doctest::Approx(-2.0));
    CHECK(spectral_abscissa(M) < 0);

    // closed forms with C_f -> 0 at random operating points
    for (int t = 0; t < 100; ++t) {
        NetworkModel g;
        g.n_inverters = 1;
        g.lines = {{0, 1, uni(0.01, 0.5), uni(1e-5, 1e-3)}};
        const auto r = kron_reduce(assemble_admittance(g), g, Vec::Zero(1));
        BlockVector s = rand_vec(2);
        s *= 0.375 * uni(0.05, 0.95) / existence_margin({&r, s});
        const auto so = solve_fixed_point({&r, s});
        const double tps = uni(1, 30);
        const Vec d = delta_ref_of(so.v_hat);
        const Mat Mm = build_M(so, r, d, Vec::Constant(1, tps));
        const double vQ = so.v_hat(1), voq = (rot(d(0)) * blk(so.v_hat, 0))(1);
        CHECK(Mm.determinant() * tps * tps == doctest::Approx(2 * vQ - 1).epsilon(1e-9));
        CHECK(Mm.trace() * tps == doctest::Approx(-2 * voq).epsilon(1e-9));
    }
}

TEST_CASE("M-matrix test on the radial family")
{
    RadialFamilySpec spec;
    for (auto [n, stable] : {std::pair{20, true}, {21, false}}) {
        const auto sys = make_radial_system(spec, n);
        const auto sol = solve_fixed_point({&sys.red, sys.s_ref});
        const Mat M = build_M(sol, sys.red, delta_ref_of(sol.v_hat), sys.tps);
        CHECK((spectral_abscissa(M) < 0) == stable);
    }
}

TEST_CASE("N matrix")
{
    // zero injection: diagonal and negative
    {
        auto c = resistive(4, 1, 0.5);
        PowerFlowSolution z = solve_fixed_point({&c.red, BlockVector::Zero(8)});
        const Mat N = build_N(c.rr, z, c.tps);
        CHECK(max_abs(N - Mat(N.diagonal().asDiagonal())) < 1e-15);
        CHECK(N.diagonal().maxCoeff() < 0);
        CHECK(metzler_hurwitz_lp(N));
    }
    // single resistive inverter: scalar form
    {
        NetworkModel m;
        m.n_inverters = 1;
        m.lines = {{0, 1, 0.3, 0.0}};
        const auto adm = assemble_admittance(m);
        const auto red = kron_reduce(adm, m, Vec::Zero(1));
        const auto rr = purely_resistive_reduction(adm, m);
        const double Rh = 0.3 * S / (Vg * Vg);
        for (double p : {0.5, 5.0, -5.0}) {
            const auto sol = solve_fixed_point({&red, Eigen::Vector2d(p, 0)});
            const Mat N = build_N(rr, sol, Vec::Constant(1, 10.0));
            CHECK(N(0, 0) == doctest::Approx((-sol.v_hat(1) + sol.i_hat(1) * Rh) / 10.0).epsilon(1e-12));
            const Mat M = build_M(sol, red, delta_ref_of(sol.v_hat), Vec::Constant(1, 10.0));
            CHECK((N(0, 0) < 0) == (spectral_abscissa(M) < 0));
        }
    }
    // random resistive feeders: Metzler, and N Hurwitz iff M Hurwitz
    int agree = 0, total = 0;
    for (int t = 0; t < 60; ++t) {
        auto c = resistive(irand(2, 8), irand(0, 2), uni(0.05, 1.0));
        const Mat N = build_N(c.rr, c.sol, c.tps);
        CHECK(is_metzler(N));
        const Mat M = build_M(c.sol, c.red, delta_ref_of(c.sol.v_hat), c.tps);
        ++total;
        agree += (spectral_abscissa(N) < 0) == (spectral_abscissa(M) < 0);
        CHECK(metzler_hurwitz_lp(N) == (spectral_abscissa(N) < 0));
    }
    CHECK(agree == total);
    // inductive networks rejected
    RadialFamilySpec spec;
    const auto sys = make_radial_system(spec, 3);
    const auto sol = solve_fixed_point({&sys.red, sys.s_ref});
    CHECK_THROWS(certify(sys, sol, Method::NMetzlerLP));
}

TEST_CASE("Metzler LP")
{
    CHECK(metzler_hurwitz_lp(-Mat::Identity(3, 3)));
    Mat N(2, 2);
    N << -1, 2, 0, -1;
    CHECK(metzler_hurwitz_lp(N));
    N << 1, 0, 0, -1;
    CHECK_FALSE(metzler_hurwitz_lp(N));
    N << -1, -2, 0, -1;
    CHECK_THROWS(metzler_hurwitz_lp(N));
    CHECK_FALSE(metzler_hurwitz_lp(Mat::Zero(2, 2)));
    int agree = 0;
    for (int t = 0; t < 1000; ++t) {
        const Mat M = random_metzler(irand(1, 30));
        agree += metzler_hurwitz_lp(M) == (spectral_abscissa(M) < 0);
    }
    CHECK(agree == 1000);
}

TEST_CASE("certificates")
{
    RadialFamilySpec spec;
    spec.p_hat = 1.2;
    {
        const auto sys = make_radial_system(spec, 20);
        const auto sol = solve_fixed_point({&sys.red, sys.s_ref});
        const auto c = certify(sys, sol, Method::MMatrix);
        CHECK(c.verdict == Verdict::Stable);
        CHECK(c.pll_condition);
        CHECK(c.caveat == "sufficient-condition, valid for eps <= eps* (eps* not computed)");
        CHECK(c.existence_margin == doctest::Approx(sol.margin));
        const auto j = nlohmann::json::parse(certificate_json(c));
        CHECK(j["verdict"] == "stable");
        CHECK(j["method"] == "m-matrix");
        CHECK(j["assumptions"]["pll_T_gt_tau"] == true);
    }
    {
        const auto sys = make_radial_system(spec, 23);
        const auto sol = solve_fixed_point({&sys.red, sys.s_ref});
        CHECK(certify(sys, sol, Method::FullEig).verdict == Verdict::Unstable);
    }
    {
        auto c = make_radial(spec, 5);
        for (auto &p : c.inv)
            p.tc.T_PLL = p.tc.tau_PLL;
        const auto sys = make_system(c.model, c.inv, c.s_ref);
        const auto sol = solve_fixed_point({&sys.red, sys.s_ref});
        const auto cert = certify(sys, sol, Method::MMatrix);
        CHECK_FALSE(cert.pll_condition);
        CHECK(cert.verdict == Verdict::Uncertified);
    }
}

TEST_CASE("tensor eigenvalue identity")
{
    const Mat A = rand_mat(3, 3), C = rand_mat(2, 2);
    auto r = tensor_eigs_oracle(A, Mat::Zero(3, 3), C);
    CHECK(r.equal);
    r = tensor_eigs_oracle(Mat::Zero(3, 3), A, Mat::Identity(2, 2));
    CHECK(r.equal);
    for (int t = 0; t < 200; ++t) {
        const int n = irand(1, 5), m = irand(1, 4);
        CHECK(tensor_eigs_oracle(rand_mat(n, n), rand_mat(n, n), rand_mat(m, m)).equal);
    }
    CHECK_THROWS(tensor_eigs_oracle(rand_mat(2, 2), rand_mat(3, 3), rand_mat(2, 2)));
}

TEST_CASE("structured Hurwitz lemma")
{
    {
        const Vec one = Vec::Ones(3);
        CHECK(lemma3_oracle(one, one, one, one, 0.5 * one, one, Mat::Identity(3, 3), Mat::Zero(3, 3),
                            -Mat::Identity(3, 3)));
    }
    for (int t = 0; t < 500; ++t) {
        const int n = irand(1, 6), m = irand(n, 6);
        const Vec G = rand_vec(n, 0.1, 5);
        const Vec Sg = G.cwiseProduct(rand_vec(n, 0.01, 0.99));
        Mat K = rand_mat(m, n);
        while (Eigen::FullPivLU<Mat>(K).rank() < n)
            K = rand_mat(m, n);
        const Mat Pr = rand_mat(n, n);
        const Mat Zr = rand_mat(m, m);
        const Mat Z = -(Zr * Zr.transpose() + 0.1 * Mat::Identity(m, m)) + (Zr - Zr.transpose());
        CHECK(lemma3_oracle(G, rand_vec(n, 0.1, 5), rand_vec(n, 0.1, 5), rand_vec(n, 0.1, 5), Sg,
                            rand_vec(m, 0.1, 5), K, Pr - Pr.transpose(), Z));
    }
    // premise checks
    const Vec one = Vec::Ones(2);
    const Mat I = Mat::Identity(2, 2);
    CHECK_THROWS_WITH(lemma3_oracle(one, one, one, one, one, one, I, Mat::Zero(2, 2), -I),
                      doctest::Contains("Gamma > Sigma"));
    CHECK_THROWS_WITH(lemma3_oracle(one, one, one, one, 0.5 * one, one, Mat::Zero(2, 2), Mat::Zero(2, 2), -I),
                      doctest::Contains("Ker"));
    CHECK_THROWS_WITH(lemma3_oracle(one, one, one, one, 0.5 * one, one, I, I, -I), doctest::Contains("skew"));
    CHECK_THROWS_WITH(lemma3_oracle(one, one, one, one, 0.5 * one, one, I, Mat::Zero(2, 2), I),
                      doctest::Contains("negative definite"));

    // at Gamma = Sigma the first matrix sits on the Hurwitz boundary, beyond it it is unstable
    const Vec g = Vec::Constant(1, 2.0), u = Vec::Constant(1, 1.5), x = Vec::Constant(1, 0.7);
    const Mat K1 = Mat::Identity(1, 1), Z1 = -Mat::Identity(1, 1), P1 = Mat::Zero(1, 1);
    const auto edge = lemma3_matrices(g, g, x, u, g, g, K1, P1, Z1);
    CHECK(std::abs(spectral_abscissa(edge.A)) < 1e-8);
    const auto over = lemma3_matrices(g, g, x, u, Vec(1.2 * g), g, K1, P1, Z1);
    CHECK(spectral_abscissa(over.A) > 0);
}
