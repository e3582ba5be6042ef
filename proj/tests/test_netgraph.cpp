#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "common.hpp"

using namespace gfi;
using namespace testutil;

namespace {

NetworkModel single_line(double R, double L)
{
    NetworkModel m;
    m.n_inverters = 1;
    m.lines = {{0, 1, R, L}};
    return m;
}

NetworkModel chain(int n, double R, double L)
{
    NetworkModel m;
    m.n_inverters = n;
    for (int b = 0; b < n; ++b)
        m.lines.push_back({b, b + 1, R, L});
    return m;
}

} // namespace

TEST_CASE("unit resistive line")
{
    const auto adm = assemble_admittance(single_line(1.0, 0.0));
    CHECK(max_abs(adm.A - Mat::Identity(2, 2)) == 0.0);
    Mat Y(4, 4);
    Y << 1, 0, -1, 0, 0, 1, 0, -1, -1, 0, 1, 0, 0, -1, 0, 1;
    CHECK(max_abs(adm.Y - Y) == 0.0);
}

TEST_CASE("branch admittance matches complex reciprocal")
{
    for (int t = 0; t < 50; ++t) {
        const double R = uni(0.001, 1), L = uni(1e-6, 1e-3);
        const auto model = single_line(R, L);
        const auto adm = assemble_admittance(model);
        const std::complex<double> y = 1.0 / std::complex<double>(R, model.omega_nom * L);
        CHECK(max_abs(adm.A - gfi::encode(y.real(), y.imag())) < 1e-12 * std::abs(y));
    }
}

TEST_CASE("admittance matches stamping oracle")
{
    for (int t = 0; t < 20; ++t) {
        const auto model = random_network(irand(1, 6), irand(0, 3));
        const auto adm = assemble_admittance(model);
        const int N = model.n_buses();
        Eigen::MatrixXcd Yc = Eigen::MatrixXcd::Zero(N, N);
        for (const auto &ln : model.lines) {
            const std::complex<double> y = 1.0 / std::complex<double>(ln.R, model.omega_nom * ln.L);
            Yc(ln.from, ln.from) += y;
            Yc(ln.to, ln.to) += y;
            Yc(ln.from, ln.to) -= y;
            Yc(ln.to, ln.from) -= y;
        }
        const Mat ref = testutil::encode(Yc);
        CHECK(max_abs(adm.Y - ref) <= 1e-10 * max_abs(ref));
        CHECK(is_complex_form(adm.Y, 1e-12 * max_abs(ref)));
        // block symmetry
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                CHECK(max_abs(adm.Y.block<2, 2>(2 * i, 2 * j) - adm.Y.block<2, 2>(2 * j, 2 * i)) == 0.0);
    }
}

TEST_CASE("Laplacian row sums vanish")
{
    const auto adm = assemble_admittance(chain(3, 0.02, 2e-5));
    for (int i = 0; i < 4; ++i) {
        Block2 s = Block2::Zero();
        for (int j = 0; j < 4; ++j)
            s += adm.Y.block<2, 2>(2 * i, 2 * j);
        CHECK(s.norm() < 1e-9);
    }
}

TEST_CASE("invalid networks rejected")
{
    NetworkModel m = single_line(0.0, 0.0);
    CHECK_THROWS(assemble_admittance(m));
    m = single_line(1.0, 0.0);
    m.n_inverters = 2;
    CHECK_THROWS_WITH(assemble_admittance(m), doctest::Contains("disconnected"));
    m = single_line(1.0, 0.0);
    m.n_loads = 1;
    CHECK_THROWS(assemble_admittance(m));
    m = single_line(-1.0, 1e-3);
    CHECK_THROWS(assemble_admittance(m));
}

TEST_CASE("reduction without loads")
{
    const auto model = chain(4, 0.02, 2e-5);
    const auto adm = assemble_admittance(model);
    const auto red = kron_reduce(adm, model, Vec::Constant(4, 2e-3));
    CHECK(max_abs(red.Y_red - adm.YII) == 0.0);
    CHECK(max_abs(red.Y_g - adm.YI0) == 0.0);
}

TEST_CASE("single line: no-load voltage equals grid phasor")
{
    const auto model = single_line(0.3, 1e-3);
    const auto red = kron_reduce(assemble_admittance(model), model, Vec::Constant(1, 1e-3));
    CHECK(red.w(0) == doctest::Approx(0.0).scale(model.V_g));
    CHECK(red.w(1) == doctest::Approx(model.V_g).epsilon(1e-14));
    CHECK(red.w_hat(1) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("Kron reduction reproduces inverter injections")
{
    for (int t = 0; t < 30; ++t) {
        const int n = irand(1, 5), l = irand(1, 4);
        const auto model = random_network(n, l);
        const auto adm = assemble_admittance(model);
        const auto red = kron_reduce(adm, model, Vec::Constant(n, 1e-3));
        const Vec v0 = rand_vec(2, -200, 200), vI = rand_vec(2 * n, -200, 200);
        // load voltages from KCL with resistive loads: (Y_LL + R_L^-1) v_L = -(Y_L0 v0 + Y_LI vI)
        Mat S = adm.YLL;
        for (int k = 0; k < l; ++k)
            S.block<2, 2>(2 * k, 2 * k) += Block2::Identity() / model.load_resistances[k];
        const Vec vL = S.fullPivLu().solve(-(adm.YL0 * v0 + adm.YLI * vI));
        const Vec iI = adm.YI0 * v0 + adm.YIL * vL + adm.YII * vI;
        const Vec iR = red.Y_red * vI + red.Y_g * v0;
        CHECK((iI - iR).cwiseAbs().maxCoeff() <= 1e-9 * iI.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("capacitor augmentation only touches diagonal blocks")
{
    const auto model = random_network(4, 2);
    const Vec C = rand_vec(4, 1e-4, 3e-3);
    const auto red = kron_reduce(assemble_admittance(model), model, C);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            Block2 expect = Block2::Zero();
            if (i == j)
                expect = model.omega_nom * C(i) * Jmat();
            CHECK(max_abs(red.Y_Cred.block<2, 2>(2 * i, 2 * j) - red.Y_red.block<2, 2>(2 * i, 2 * j) -
                          expect) < 1e-12);
        }
    const double base = model.V_g * model.V_g / model.s_nom;
    CHECK(max_abs(red.Yh_red - base * red.Y_red) == 0.0);
    CHECK(is_complex_form(red.Yh_red, 1e-12 * max_abs(red.Yh_red)));
}

TEST_CASE("chain inverse norm has closed form")
{
    // Y_red^-1 = z min(i, j), largest row sum z n(n+1)/2
    const double R = 0.02, L = 2e-5;
    for (int n : {1, 5, 22, 35}) {
        const auto model = chain(n, R, L);
        const auto red = kron_reduce(assemble_admittance(model), model, Vec::Constant(n, 2e-3));
        const double zh = std::abs(std::complex<double>(R, model.omega_nom * L)) * model.s_nom /
                          (model.V_g * model.V_g);
        const Mat inv = red.Yh_red.inverse();
        CHECK(cnorm_inf_mat(inv) == doctest::Approx(zh * n * (n + 1) / 2.0).epsilon(1e-10));
    }
}

TEST_CASE("line matrices")
{
    for (int t = 0; t < 20; ++t) {
        const int n = irand(1, 5), l = irand(0, 3);
        const auto model = random_network(n, l);
        const auto adm = assemble_admittance(model);
        const auto red = kron_reduce(adm, model, Vec::Constant(n, 1e-3));
        const int m = model.n_lines();
        Vec wl(m);
        for (int e = 0; e < m; ++e)
            wl(e) = model.omega_nom * model.lines[e].L;
        Mat coupling = Mat::Zero(m, m);
        if (l > 0) {
            const Vec rl = Eigen::Map<const Vec>(model.load_resistances.data(), l);
            coupling = adm.BL.transpose() * rl.asDiagonal() * adm.BL;
        }
        CHECK(max_abs(red.Z_L - red.Z - kron_i2(wl.cwiseInverse().asDiagonal() * coupling)) < 1e-9);
        // definite in the inductance-weighted inner product; unweighted only without loads
        const Mat wZ = kron_i2(wl.asDiagonal()) * red.Z_L;
        const Mat sym = wZ + wZ.transpose();
        CHECK(Eigen::SelfAdjointEigenSolver<Mat>(sym).eigenvalues().minCoeff() > 0.0);
        if (l == 0) {
            const Mat plain = red.Z_L + red.Z_L.transpose();
            CHECK(Eigen::SelfAdjointEigenSolver<Mat>(plain).eigenvalues().minCoeff() > 0.0);
        }
        const Mat symh = red.Zh_L + red.Zh_L.transpose();
        CHECK(Eigen::SelfAdjointEigenSolver<Mat>(symh).eigenvalues().minCoeff() > 0.0);
    }
}

TEST_CASE("purely resistive reduction")
{
    NetworkModel m = single_line(0.02, 0.0);
    const auto rr = purely_resistive_reduction(assemble_admittance(m), m);
    const double Rh = 0.02 * m.s_nom / (m.V_g * m.V_g);
    CHECK(rr.L_red_hat(0, 0) == doctest::Approx(1.0 / Rh).epsilon(1e-13));
    CHECK(rr.u_hat(0) == doctest::Approx(1.0).epsilon(1e-14));

    for (int t = 0; t < 30; ++t) {
        const int n = irand(1, 8), l = irand(0, 3);
        const auto model = random_network(n, l, false);
        const auto adm = assemble_admittance(model);
        const auto r = purely_resistive_reduction(adm, model);
        const Mat inv = r.L_red_hat.inverse();
        CHECK(inv.minCoeff() >= -1e-12 * inv.maxCoeff());
        // block form agrees with the Kron-reduced admittance
        const auto red = kron_reduce(adm, model, Vec::Zero(n));
        CHECK(max_abs(red.Yh_red - kron_i2(r.L_red_hat)) <= 1e-9 * max_abs(red.Yh_red));
        for (int k = 0; k < n; ++k) {
            CHECK(red.w_hat(2 * k) == doctest::Approx(0.0).scale(1.0));
            CHECK(red.w_hat(2 * k + 1) == doctest::Approx(r.u_hat(k)).epsilon(1e-10));
        }
        if (l == 0) {
            const double dev = (r.u_hat - Vec::Ones(n)).cwiseAbs().maxCoeff();
            CHECK(dev < 1e-12);
        }
    }
    NetworkModel ind = single_line(0.02, 1e-5);
    CHECK_THROWS_WITH(purely_resistive_reduction(assemble_admittance(ind), ind),
                      "network not purely resistive");
}
