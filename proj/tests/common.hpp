#pragma once

#include "gfi/spl.hpp"

#include <complex>
#include <random>

namespace testutil {

inline std::mt19937_64 &rng()
{
    static std::mt19937_64 g(20240611);
    return g;
}

inline double uni(double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng()); }
inline int irand(int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng()); }

inline gfi::Vec rand_vec(int n, double a = -1, double b = 1)
{
    gfi::Vec v(n);
    for (int i = 0; i < n; ++i)
        v(i) = uni(a, b);
    return v;
}

inline gfi::Mat rand_mat(int r, int c, double a = -1, double b = 1)
{
    gfi::Mat m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            m(i, j) = uni(a, b);
    return m;
}

// complex matrix -> 2x2 real blocks
inline gfi::Mat encode(const Eigen::MatrixXcd &z)
{
    gfi::Mat m(2 * z.rows(), 2 * z.cols());
    for (Eigen::Index i = 0; i < z.rows(); ++i)
        for (Eigen::Index j = 0; j < z.cols(); ++j)
            m.block<2, 2>(2 * i, 2 * j) = gfi::encode(z(i, j).real(), z(i, j).imag());
    return m;
}

// random radial feeder with optional load buses hanging off random nodes
inline gfi::NetworkModel random_network(int n, int l, bool inductive = true, double L_lo = 5e-6,
                                        double L_hi = 5e-5)
{
    gfi::NetworkModel m;
    m.n_inverters = n;
    m.n_loads = l;
    const int N = 1 + l + n;
    for (int b = 1; b < N; ++b) {
        const int parent = irand(0, b - 1);
        m.lines.push_back({parent, b, uni(0.005, 0.05), inductive ? uni(L_lo, L_hi) : 0.0});
    }
    for (int k = 0; k < l; ++k)
        m.load_resistances.push_back(uni(5.0, 50.0));
    return m;
}

inline double max_abs(const gfi::Mat &m) { return m.cwiseAbs().maxCoeff(); }

} // namespace testutil
