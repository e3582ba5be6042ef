// Serial vs OpenMP kernels: FD Jacobian at n=20 and a small epsilon sweep.
#include "gfi/spl.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>

using namespace gfi;

template <class F> static double seconds(F &&f, int reps)
{
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r)
        f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() / reps;
}

int main()
{
    std::printf("threads: %d\n", omp_get_max_threads());

    RadialFamilySpec spec;
    const auto sys = make_radial_system(spec, 20);
    const auto sol = solve_fixed_point({&sys.red, sys.s_ref});
    const auto eq = build_equilibrium(sys, sol);
    const VecField f = [&](const Vec &x) { return rhs(sys, x); };

    Mat Jp, Js;
    const double tp = seconds([&] { Jp = fd_jacobian(f, eq.state); }, 20);
    const double ts = seconds([&] { Js = fd_jacobian_serial(f, eq.state); }, 20);
    std::printf("fd_jacobian   dim %ld  serial %.4f s  omp %.4f s  speedup %.2f  max|diff| %.3g\n",
                static_cast<long>(Jp.rows()), ts, tp, ts / tp, (Jp - Js).cwiseAbs().maxCoeff());

    spec.n_max = 30;
    const std::vector<double> eps{0.001, 0.002, 0.005, 0.01}, ps{1.0, 2.0};
    SweepResult a, b;
    const double sp = seconds([&] { a = epsilon_sweep(spec, eps, ps); }, 1);
    const double ss = seconds([&] { b = epsilon_sweep_serial(spec, eps, ps); }, 1);
    int mismatches = 0;
    for (size_t k = 0; k < a.points.size(); ++k)
        mismatches += a.points[k].spl_full != b.points[k].spl_full || a.points[k].spl_test != b.points[k].spl_test;
    std::printf("epsilon_sweep %zu points  serial %.3f s  omp %.3f s  speedup %.2f  mismatches %d\n",
                a.points.size(), ss, sp, ss / sp, mismatches);
    return mismatches == 0 ? 0 : 1;
}
