#include "gfi/fdjac.hpp"

namespace gfi {

Mat fd_jacobian_serial(const VecField &f, const Vec &x, double scale)
{
    const Eigen::Index N = x.size();
    Mat J(N, N);
    Vec xp = x, xm = x;
    for (Eigen::Index k = 0; k < N; ++k) {
        const double h = fd_step(x(k), scale);
        xp(k) = x(k) + h;
        xm(k) = x(k) - h;
        J.col(k) = (f(xp) - f(xm)) / (2.0 * h);
        xp(k) = xm(k) = x(k);
    }
    return J;
}

Mat fd_jacobian(const VecField &f, const Vec &x, double scale)
{
    const Eigen::Index N = x.size();
    Mat J(N, N);
#pragma omp parallel
    {
        Vec xp = x, xm = x;
#pragma omp for schedule(static)
        for (Eigen::Index k = 0; k < N; ++k) {
            const double h = fd_step(x(k), scale);
            xp(k) = x(k) + h;
            xm(k) = x(k) - h;
            J.col(k) = (f(xp) - f(xm)) / (2.0 * h);
            xp(k) = xm(k) = x(k);
        }
    }
    return J;
}

} // namespace gfi
