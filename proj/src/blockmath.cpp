#include "gfi/blockmath.hpp"

#include <cmath>

namespace gfi {

Block2 rot(double theta)
{
    const double c = std::cos(theta), s = std::sin(theta);
    Block2 r;
    r << c, s, -s, c;
    return r;
}

Block2 dmat(const Eigen::Vector2d &u)
{
    Block2 d;
    d << u(0), u(1), u(1), -u(0);
    return d;
}

Block2 dpmat(const Eigen::Vector2d &u)
{
    Block2 d;
    d << u(0), u(1), -u(1), u(0);
    return d;
}

Block2 encode(double x, double y)
{
    Block2 b;
    b << x, -y, y, x;
    return b;
}

static void check_even(Eigen::Index n)
{
    if (n % 2)
        throw std::invalid_argument("block vector length must be even");
}

BlockMatrix dmat(const BlockVector &v)
{
    check_even(v.size());
    const int n = int(v.size() / 2);
    BlockMatrix m = BlockMatrix::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k)
        m.block<2, 2>(2 * k, 2 * k) = dmat(Eigen::Vector2d(blk(v, k)));
    return m;
}

BlockMatrix dpmat(const BlockVector &v)
{
    check_even(v.size());
    const int n = int(v.size() / 2);
    BlockMatrix m = BlockMatrix::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k)
        m.block<2, 2>(2 * k, 2 * k) = dpmat(Eigen::Vector2d(blk(v, k)));
    return m;
}

BlockMatrix rot_blocks(const Vec &theta)
{
    const int n = int(theta.size());
    BlockMatrix m = BlockMatrix::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k)
        m.block<2, 2>(2 * k, 2 * k) = rot(theta(k));
    return m;
}

BlockMatrix kron_eye(int n, const Block2 &b)
{
    BlockMatrix m = BlockMatrix::Zero(2 * n, 2 * n);
    for (int k = 0; k < n; ++k)
        m.block<2, 2>(2 * k, 2 * k) = b;
    return m;
}

BlockMatrix kron_i2(const Mat &a)
{
    BlockMatrix m = BlockMatrix::Zero(2 * a.rows(), 2 * a.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < a.cols(); ++j)
            if (a(i, j) != 0.0) {
                m(2 * i, 2 * j) = a(i, j);
                m(2 * i + 1, 2 * j + 1) = a(i, j);
            }
    return m;
}

double cnorm_inf(const BlockVector &v)
{
    if (v.size() == 0)
        throw std::invalid_argument("cnorm_inf: empty vector");
    check_even(v.size());
    double m = 0.0;
    for (Eigen::Index k = 0; k < v.size() / 2; ++k)
        m = std::max(m, std::hypot(v(2 * k), v(2 * k + 1)));
    return m;
}

bool is_complex_form(const BlockMatrix &a, double tol)
{
    if (a.rows() % 2 || a.cols() % 2)
        return false;
    for (Eigen::Index i = 0; i < a.rows(); i += 2)
        for (Eigen::Index j = 0; j < a.cols(); j += 2) {
            if (std::abs(a(i, j) - a(i + 1, j + 1)) > tol)
                return false;
            if (std::abs(a(i, j + 1) + a(i + 1, j)) > tol)
                return false;
        }
    return true;
}

double cnorm_inf_mat(const BlockMatrix &a)
{
    if (a.rows() % 2 || a.cols() % 2)
        throw std::invalid_argument("cnorm_inf_mat: odd dimensions");
    double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    if (!is_complex_form(a, 1e-12 * std::max(1.0, scale)))
        throw std::invalid_argument("cnorm_inf_mat: block not in complex form");
    double best = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); i += 2) {
        double row = 0.0;
        for (Eigen::Index j = 0; j < a.cols(); j += 2)
            row += std::hypot(a(i, j), a(i + 1, j));
        best = std::max(best, row);
    }
    return best;
}

} // namespace gfi
