#pragma once
// Complex numbers as 2x2 real blocks: x + iy  <->  x*I + y*J.

#include <Eigen/Dense>
#include <stdexcept>

namespace gfi {

using Block2 = Eigen::Matrix2d;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
// BlockVector: 2n reals, block k in slots (2k, 2k+1).
// BlockMatrix: 2n x 2m reals, dense.
using BlockVector = Eigen::VectorXd;
using BlockMatrix = Eigen::MatrixXd;

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline const Block2 &Jmat()
{
    static const Block2 j = (Block2() << 0, -1, 1, 0).finished();
    return j;
}
inline const Block2 &Hmat()
{
    static const Block2 h = (Block2() << 0, 1, 1, 0).finished();
    return h;
}

Block2 rot(double theta);
Block2 dmat(const Eigen::Vector2d &u);
Block2 dpmat(const Eigen::Vector2d &u);
// complex-form encoding of x + iy
Block2 encode(double x, double y);

// block-diagonal extensions over a BlockVector
BlockMatrix dmat(const BlockVector &v);
BlockMatrix dpmat(const BlockVector &v);
// blockwise R(theta_k)
BlockMatrix rot_blocks(const Vec &theta);
// I_n (x) B
BlockMatrix kron_eye(int n, const Block2 &b);
// A (x) I_2
BlockMatrix kron_i2(const Mat &a);

double cnorm_inf(const BlockVector &v);
bool is_complex_form(const BlockMatrix &a, double tol = 1e-12);
double cnorm_inf_mat(const BlockMatrix &a);

inline Eigen::Vector2d blk(const BlockVector &v, int k) { return v.segment<2>(2 * k); }

} // namespace gfi
