#pragma once
// Central finite-difference Jacobians. The OpenMP kernel splits columns across
// threads; the serial version is the reference used in tests and benchmarks.

#include "gfi/blockmath.hpp"

#include <functional>

namespace gfi {

using VecField = std::function<Vec(const Vec &)>;

// h_k = scale * max(1e-7, 1e-7 |x_k|)
inline double fd_step(double xk, double scale) { return scale * std::max(1e-7, 1e-7 * std::abs(xk)); }

Mat fd_jacobian(const VecField &f, const Vec &x, double scale = 1.0);
Mat fd_jacobian_serial(const VecField &f, const Vec &x, double scale = 1.0);

} // namespace gfi
