#include "gfi/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gfi {

namespace {

double err_norm(const Vec &e, const Vec &y0, const Vec &y1, const IntegratorOptions &o)
{
    double m = 0.0;
    for (Eigen::Index i = 0; i < e.size(); ++i) {
        const double sc = o.abs_tol + o.rel_tol * std::max(std::abs(y0(i)), std::abs(y1(i)));
        m = std::max(m, std::abs(e(i)) / sc);
    }
    return m;
}

Vec hermite(double s, double h, const Vec &y0, const Vec &f0, const Vec &y1, const Vec &f1)
{
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * y0 + h10 * h * f0 + h01 * y1 + h11 * h * f1;
}

} // namespace

Trajectory integrate_stiff(const VecField &f, const Vec &x0, double t0, double t_end,
                           const std::vector<double> &sample_times, const IntegratorOptions &opt)
{
    if (!(t_end > t0))
        throw std::invalid_argument("integrate_stiff: t_end must exceed t0");
    const double d = 1.0 / (2.0 + std::sqrt(2.0));
    const double e32 = 6.0 + std::sqrt(2.0);
    const Eigen::Index N = x0.size();

    Trajectory tr;
    size_t next = 0;
    while (next < sample_times.size() && sample_times[next] < t0)
        ++next;
    while (next < sample_times.size() && sample_times[next] == t0) {
        tr.t.push_back(t0);
        tr.x.push_back(x0);
        ++next;
    }

    Vec y = x0;
    Vec F0 = f(y);
    ++tr.rhs_evals;
    double t = t0;
    double h = opt.h0;
    if (h <= 0) {
        const double fs = F0.cwiseAbs().maxCoeff();
        const double ys = opt.abs_tol + opt.rel_tol * y.cwiseAbs().maxCoeff();
        h = fs > 0 ? 0.01 * std::cbrt(ys / fs) * std::max(1.0, std::cbrt(fs)) : 1e-6;
        h = std::min(h, 1e-3 * (t_end - t0));
        h = std::max(h, 1e-12);
    }
    const double h_max = opt.h_max > 0 ? opt.h_max : (t_end - t0);

    Mat Jm;
    bool need_jac = true;
    while (t < t_end) {
        if (tr.steps + tr.rejected >= opt.max_steps) {
            std::ostringstream os;
            os << "integrate_stiff: step budget exhausted at t=" << t << " (h=" << h << ")";
            throw NumericalError(os.str());
        }
        h = std::min(h, t_end - t);
        if (need_jac) {
            Jm = fd_jacobian(f, y);
            tr.rhs_evals += 2 * N;
            need_jac = false;
        }
        Eigen::PartialPivLU<Mat> W(Mat::Identity(N, N) - h * d * Jm);
        const Vec k1 = W.solve(F0);
        const Vec F1 = f(y + 0.5 * h * k1);
        const Vec k2 = W.solve(Vec(F1 - k1)) + k1;
        const Vec ynew = y + h * k2;
        const Vec F2 = f(ynew);
        const Vec k3 = W.solve(Vec(F2 - e32 * (k2 - F1) - 2.0 * (k1 - F0)));
        tr.rhs_evals += 2;
        const Vec err = (h / 6.0) * (k1 - 2.0 * k2 + k3);
        const double en = ynew.allFinite() ? err_norm(err, y, ynew, opt) : INFINITY;
        if (en <= 1.0) {
            const double tn = t + h;
            while (next < sample_times.size() && sample_times[next] <= tn + 1e-15 * std::abs(tn)) {
                const double s = (sample_times[next] - t) / h;
                tr.t.push_back(sample_times[next]);
                tr.x.push_back(hermite(std::clamp(s, 0.0, 1.0), h, y, F0, ynew, F2));
                ++next;
            }
            t = tn;
            y = ynew;
            F0 = F2;
            ++tr.steps;
            need_jac = true;
            const double fac = en > 0 ? 0.8 * std::pow(en, -1.0 / 3.0) : 5.0;
            h = std::min(h_max, h * std::clamp(fac, 0.2, 5.0));
        } else {
            ++tr.rejected;
            const double fac = std::isfinite(en) ? 0.8 * std::pow(en, -1.0 / 3.0) : 0.1;
            h *= std::clamp(fac, 0.1, 0.5);
            if (h < 1e-14 * std::max(1.0, std::abs(t))) {
                std::ostringstream os;
                os << "integrate_stiff: step size underflow, last accepted t=" << t;
                throw NumericalError(os.str());
            }
        }
    }
    return tr;
}

} // namespace gfi
