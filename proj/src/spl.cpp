#include "gfi/spl.hpp"

#include <algorithm>
#include <chrono>

namespace gfi {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

RadialCase make_radial(const RadialFamilySpec &spec, int n)
{
    if (n < 1)
        throw std::invalid_argument("make_radial: n >= 1 required");
    RadialCase c;
    c.model.n_inverters = n;
    c.model.n_loads = 0;
    c.model.V_g = spec.V_g;
    c.model.omega_nom = spec.omega_nom;
    c.model.s_nom = spec.s_nom;
    for (int e = 0; e < n; ++e)
        c.model.lines.push_back({e, e + 1, spec.line_R, spec.line_L});
    const InverterParams p = spec.use_explicit
                                 ? spec.explicit_inverter
                                 : family_inverter(spec.eps_I, spec.tau_p_s, spec.L_f, spec.C_f, spec.V_g,
                                                   spec.s_nom, spec.omega_nom);
    c.inv.assign(n, p);
    c.s_ref = kron_i2(Vec::Ones(n)) * Eigen::Vector2d(spec.p_hat, 0.0);
    return c;
}

DynamicsSystem make_radial_system(const RadialFamilySpec &spec, int n)
{
    const RadialCase c = make_radial(spec, n);
    return make_system(c.model, c.inv, c.s_ref);
}

SPLResult compute_spl(const RadialFamilySpec &spec, Method method)
{
    SPLResult res;
    int fails = 0;
    for (int n = 1; n <= spec.n_max; ++n) {
        const DynamicsSystem sys = make_radial_system(spec, n);
        PowerFlowProblem prob{&sys.red, sys.s_ref};
        SPLRow row;
        row.n = n;
        if (method == Method::StaticOnly) {
            row.margin = existence_margin(prob);
            row.verdict = row.margin <= 0.375 ? Verdict::Stable : Verdict::Uncertified;
        } else {
            PowerFlowSolution sol;
            try {
                sol = solve_fixed_point(prob);
            } catch (const NumericalError &) {
                res.pf_failure = true;
                break;
            }
            const StabilityCertificate c = certify(sys, sol, method);
            res.seconds += c.seconds;
            row.margin = c.margin;
            row.verdict = c.verdict;
        }
        res.table.push_back(row);
        if (row.verdict == Verdict::Stable) {
            res.spl = n;
            fails = 0;
        } else if (++fails >= 3) {
            break;
        }
    }
    res.capped = !res.table.empty() && fails == 0 && !res.pf_failure && int(res.table.size()) == spec.n_max;
    return res;
}

TimingResult time_certificates(const RadialFamilySpec &spec, int n)
{
    const DynamicsSystem sys = make_radial_system(spec, n);
    PowerFlowProblem prob{&sys.red, sys.s_ref};
    const PowerFlowSolution sol = solve_fixed_point(prob);
    const Vec d = delta_ref_of(sol.v_hat);
    TimingResult t;
    t.n = n;
    t.t_lin = t.t_test = INFINITY;
    for (int rep = 0; rep < 3; ++rep) {
        auto t0 = std::chrono::steady_clock::now();
        const Equilibrium eq = build_equilibrium(sys, sol);
        volatile double a = jacobian(sys, eq.state).spectral_abscissa;
        (void)a;
        t.t_lin = std::min(t.t_lin, seconds_since(t0));
        t0 = std::chrono::steady_clock::now();
        volatile double b = spectral_abscissa(build_M(sol, sys.red, d, sys.tps));
        (void)b;
        t.t_test = std::min(t.t_test, seconds_since(t0));
    }
    return t;
}

SPLSummaryRow spl_summary_row(const RadialFamilySpec &spec, int timing_n)
{
    SPLSummaryRow r;
    r.p_hat = spec.p_hat;
    r.spl = compute_spl(spec, Method::FullEig).spl;
    r.spl_test = compute_spl(spec, Method::MMatrix).spl;
    r.spl_static = compute_spl(spec, Method::StaticOnly).spl;
    const TimingResult t = time_certificates(spec, timing_n);
    r.t_lin = t.t_lin;
    r.t_test = t.t_test;
    return r;
}

void write_spl_summary_csv(std::ostream &os, const std::vector<SPLSummaryRow> &rows)
{
    os << "p_hat,T_lin,T_test,SPL,SPL_test,SPL_static\n";
    for (const auto &r : rows)
        os << r.p_hat << ',' << r.t_lin << ',' << r.t_test << ',' << r.spl << ',' << r.spl_test << ','
           << r.spl_static << '\n';
}

namespace {

SweepPoint sweep_point(const RadialFamilySpec &spec, double eps, double p)
{
    RadialFamilySpec s = spec;
    s.eps_I = eps;
    s.p_hat = p;
    return {eps, p, compute_spl(s, Method::FullEig).spl, compute_spl(s, Method::MMatrix).spl};
}

void finish_sweep(SweepResult &r, const std::vector<double> &eps_grid)
{
    std::vector<double> eps = eps_grid;
    std::sort(eps.begin(), eps.end());
    r.largest_valid_eps = 0;
    for (double e : eps) {
        bool ok = true;
        for (const auto &pt : r.points)
            if (pt.eps_I == e && pt.spl_test > pt.spl_full)
                ok = false;
        if (!ok)
            break;
        r.largest_valid_eps = e;
    }
}

} // namespace

SweepResult epsilon_sweep(const RadialFamilySpec &spec, const std::vector<double> &eps_grid,
                          const std::vector<double> &p_list)
{
    if (eps_grid.empty())
        throw std::invalid_argument("epsilon_sweep: empty eps grid");
    const int ne = int(eps_grid.size()), np = int(p_list.size());
    SweepResult r;
    r.points.resize(size_t(ne) * np);
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < ne * np; ++k)
        r.points[k] = sweep_point(spec, eps_grid[k / np], p_list[k % np]);
    finish_sweep(r, eps_grid);
    return r;
}

SweepResult epsilon_sweep_serial(const RadialFamilySpec &spec, const std::vector<double> &eps_grid,
                                 const std::vector<double> &p_list)
{
    if (eps_grid.empty())
        throw std::invalid_argument("epsilon_sweep: empty eps grid");
    SweepResult r;
    for (double e : eps_grid)
        for (double p : p_list)
            r.points.push_back(sweep_point(spec, e, p));
    finish_sweep(r, eps_grid);
    return r;
}

void write_sweep_csv(std::ostream &os, const SweepResult &r)
{
    os << "eps_I,p_hat,SPL,SPL_test\n";
    for (const auto &p : r.points)
        os << p.eps_I << ',' << p.p_hat << ',' << p.spl_full << ',' << p.spl_test << '\n';
}

std::vector<MarginPoint> margin_sweep(const RadialFamilySpec &spec, int n, const std::vector<double> &p_grid)
{
    std::vector<MarginPoint> out(p_grid.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < int(p_grid.size()); ++k) {
        RadialFamilySpec s = spec;
        s.p_hat = p_grid[k];
        const DynamicsSystem sys = make_radial_system(s, n);
        PowerFlowProblem prob{&sys.red, sys.s_ref};
        MarginPoint pt;
        pt.p_hat = p_grid[k];
        pt.existence_margin = existence_margin(prob);
        try {
            const PowerFlowSolution sol = solve_fixed_point(prob);
            const Equilibrium eq = build_equilibrium(sys, sol);
            pt.abscissa_full = jacobian(sys, eq.state).spectral_abscissa;
            pt.abscissa_M = spectral_abscissa(build_M(sol, sys.red, eq.delta_ref, sys.tps));
            pt.converged = true;
        } catch (const NumericalError &) {
            pt.converged = false;
        }
        out[k] = pt;
    }
    return out;
}

void write_margin_csv(std::ostream &os, const std::vector<MarginPoint> &pts)
{
    os << "p_hat,existence_margin,abscissa_full,abscissa_M,converged\n";
    os.precision(10);
    for (const auto &p : pts)
        os << p.p_hat << ',' << p.existence_margin << ',' << p.abscissa_full << ',' << p.abscissa_M << ','
           << int(p.converged) << '\n';
}

} // namespace gfi
