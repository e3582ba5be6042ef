#pragma once
// Radial test family, safe penetration level scans, epsilon sweep, timing.

#include "gfi/linstab.hpp"

#include <ostream>
#include <vector>

namespace gfi {

struct RadialFamilySpec {
    double line_R = 0.02, line_L = 2e-5;
    double V_g = 120.0 * std::sqrt(2.0), omega_nom = 120.0 * M_PI, s_nom = 1000.0;
    double eps_I = 0.001;
    double tau_p_s = 0.1 * 120.0 * std::sqrt(2.0);
    double L_f = 1e-3, C_f = 2e-3;
    double p_hat = 1.0; // active power p = p_hat * s_nom
    int n_max = 60;
    // optional explicit inverter constants (overrides the eps_I generator when set)
    bool use_explicit = false;
    InverterParams explicit_inverter;
};

struct RadialCase {
    NetworkModel model;
    std::vector<InverterParams> inv;
    BlockVector s_ref;
};

RadialCase make_radial(const RadialFamilySpec &spec, int n);
DynamicsSystem make_radial_system(const RadialFamilySpec &spec, int n);

struct SPLRow {
    int n = 0;
    Verdict verdict = Verdict::Uncertified;
    double margin = 0;
};

struct SPLResult {
    int spl = 0;
    bool capped = false;
    bool pf_failure = false;
    double seconds = 0; // certificate time only
    std::vector<SPLRow> table;
};

// Scans n = 1..n_max; stops after three consecutive non-stable verdicts.
SPLResult compute_spl(const RadialFamilySpec &spec, Method method);

struct TimingResult {
    int n = 0;
    double t_lin = 0, t_test = 0; // best of 3, seconds
};
TimingResult time_certificates(const RadialFamilySpec &spec, int n);

struct SPLSummaryRow {
    double p_hat = 0;
    double t_lin = 0, t_test = 0;
    int spl = 0, spl_test = 0, spl_static = 0;
};
SPLSummaryRow spl_summary_row(const RadialFamilySpec &spec, int timing_n = 20);
void write_spl_summary_csv(std::ostream &os, const std::vector<SPLSummaryRow> &rows);

struct SweepPoint {
    double eps_I = 0, p_hat = 0;
    int spl_full = 0, spl_test = 0;
};
struct SweepResult {
    std::vector<SweepPoint> points; // ordered by (eps, p)
    double largest_valid_eps = 0;   // largest eps with spl_test <= spl_full for all p at and below it
};
SweepResult epsilon_sweep(const RadialFamilySpec &spec, const std::vector<double> &eps_grid,
                          const std::vector<double> &p_list);
SweepResult epsilon_sweep_serial(const RadialFamilySpec &spec, const std::vector<double> &eps_grid,
                                 const std::vector<double> &p_list);
void write_sweep_csv(std::ostream &os, const SweepResult &r);

struct MarginPoint {
    double p_hat = 0, existence_margin = 0, abscissa_full = 0, abscissa_M = 0;
    bool converged = false;
};
std::vector<MarginPoint> margin_sweep(const RadialFamilySpec &spec, int n, const std::vector<double> &p_grid);
void write_margin_csv(std::ostream &os, const std::vector<MarginPoint> &pts);

} // namespace gfi
