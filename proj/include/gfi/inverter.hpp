#pragma once
// Inverter control parameters, time constants and the perturbation parameter.

#include "gfi/netgraph.hpp"

#include <vector>

namespace gfi {

struct RawInverterGains {
    double omega_c_PLL = 0, kp_PLL = 0, ki_PLL = 0;
    double omega_s = 0, kp_s = 0, ki_s = 0;
    double kp_c = 0, ki_c = 0;
    double L_f = 0, C_f = 0;
    bool operator==(const RawInverterGains &) const = default;
};

struct TimeConstants {
    double tau_PLL = 0, tau_p_PLL = 0, T_PLL = 0;
    double tau_s = 0, tau_p_s = 0, T_s = 0;
    double tau_c = 0, T_c = 0;
    double tau_LC = 0, tau_p_LC = 0, tau_pp_LC = 0;
    bool operator==(const TimeConstants &) const = default;
};

struct LineTimeConstants {
    double tau_e = 0, tau_p_e = 0;
};

struct InverterParams {
    TimeConstants tc;
    double L_f = 0, C_f = 0; // henry, farad
    bool operator==(const InverterParams &) const = default;
};

struct EpsilonReport {
    double eps_I = 0, eps_E = 0, eps = 0;
};

TimeConstants derive_time_constants(const RawInverterGains &raw, double V_g, double s_nom,
                                    double omega_nom);
void fill_filter_constants(TimeConstants &tc, double L_f, double C_f, double V_g, double s_nom,
                           double omega_nom);
LineTimeConstants line_time_constants(const Line &ln, double V_g, double s_nom, double omega_nom);
std::vector<LineTimeConstants> line_time_constants(const NetworkModel &model);

EpsilonReport epsilon(const std::vector<TimeConstants> &inv,
                      const std::vector<LineTimeConstants> &lines);

// strict T_PLL > tau_PLL per inverter
std::vector<bool> check_pll_condition(const std::vector<TimeConstants> &inv);

// radial-family parametrization driven by a single knob eps_I
InverterParams family_inverter(double eps_I, double tau_p_s, double L_f, double C_f, double V_g,
                               double s_nom, double omega_nom);

} // namespace gfi
