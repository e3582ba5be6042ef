#include "gfi/inverter.hpp"

#include <cmath>

namespace gfi {

void fill_filter_constants(TimeConstants &tc, double L_f, double C_f, double V_g, double s_nom,
                           double omega_nom)
{
    const double w = omega_nom;
    tc.tau_LC = L_f / std::sqrt(1.0 / (w * w * C_f * C_f) + w * w * L_f * L_f);
    tc.tau_p_LC = C_f / std::sqrt(w * w * C_f * C_f + 1.0 / (w * w * L_f * L_f));
    tc.tau_pp_LC = C_f * w * V_g * V_g / s_nom;
}

TimeConstants derive_time_constants(const RawInverterGains &raw, double V_g, double s_nom,
                                    double omega_nom)
{
    const double vals[] = {raw.omega_c_PLL, raw.kp_PLL, raw.ki_PLL, raw.omega_s, raw.kp_s,
                           raw.ki_s,        raw.kp_c,   raw.ki_c,   raw.L_f,     raw.C_f};
    for (double v : vals)
        if (!(v > 0))
            throw std::invalid_argument("inverter gains must be strictly positive");
    if (!(V_g > 0) || !(s_nom > 0) || !(omega_nom > 0))
        throw std::invalid_argument("V_g, s_nom, omega_nom must be positive");
    TimeConstants tc;
    tc.tau_PLL = 1.0 / raw.omega_c_PLL;
    tc.tau_p_PLL = 1.0 / (V_g * raw.kp_PLL);
    tc.T_PLL = raw.kp_PLL / raw.ki_PLL;
    tc.tau_s = 1.0 / raw.omega_s;
    tc.tau_p_s = 1.0 / (V_g * raw.ki_s);
    tc.T_s = raw.kp_s / raw.ki_s;
    tc.tau_c = V_g * V_g / (raw.ki_c * s_nom);
    tc.T_c = raw.kp_c / raw.ki_c;
    fill_filter_constants(tc, raw.L_f, raw.C_f, V_g, s_nom, omega_nom);
    return tc;
}

LineTimeConstants line_time_constants(const Line &ln, double V_g, double s_nom, double omega_nom)
{
    const double z = std::hypot(ln.R, omega_nom * ln.L);
    return {ln.L / z, s_nom * z / (V_g * V_g)};
}

std::vector<LineTimeConstants> line_time_constants(const NetworkModel &model)
{
    std::vector<LineTimeConstants> out;
    for (const auto &ln : model.lines)
        out.push_back(line_time_constants(ln, model.V_g, model.s_nom, model.omega_nom));
    return out;
}

EpsilonReport epsilon(const std::vector<TimeConstants> &inv,
                      const std::vector<LineTimeConstants> &lines)
{
    if (inv.empty())
        throw std::invalid_argument("epsilon: no inverters");
    double a = 0, b = 0;
    for (const auto &t : inv) {
        a = std::max({a, t.tau_PLL, t.tau_p_PLL, t.tau_s, t.T_s, t.T_PLL, std::sqrt(t.tau_c),
                      std::sqrt(t.T_c)});
        b = std::max({b, std::sqrt(t.tau_LC), std::sqrt(t.tau_p_LC)});
    }
    for (const auto &l : lines)
        b = std::max(b, std::sqrt(l.tau_e));
    return {a, b, std::max(a, b)};
}

std::vector<bool> check_pll_condition(const std::vector<TimeConstants> &inv)
{
    std::vector<bool> ok;
    for (const auto &t : inv)
        ok.push_back(t.T_PLL > t.tau_PLL);
    return ok;
}

InverterParams family_inverter(double eps_I, double tau_p_s, double L_f, double C_f, double V_g,
                               double s_nom, double omega_nom)
{
    InverterParams p;
    const double e2 = eps_I * eps_I;
    p.tc.tau_PLL = e2;
    p.tc.tau_p_PLL = e2 / V_g;
    p.tc.T_PLL = eps_I;
    p.tc.tau_s = eps_I;
    p.tc.tau_p_s = tau_p_s;
    p.tc.T_s = 10.0 * eps_I;
    p.tc.tau_c = V_g / s_nom * e2;
    p.tc.T_c = e2;
    fill_filter_constants(p.tc, L_f, C_f, V_g, s_nom, omega_nom);
    p.L_f = L_f;
    p.C_f = C_f;
    return p;
}

} // namespace gfi
