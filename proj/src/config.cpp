#include "gfi/config.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace gfi {

using nlohmann::json;

namespace {

const json &need(const json &j, const char *key, const std::string &path)
{
    if (!j.is_object() || !j.contains(key))
        throw ConfigError(path + "." + key + ": missing");
    return j.at(key);
}

double num(const json &j, const char *key, const std::string &path)
{
    const json &v = need(j, key, path);
    if (!v.is_number())
        throw ConfigError(path + "." + key + ": expected a number");
    return v.get<double>();
}

double num_or(const json &j, const char *key, double dflt, const std::string &path)
{
    return j.contains(key) ? num(j, key, path) : dflt;
}

std::vector<double> per_inverter(const json &j, const char *key, int n, double dflt, const std::string &path)
{
    if (!j.contains(key))
        return std::vector<double>(n, dflt);
    const json &v = j.at(key);
    if (v.is_number())
        return std::vector<double>(n, v.get<double>());
    if (!v.is_array() || int(v.size()) != n)
        throw ConfigError(path + "." + key + ": expected a number or an array of " + std::to_string(n));
    std::vector<double> out;
    for (const auto &e : v) {
        if (!e.is_number())
            throw ConfigError(path + "." + key + ": array entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<double> num_list(const json &j, const char *key, const std::string &path)
{
    std::vector<double> out;
    if (!j.contains(key))
        return out;
    const json &v = j.at(key);
    if (!v.is_array())
        throw ConfigError(path + "." + key + ": expected an array");
    for (const auto &e : v) {
        if (!e.is_number())
            throw ConfigError(path + "." + key + ": array entries must be numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

} // namespace

ScenarioConfig parse_config(const json &j)
{
    ScenarioConfig c;
    const json &net = need(j, "network", "$");
    const std::string np = "$.network";
    const json &grid = need(net, "grid", np);
    c.network.V_g = num(grid, "v_peak_volt", np + ".grid");
    c.network.omega_nom = num(grid, "omega_rad_per_s", np + ".grid");
    c.network.s_nom = num(grid, "s_nom_va", np + ".grid");

    if (net.contains("radial")) {
        const json &r = net.at("radial");
        const std::string rp = np + ".radial";
        c.radial = true;
        c.network.n_inverters = int(num(r, "n", rp));
        c.radial_r = num(r, "r_ohm", rp);
        c.radial_l = num(r, "l_henry", rp);
        if (c.network.n_inverters < 1)
            throw ConfigError(rp + ".n: must be >= 1");
        if (net.contains("loads") || net.contains("lines"))
            throw ConfigError(np + ": 'radial' excludes 'loads' and 'lines'");
        for (int e = 0; e < c.network.n_inverters; ++e)
            c.network.lines.push_back({e, e + 1, c.radial_r, c.radial_l});
    } else {
        c.network.n_inverters = int(num(net, "n_inverters", np));
        if (net.contains("loads")) {
            int k = 0;
            for (const auto &ld : net.at("loads"))
                c.network.load_resistances.push_back(num(ld, "r_ohm", np + ".loads[" + std::to_string(k++) + "]"));
        }
        c.network.n_loads = int(c.network.load_resistances.size());
        const json &lines = need(net, "lines", np);
        if (!lines.is_array())
            throw ConfigError(np + ".lines: expected an array");
        int k = 0;
        for (const auto &ln : lines) {
            const std::string lp = np + ".lines[" + std::to_string(k++) + "]";
            Line l;
            l.from = int(num(ln, "from", lp));
            l.to = int(num(ln, "to", lp));
            l.R = num(ln, "r_ohm", lp);
            l.L = num(ln, "l_henry", lp);
            c.network.lines.push_back(l);
        }
    }
    try {
        c.network.validate();
    } catch (const std::invalid_argument &e) {
        throw ConfigError(np + ": " + e.what());
    }
    const int n = c.network.n_inverters;

    const json &invs = need(j, "inverters", "$");
    if (!invs.is_array() || invs.empty())
        throw ConfigError("$.inverters: expected a nonempty array of groups");
    std::vector<int> covered(n, 0);
    int g = 0;
    for (const auto &gj : invs) {
        const std::string gp = "$.inverters[" + std::to_string(g++) + "]";
        InverterGroup grp;
        if (!gj.contains("buses") || (gj.at("buses").is_string() && gj.at("buses") == "all")) {
            for (int k = 0; k < n; ++k)
                grp.buses.push_back(k);
        } else {
            for (const auto &b : gj.at("buses")) {
                if (!b.is_number_integer() || b.get<int>() < 0 || b.get<int>() >= n)
                    throw ConfigError(gp + ".buses: inverter index out of range");
                grp.buses.push_back(b.get<int>());
            }
        }
        const int kinds = int(gj.contains("eps_generator")) + int(gj.contains("raw_gains")) +
                          int(gj.contains("time_constants"));
        if (kinds != 1)
            throw ConfigError(gp + ": exactly one of eps_generator, raw_gains, time_constants required");
        if (gj.contains("eps_generator")) {
            const json &e = gj.at("eps_generator");
            const std::string ep = gp + ".eps_generator";
            grp.kind = GroupKind::EpsGenerator;
            grp.eps_I = num(e, "eps_i", ep);
            grp.tau_p_s = num_or(e, "tau_p_s", 0.1 * c.network.V_g, ep);
            grp.L_f = num(e, "l_f_henry", ep);
            grp.C_f = num(e, "c_f_farad", ep);
        } else if (gj.contains("raw_gains")) {
            const json &e = gj.at("raw_gains");
            const std::string ep = gp + ".raw_gains";
            grp.kind = GroupKind::RawGains;
            auto &r = grp.raw;
            r.omega_c_PLL = num(e, "omega_c_pll_rad_per_s", ep);
            r.kp_PLL = num(e, "kp_pll", ep);
            r.ki_PLL = num(e, "ki_pll", ep);
            r.omega_s = num(e, "omega_s_rad_per_s", ep);
            r.kp_s = num(e, "kp_s", ep);
            r.ki_s = num(e, "ki_s", ep);
            r.kp_c = num(e, "kp_c", ep);
            r.ki_c = num(e, "ki_c", ep);
            r.L_f = grp.L_f = num(e, "l_f_henry", ep);
            r.C_f = grp.C_f = num(e, "c_f_farad", ep);
        } else {
            const json &e = gj.at("time_constants");
            const std::string ep = gp + ".time_constants";
            grp.kind = GroupKind::TimeConstants;
            auto &t = grp.tc;
            t.tau_PLL = num(e, "tau_pll_s", ep);
            t.tau_p_PLL = num(e, "tau_p_pll", ep);
            t.T_PLL = num(e, "t_pll_s", ep);
            t.tau_s = num(e, "tau_s_s", ep);
            t.tau_p_s = num(e, "tau_p_s", ep);
            t.T_s = num(e, "t_s_s", ep);
            t.tau_c = num(e, "tau_c", ep);
            t.T_c = num(e, "t_c", ep);
            grp.L_f = num(e, "l_f_henry", ep);
            grp.C_f = num(e, "c_f_farad", ep);
        }
        if (!(grp.L_f > 0) || !(grp.C_f > 0))
            throw ConfigError(gp + ": filter L and C must be positive");
        for (int b : grp.buses)
            ++covered[b];
        c.groups.push_back(grp);
    }
    for (int k = 0; k < n; ++k)
        if (covered[k] != 1)
            throw ConfigError("$.inverters: inverter " + std::to_string(k) + " must belong to exactly one group");

    const json inj = j.contains("injections") ? j.at("injections") : json::object();
    c.p_hat = per_inverter(inj, "p_hat", n, 0.0, "$.injections");
    c.q_hat = per_inverter(inj, "q_hat", n, 0.0, "$.injections");

    if (j.contains("run")) {
        const json &r = j.at("run");
        const std::string rp = "$.run";
        c.run.tol = num_or(r, "tol", c.run.tol, rp);
        c.run.max_iter = int(num_or(r, "max_iter", c.run.max_iter, rp));
        if (r.contains("out_dir"))
            c.run.out_dir = r.at("out_dir").get<std::string>();
        c.run.t_end = num_or(r, "t_end_s", c.run.t_end, rp);
        c.run.samples = int(num_or(r, "samples", c.run.samples, rp));
        c.run.rel_tol = num_or(r, "rel_tol", c.run.rel_tol, rp);
        c.run.abs_tol = num_or(r, "abs_tol", c.run.abs_tol, rp);
        c.run.seed = unsigned(num_or(r, "seed", c.run.seed, rp));
    }
    if (j.contains("spl")) {
        const json &s = j.at("spl");
        c.spl.p_grid = num_list(s, "p_grid", "$.spl");
        c.spl.eps_grid = num_list(s, "eps_grid", "$.spl");
        c.spl.n_max = int(num_or(s, "n_max", c.spl.n_max, "$.spl"));
        c.spl.timing_n = int(num_or(s, "timing_n", c.spl.timing_n, "$.spl"));
    }
    return c;
}

ScenarioConfig load_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error &e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

json to_json(const ScenarioConfig &c)
{
    json j;
    json net;
    net["grid"] = {{"v_peak_volt", c.network.V_g},
                   {"omega_rad_per_s", c.network.omega_nom},
                   {"s_nom_va", c.network.s_nom}};
    if (c.radial) {
        net["radial"] = {{"n", c.network.n_inverters}, {"r_ohm", c.radial_r}, {"l_henry", c.radial_l}};
    } else {
        net["n_inverters"] = c.network.n_inverters;
        net["loads"] = json::array();
        for (double r : c.network.load_resistances)
            net["loads"].push_back({{"r_ohm", r}});
        net["lines"] = json::array();
        for (const auto &l : c.network.lines)
            net["lines"].push_back({{"from", l.from}, {"to", l.to}, {"r_ohm", l.R}, {"l_henry", l.L}});
    }
    j["network"] = net;
    j["inverters"] = json::array();
    for (const auto &g : c.groups) {
        json gj;
        gj["buses"] = g.buses;
        switch (g.kind) {
        case GroupKind::EpsGenerator:
            gj["eps_generator"] = {{"eps_i", g.eps_I}, {"tau_p_s", g.tau_p_s}, {"l_f_henry", g.L_f}, {"c_f_farad", g.C_f}};
            break;
        case GroupKind::RawGains:
            gj["raw_gains"] = {{"omega_c_pll_rad_per_s", g.raw.omega_c_PLL}, {"kp_pll", g.raw.kp_PLL},
                               {"ki_pll", g.raw.ki_PLL}, {"omega_s_rad_per_s", g.raw.omega_s},
                               {"kp_s", g.raw.kp_s}, {"ki_s", g.raw.ki_s}, {"kp_c", g.raw.kp_c},
                               {"ki_c", g.raw.ki_c}, {"l_f_henry", g.L_f}, {"c_f_farad", g.C_f}};
            break;
        case GroupKind::TimeConstants:
            gj["time_constants"] = {{"tau_pll_s", g.tc.tau_PLL}, {"tau_p_pll", g.tc.tau_p_PLL},
                                    {"t_pll_s", g.tc.T_PLL}, {"tau_s_s", g.tc.tau_s},
                                    {"tau_p_s", g.tc.tau_p_s}, {"t_s_s", g.tc.T_s},
                                    {"tau_c", g.tc.tau_c}, {"t_c", g.tc.T_c},
                                    {"l_f_henry", g.L_f}, {"c_f_farad", g.C_f}};
            break;
        }
        j["inverters"].push_back(gj);
    }
    j["injections"] = {{"p_hat", c.p_hat}, {"q_hat", c.q_hat}};
    j["run"] = {{"tol", c.run.tol},         {"max_iter", c.run.max_iter}, {"out_dir", c.run.out_dir},
                {"t_end_s", c.run.t_end},   {"samples", c.run.samples},   {"rel_tol", c.run.rel_tol},
                {"abs_tol", c.run.abs_tol}, {"seed", c.run.seed}};
    j["spl"] = {{"p_grid", c.spl.p_grid}, {"eps_grid", c.spl.eps_grid}, {"n_max", c.spl.n_max},
                {"timing_n", c.spl.timing_n}};
    return j;
}

std::vector<InverterParams> ScenarioConfig::inverters() const
{
    const NetworkModel &m = network;
    std::vector<InverterParams> out(m.n_inverters);
    for (const auto &g : groups) {
        InverterParams p;
        switch (g.kind) {
        case GroupKind::EpsGenerator:
            p = family_inverter(g.eps_I, g.tau_p_s, g.L_f, g.C_f, m.V_g, m.s_nom, m.omega_nom);
            break;
        case GroupKind::RawGains:
            p.tc = derive_time_constants(g.raw, m.V_g, m.s_nom, m.omega_nom);
            break;
        case GroupKind::TimeConstants:
            p.tc = g.tc;
            fill_filter_constants(p.tc, g.L_f, g.C_f, m.V_g, m.s_nom, m.omega_nom);
            break;
        }
        p.L_f = g.L_f;
        p.C_f = g.C_f;
        for (int b : g.buses)
            out[b] = p;
    }
    return out;
}

BlockVector ScenarioConfig::s_ref() const
{
    BlockVector s(2 * p_hat.size());
    for (size_t k = 0; k < p_hat.size(); ++k) {
        s(2 * k) = p_hat[k];
        s(2 * k + 1) = q_hat[k];
    }
    return s;
}

RadialFamilySpec ScenarioConfig::family() const
{
    if (!radial)
        throw ConfigError("$.network: the spl command needs a 'radial' network");
    RadialFamilySpec s;
    s.line_R = radial_r;
    s.line_L = radial_l;
    s.V_g = network.V_g;
    s.omega_nom = network.omega_nom;
    s.s_nom = network.s_nom;
    s.n_max = spl.n_max;
    s.p_hat = p_hat.empty() ? 0.0 : p_hat.front();
    const InverterGroup &g = groups.front();
    s.L_f = g.L_f;
    s.C_f = g.C_f;
    if (g.kind == GroupKind::EpsGenerator) {
        s.eps_I = g.eps_I;
        s.tau_p_s = g.tau_p_s;
    } else {
        s.use_explicit = true;
        s.explicit_inverter = inverters().front();
    }
    return s;
}

void write_file_atomic(const std::string &path, const std::string &content)
{
    namespace fs = std::filesystem;
    const fs::path p(path);
    if (p.has_parent_path())
        fs::create_directories(p.parent_path());
    const fs::path tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot write '" + tmp.string() + "'");
        out << content;
        out.flush();
        if (!out)
            throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, p);
}

} // namespace gfi
