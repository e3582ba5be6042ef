// gfinet: power flow, stability certificates, simulation and SPL sweeps for
// networks of grid-following inverters.
//
// Exit codes: 0 ok/stable, 1 usage or config, 2 unstable, 3 uncertified, 4 numerical failure.

#include "gfi/config.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <random>
#include <sstream>

using namespace gfi;
using nlohmann::json;

namespace {

enum Exit { OK = 0, USAGE = 1, UNSTABLE = 2, UNCERTIFIED = 3, NUMERIC = 4 };

struct Common {
    std::string config_path;
    std::string out_dir;
    bool json_out = false;
    double tol = 0;
    int max_iter = 0;
    long seed = -1;
};

std::vector<std::string> split(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(tok);
    return out;
}

std::vector<double> parse_list(const std::string &s)
{
    std::vector<double> out;
    for (const auto &t : split(s))
        out.push_back(std::stod(t));
    return out;
}

ScenarioConfig load(const Common &c)
{
    ScenarioConfig cfg = load_config(c.config_path);
    if (!c.out_dir.empty())
        cfg.run.out_dir = c.out_dir;
    if (c.tol > 0)
        cfg.run.tol = c.tol;
    if (c.max_iter > 0)
        cfg.run.max_iter = c.max_iter;
    if (c.seed >= 0)
        cfg.run.seed = unsigned(c.seed);
    return cfg;
}

std::string path_in(const ScenarioConfig &cfg, const std::string &name) { return cfg.run.out_dir + "/" + name; }

void finish(const Common &c, const ScenarioConfig &cfg, json report)
{
    report["inputs"] = to_json(cfg);
    write_file_atomic(path_in(cfg, "report.json"), report.dump(2) + "\n");
    if (c.json_out)
        std::cout << report.dump(2) << "\n";
}

json eps_json(const DynamicsSystem &sys)
{
    std::vector<TimeConstants> tcs;
    for (const auto &p : sys.inv)
        tcs.push_back(p.tc);
    const EpsilonReport e = epsilon(tcs, line_time_constants(sys.model));
    return {{"eps_I", e.eps_I}, {"eps_E", e.eps_E}, {"eps", e.eps}};
}

// reduced network and inverter constants only; works without line inductance
DynamicsSystem static_system(const ScenarioConfig &cfg)
{
    DynamicsSystem sys;
    sys.model = cfg.network;
    sys.adm = assemble_admittance(cfg.network);
    sys.inv = cfg.inverters();
    const int n = cfg.network.n_inverters;
    Vec Cf(n);
    sys.tps.resize(n);
    for (int k = 0; k < n; ++k) {
        Cf(k) = sys.inv[k].C_f;
        sys.tps(k) = sys.inv[k].tc.tau_p_s;
    }
    sys.red = kron_reduce(sys.adm, cfg.network, Cf);
    sys.s_ref = cfg.s_ref();
    return sys;
}

int cmd_powerflow(const Common &c)
{
    const ScenarioConfig cfg = load(c);
    const DynamicsSystem sys = static_system(cfg);
    PowerFlowProblem prob{&sys.red, sys.s_ref};
    const double margin = existence_margin(prob);
    std::cout << "existence margin " << margin << (margin <= 0.375 ? " (<= 3/8, certified)\n" : " (> 3/8, uncertified)\n");
    PowerFlowSolution sol;
    try {
        sol = solve_fixed_point(prob, cfg.run.tol, cfg.run.max_iter);
    } catch (const NumericalError &e) {
        std::cout << "power flow failed: " << e.what() << "\n";
        finish(c, cfg, {{"command", "powerflow"}, {"existence_margin", margin}, {"error", e.what()}});
        return NUMERIC;
    }
    std::ostringstream csv;
    write_powerflow_csv(csv, sol);
    write_file_atomic(path_in(cfg, "powerflow.csv"), csv.str());
    std::cout << "converged in " << sol.iterations << " iterations; residuals " << sol.res_power << " (power), "
              << sol.res_current << " (current)\n";
    finish(c, cfg,
           {{"command", "powerflow"},
            {"existence_margin", margin},
            {"eps", eps_json(sys)},
            {"iterations", sol.iterations},
            {"res_power", sol.res_power},
            {"res_current", sol.res_current},
            {"in_ball", sol.in_ball},
            {"outputs", {path_in(cfg, "powerflow.csv")}}});
    return sol.certified ? OK : UNCERTIFIED;
}

int verdict_code(Verdict v)
{
    switch (v) {
    case Verdict::Stable: return OK;
    case Verdict::Unstable: return UNSTABLE;
    case Verdict::Uncertified: return UNCERTIFIED;
    }
    return NUMERIC;
}

int cmd_certify(const Common &c, const std::string &method_name)
{
    const ScenarioConfig cfg = load(c);
    Method method;
    try {
        method = parse_method(method_name);
    } catch (const std::invalid_argument &e) {
        std::cerr << e.what() << "\n";
        return USAGE;
    }
    if (method == Method::NMetzlerLP) {
        for (const auto &l : cfg.network.lines)
            if (l.L > 0) {
                std::cerr << "n-metzler-lp needs a purely resistive network\n";
                return USAGE;
            }
    }
    DynamicsSystem sys;
    PowerFlowSolution sol;
    StabilityCertificate cert;
    try {
        if (method == Method::NMetzlerLP) {
            sys = static_system(cfg);
        } else {
            sys = make_system(cfg.network, cfg.inverters(), cfg.s_ref());
        }
        PowerFlowProblem prob{&sys.red, cfg.s_ref()};
        sol = solve_fixed_point(prob, cfg.run.tol, cfg.run.max_iter);
        cert = certify(sys, sol, method);
    } catch (const NumericalError &e) {
        std::cout << "numerical failure: " << e.what() << "\n";
        finish(c, cfg, {{"command", "certify"}, {"error", e.what()}});
        return NUMERIC;
    } catch (const std::invalid_argument &e) {
        std::cerr << e.what() << "\n";
        return USAGE;
    }
    const std::string rec = certificate_json(cert);
    write_file_atomic(path_in(cfg, "certificate.json"), rec + "\n");
    std::cout << to_string(cert.kind) << ": " << to_string(cert.verdict) << " (margin " << cert.margin << ")\n";
    if (!cert.caveat.empty())
        std::cout << "note: " << cert.caveat << "\n";
    finish(c, cfg,
           {{"command", "certify"},
            {"certificate", json::parse(rec)},
            {"outputs", {path_in(cfg, "certificate.json")}}});
    return verdict_code(cert.verdict);
}

int cmd_simulate(const Common &c, double t_end, double perturb, const std::string &states)
{
    ScenarioConfig cfg = load(c);
    if (t_end > 0)
        cfg.run.t_end = t_end;
    if (!(cfg.run.t_end > 0)) {
        std::cerr << "t-end must be positive\n";
        return USAGE;
    }
    const DynamicsSystem sys = make_system(cfg.network, cfg.inverters(), cfg.s_ref());
    const auto names = state_names(sys);
    std::vector<int> idx;
    if (!states.empty()) {
        for (const auto &tok : split(states)) {
            auto it = std::find(names.begin(), names.end(), tok);
            if (it == names.end()) {
                std::cerr << "unknown state name '" << tok << "'\n";
                return USAGE;
            }
            idx.push_back(int(it - names.begin()));
        }
    }
    PowerFlowProblem prob{&sys.red, sys.s_ref};
    Trajectory tr;
    double dev0 = 0, dev1 = 0;
    try {
        const PowerFlowSolution sol = solve_fixed_point(prob, cfg.run.tol, cfg.run.max_iter);
        const Equilibrium eq = build_equilibrium(sys, sol);
        Vec x0 = eq.state;
        if (perturb != 0) {
            std::mt19937 rng(cfg.run.seed);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            if (idx.empty())
                for (int i = 0; i < sys.dim(); ++i)
                    x0(i) += perturb * u(rng);
            else
                for (int i : idx)
                    x0(i) += perturb;
        }
        IntegratorOptions opt;
        opt.rel_tol = cfg.run.rel_tol;
        opt.abs_tol = cfg.run.abs_tol;
        tr = simulate(sys, x0, cfg.run.t_end, cfg.run.samples, opt);
        dev0 = (tr.x.front() - eq.state).cwiseAbs().maxCoeff();
        dev1 = (tr.x.back() - eq.state).cwiseAbs().maxCoeff();
    } catch (const NumericalError &e) {
        std::cout << "numerical failure: " << e.what() << "\n";
        finish(c, cfg, {{"command", "simulate"}, {"error", e.what()}});
        return NUMERIC;
    }
    std::ostringstream csv;
    write_trajectory_csv(csv, sys, tr);
    write_file_atomic(path_in(cfg, "trajectory.csv"), csv.str());
    std::cout << "simulated " << cfg.run.t_end << " s in " << tr.steps << " steps (" << tr.rejected
              << " rejected); deviation " << dev0 << " -> " << dev1;
    if (dev0 > 0)
        std::cout << (dev1 > 10 * dev0 ? " (growing)" : dev1 < dev0 ? " (decaying)" : "");
    std::cout << "\n";
    finish(c, cfg,
           {{"command", "simulate"},
            {"steps", tr.steps},
            {"rejected", tr.rejected},
            {"initial_deviation", dev0},
            {"final_deviation", dev1},
            {"outputs", {path_in(cfg, "trajectory.csv")}}});
    return OK;
}

int cmd_spl(const Common &c, const std::string &methods, const std::string &p_grid, const std::string &eps_grid)
{
    ScenarioConfig cfg = load(c);
    if (!p_grid.empty())
        cfg.spl.p_grid = parse_list(p_grid);
    if (!eps_grid.empty())
        cfg.spl.eps_grid = parse_list(eps_grid);
    if (cfg.spl.p_grid.empty())
        cfg.spl.p_grid = {cfg.p_hat.empty() ? 1.0 : cfg.p_hat.front()};
    RadialFamilySpec spec = cfg.family();

    bool want_full = false, want_m = false, want_static = false;
    for (const auto &m : split(methods)) {
        const Method mm = parse_method(m);
        want_full |= mm == Method::FullEig;
        want_m |= mm == Method::MMatrix;
        want_static |= mm == Method::StaticOnly;
    }

    std::vector<SPLSummaryRow> rows;
    for (double p : cfg.spl.p_grid) {
        spec.p_hat = p;
        SPLSummaryRow r;
        r.p_hat = p;
        if (want_full)
            r.spl = compute_spl(spec, Method::FullEig).spl;
        if (want_m)
            r.spl_test = compute_spl(spec, Method::MMatrix).spl;
        if (want_static)
            r.spl_static = compute_spl(spec, Method::StaticOnly).spl;
        if (want_full && want_m) {
            const TimingResult t = time_certificates(spec, cfg.spl.timing_n);
            r.t_lin = t.t_lin;
            r.t_test = t.t_test;
        }
        std::cout << "p_hat " << p << ": SPL " << r.spl << ", SPL_test " << r.spl_test << ", SPL_static "
                  << r.spl_static << "\n";
        rows.push_back(r);
    }
    std::ostringstream summary;
    write_spl_summary_csv(summary, rows);
    write_file_atomic(path_in(cfg, "spl_summary.csv"), summary.str());
    json outputs = {path_in(cfg, "spl_summary.csv")};
    json report = {{"command", "spl"}};
    if (!cfg.spl.eps_grid.empty()) {
        const SweepResult sw = epsilon_sweep(spec, cfg.spl.eps_grid, cfg.spl.p_grid);
        std::ostringstream sweep_csv;
        write_sweep_csv(sweep_csv, sw);
        write_file_atomic(path_in(cfg, "eps_sweep.csv"), sweep_csv.str());
        outputs.push_back(path_in(cfg, "eps_sweep.csv"));
        report["largest_valid_eps"] = sw.largest_valid_eps;
        std::cout << "largest eps_I with SPL_test <= SPL: " << sw.largest_valid_eps << "\n";
    }
    report["outputs"] = outputs;
    finish(c, cfg, report);
    return OK;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"gfinet: grid-following inverter networks"};
    app.require_subcommand(1);
    Common c;
    auto add_common = [&](CLI::App *s) {
        s->add_option("config", c.config_path, "scenario config (JSON)")->required()->check(CLI::ExistingFile);
        s->add_option("--out-dir", c.out_dir, "output directory");
        s->add_option("--tol", c.tol, "power-flow tolerance");
        s->add_option("--max-iter", c.max_iter, "power-flow iteration cap");
        s->add_option("--seed", c.seed, "random seed");
        s->add_flag("--json", c.json_out, "print the run report as JSON");
    };
    auto *pf = app.add_subcommand("powerflow", "solve the power-flow equations");
    add_common(pf);
    std::string method = "full-eig";
    auto *ce = app.add_subcommand("certify", "small-signal stability certificate");
    add_common(ce);
    ce->add_option("--method", method, "full-eig | m-matrix | n-metzler-lp | static");
    double t_end = 0, perturb = 0;
    std::string states;
    auto *si = app.add_subcommand("simulate", "simulate the full-order dynamics");
    add_common(si);
    si->add_option("--t-end", t_end, "final time in seconds");
    si->add_option("--perturb", perturb, "initial perturbation magnitude");
    si->add_option("--perturb-states", states, "comma-separated state names to perturb (default: all, random)");
    std::string methods = "full-eig,m-matrix,static", p_grid, eps_grid;
    auto *sp = app.add_subcommand("spl", "safe penetration levels on the radial family");
    add_common(sp);
    sp->add_option("--methods", methods, "comma-separated methods");
    sp->add_option("--p-grid", p_grid, "comma-separated p_hat values");
    sp->add_option("--eps-grid", eps_grid, "comma-separated eps_I values");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? OK : USAGE;
    }
    try {
        if (*pf)
            return cmd_powerflow(c);
        if (*ce)
            return cmd_certify(c, method);
        if (*si)
            return cmd_simulate(c, t_end, perturb, states);
        if (*sp)
            return cmd_spl(c, methods, p_grid, eps_grid);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return USAGE;
    } catch (const std::invalid_argument &e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return USAGE;
    } catch (const NumericalError &e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return NUMERIC;
    }
    return USAGE;
}
