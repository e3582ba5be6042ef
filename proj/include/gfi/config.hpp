#pragma once
// Scenario configuration (JSON), run reports and atomic file output.

#include "gfi/spl.hpp"

#include "json.hpp"

#include <string>
#include <vector>

namespace gfi {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class GroupKind { EpsGenerator, RawGains, TimeConstants };

struct InverterGroup {
    std::vector<int> buses; // inverter indices 0..n-1
    GroupKind kind = GroupKind::EpsGenerator;
    double eps_I = 0, tau_p_s = 0;
    RawInverterGains raw;
    TimeConstants tc;
    double L_f = 0, C_f = 0;
    bool operator==(const InverterGroup &) const = default;
};

struct RunOptions {
    double tol = 1e-12;
    int max_iter = 1000;
    std::string out_dir = "out";
    double t_end = 1.0;
    int samples = 201;
    double rel_tol = 1e-8, abs_tol = 1e-10;
    unsigned seed = 1;
    bool operator==(const RunOptions &) const = default;
};

struct SplOptions {
    std::vector<double> p_grid, eps_grid;
    int n_max = 60;
    int timing_n = 20;
    bool operator==(const SplOptions &) const = default;
};

struct ScenarioConfig {
    NetworkModel network;
    bool radial = false;
    double radial_r = 0, radial_l = 0;
    std::vector<InverterGroup> groups;
    std::vector<double> p_hat, q_hat;
    RunOptions run;
    SplOptions spl;
    bool operator==(const ScenarioConfig &) const = default;

    std::vector<InverterParams> inverters() const;
    BlockVector s_ref() const;
    RadialFamilySpec family() const;
};

ScenarioConfig parse_config(const nlohmann::json &j);
ScenarioConfig load_config(const std::string &path);
nlohmann::json to_json(const ScenarioConfig &c);

// temp file + rename
void write_file_atomic(const std::string &path, const std::string &content);

} // namespace gfi
