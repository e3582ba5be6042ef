#pragma once
// Network graph, nodal admittance, Kron reduction and per-unit scaling.
// Buses: 0 = grid, 1..l = loads, l+1..l+n = inverters.

#include "gfi/blockmath.hpp"

#include <string>
#include <vector>

namespace gfi {

struct Line {
    int from = 0, to = 0;
    double R = 0.0; // ohm
    double L = 0.0; // henry
    bool operator==(const Line &) const = default;
};

struct NetworkModel {
    int n_inverters = 0;
    int n_loads = 0;
    std::vector<Line> lines;
    std::vector<double> load_resistances; // ohm, one per load bus
    double V_g = 120.0 * std::sqrt(2.0);  // peak volt
    double omega_nom = 120.0 * M_PI;
    double s_nom = 1000.0; // VA

    int n_buses() const { return 1 + n_loads + n_inverters; }
    int n_lines() const { return int(lines.size()); }
    int inverter_bus(int k) const { return 1 + n_loads + k; }
    int load_bus(int k) const { return 1 + k; }
    void validate() const;
    bool operator==(const NetworkModel &) const = default;
};

struct AdmittanceDecomposition {
    BlockMatrix Y;       // 2N x 2N, siemens
    BlockMatrix A;       // block-diagonal branch admittances, 2m x 2m
    Mat B, B0, BL, BI;   // incidence (buses x lines) and its row partitions
    BlockMatrix Y00, Y0L, Y0I, YL0, YLL, YLI, YI0, YIL, YII;
};

struct ReducedNetwork {
    int n = 0, m = 0, l = 0;
    double V_g = 0, s_nom = 0, omega_nom = 0;
    // physical
    BlockMatrix Y_red, Y_Cred, Y_g;
    BlockVector w;
    // dimensionless
    BlockMatrix Yh_red, Yh_Cred, Yh_g;
    BlockVector w_hat;
    Vec tau_pp_LC;
    // line matrices as printed: Z = [wL]^-1[R] x I + I x J, Z_L = Z + ([wL]^-1 B_L^T [R_L] B_L) x I
    BlockMatrix Z, Z_L;
    // per-unit line impedance s/V^2 (R + wLJ) plus load coupling, and line rates V^2/(s L)
    BlockMatrix Zh, Zh_L;
    Vec line_rate;
    std::vector<std::string> warnings;
};

AdmittanceDecomposition assemble_admittance(const NetworkModel &model);
ReducedNetwork kron_reduce(const AdmittanceDecomposition &adm, const NetworkModel &model,
                           const Vec &C_f);

struct ResistiveReduction {
    Mat L_red_hat; // n x n grounded Laplacian after load elimination
    Vec u_hat;     // no-load q-axis voltage profile
};
ResistiveReduction purely_resistive_reduction(const AdmittanceDecomposition &adm,
                                              const NetworkModel &model);

} // namespace gfi
