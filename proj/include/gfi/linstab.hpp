#pragma once
// Linearization, reduced stability matrices, Metzler LP and linear-algebra oracles.

#include "gfi/dynamics.hpp"
#include "gfi/fdjac.hpp"
#include "gfi/inverter.hpp"
#include "gfi/powerflow.hpp"

#include <complex>
#include <string>
#include <vector>

namespace gfi {

using CVec = Eigen::VectorXcd;

struct Linearization {
    Mat J;
    CVec eigenvalues;
    double spectral_abscissa = 0;
    std::complex<double> dominant;
};

CVec eigenvalues(const Mat &A);
double spectral_abscissa(const Mat &A);
Linearization analyze(const Mat &J);
Linearization jacobian(const VecField &f, const Vec &x, double step_scale = 1.0);
Linearization jacobian(const DynamicsSystem &sys, const Vec &x, double step_scale = 1.0);

BlockMatrix build_M(const PowerFlowSolution &sol, const ReducedNetwork &red, const Vec &delta_ref,
                    const Vec &tau_p_s);
ReducedOrderData reduced_order_data(const PowerFlowSolution &sol, const ReducedNetwork &red,
                                    const Vec &delta_ref, const Vec &tau_p_s, const BlockVector &s_ref);

Mat build_N(const ResistiveReduction &rr, const PowerFlowSolution &sol, const Vec &tau_p_s);
bool is_metzler(const Mat &N, double tol = 1e-12);
bool metzler_hurwitz_lp(const Mat &N);

enum class Method { FullEig, MMatrix, NMetzlerLP, StaticOnly };
enum class Verdict { Stable, Unstable, Uncertified };
std::string to_string(Method m);
std::string to_string(Verdict v);
Method parse_method(const std::string &s);

struct StabilityCertificate {
    Method kind = Method::FullEig;
    Verdict verdict = Verdict::Uncertified;
    double margin = 0;          // spectral abscissa, or LP slack sign for N
    bool pll_condition = true;
    EpsilonReport eps;
    double existence_margin = 0;
    std::string caveat;
    double seconds = 0;
};

// Hurwitz threshold: abscissa < -1e-9 stable, > 1e-9 unstable, otherwise marginal.
Verdict verdict_from_abscissa(double a);

StabilityCertificate certify(const DynamicsSystem &sys, const PowerFlowSolution &sol, Method method);
std::string certificate_json(const StabilityCertificate &c);

struct TensorEigsResult {
    CVec direct, via_blocks;
    double mismatch = 0;
    bool equal = false;
};
TensorEigsResult tensor_eigs_oracle(const Mat &A, const Mat &B, const Mat &C, double tol = 1e-8);

struct Lemma3Matrices {
    Mat A, B;
};
Lemma3Matrices lemma3_matrices(const Vec &Gamma, const Vec &Pi, const Vec &Xi, const Vec &Upsilon,
                               const Vec &Sigma, const Vec &Theta, const Mat &K, const Mat &P, const Mat &Z);
bool lemma3_oracle(const Vec &Gamma, const Vec &Pi, const Vec &Xi, const Vec &Upsilon, const Vec &Sigma,
                   const Vec &Theta, const Mat &K, const Mat &P, const Mat &Z);

} // namespace gfi
