#pragma once

#include <span>
#include <string>
#include <vector>

#include "epibif/equilibria.hpp"

namespace epibif {

/// Unfolding coordinates of the transcritical Bogdanov-Takens point:
/// delta1 = R0 - 1, delta2 = gamma + mu. The organizing point is (0, 0).
struct UnfoldingParams {
    double delta1 = 0.0;
    double delta2 = 0.0;
};

UnfoldingParams unfolding(const ModelParams& params);

enum class SweepParam { A1, A2, Beta, Eta, Gamma, Mu, Tau };

SweepParam sweep_param_from_string(const std::string& name);
std::string to_string(SweepParam p);
ModelParams with_param(ModelParams params, SweepParam p, double value);
double get_param(const ModelParams& params, SweepParam p);

struct BranchRow {
    double value = 0.0;
    double R0 = 0.0;
    StabilityClass dfe_class = StabilityClass::Nonhyperbolic;
    bool has_endemic = false;
    CoreState endemic;
    EigenTriple endemic_eigs{};
    StabilityClass e1_class = StabilityClass::Nonhyperbolic;
    int d0_sign = 0;        // +1 / -1, 0 when not evaluated
    std::string error;      // per-row capture; empty on success
};

/// One row per value, computed fresh from the closed forms + Newton check.
/// Row errors are captured, never abort the sweep.
std::vector<BranchRow> sweep_branch(const ModelParams& params, SweepParam p,
                                    std::span<const double> values);

struct TranscriticalReport {
    double critical_value = 0.0;
    double bracket_lo = 0.0, bracket_hi = 0.0;  // sweep rows bracketing delta1 = 0
    double e1_e0_dist_1e2 = 0.0;   // ||E1-E0||_inf at delta1 = 1e-2
    double e1_e0_dist_1e3 = 0.0;
    double e1_e0_dist_1e4 = 0.0;
    bool continuity_ok = false;    // dist(1e-4) <= 1e-2*T and decreasing
};

/// Locate the delta1 sign change in the rows, refine by bisection to
/// 1e-10 relative, and verify endemic-branch continuity near the crossing.
/// Throws NoCrossing when delta1 never changes sign.
TranscriticalReport detect_transcritical(const ModelParams& params, SweepParam p,
                                         const std::vector<BranchRow>& rows);

struct HopfPoint {
    double critical_value = 0.0;
    Equilibrium equilibrium;             // endemic point at criticality
    std::complex<double> pair{0.0, 0.0}; // +i omega member of the pair
    double omega = 0.0;
    double bracket_width = 0.0;
};

struct HopfResult {
    bool found = false;
    std::string reason;  // "constant-sign" or "pair-degenerate" when !found
    HopfPoint point;
};

/// Bisection on m(p) = max Re of the complex-conjugate pair of Df(E1(p)).
/// The pair is tracked by minimal-distance matching between consecutive
/// evaluations; a collapse inside the bracket raises PairLost.
HopfResult find_hopf(const ModelParams& params, SweepParam p, double lo, double hi,
                     double tol = 1e-10);

struct TbtDiagnostics {
    CoreState e0;
    double f_norm = 0.0;       // ||rhs_reduced(E0)||_inf
    EigenTriple eigenvalues{};
    double eig_error = 0.0;    // max distance to {0, 0, -(mu+1)}
    double chain_residual = 0.0;
    double biorth_error = 0.0;
    double nilpotency = 0.0;   // max of ||A^2 q0||, ||A^2 q1||
    bool jordan_block = false; // genuine 2x2 block (rank 2)
    std::vector<std::string> warnings;
};

struct TbtLocation {
    ModelParams params;  // gamma = mu = 0, beta = tau imposed
    TbtDiagnostics diagnostics;
};

/// Parameters with delta1 = delta2 = 0 imposed (gamma = 0, mu = 0,
/// beta = tau) plus structure diagnostics. DegenerateError when tau = 0.
TbtLocation locate_tbt_point(const ModelParams& params);

}  // namespace epibif
