#pragma once

#include <optional>
#include <string>

#include "epibif/model.hpp"
#include "epibif/stability.hpp"

namespace epibif {

enum class EquilibriumKind { DiseaseFree, Endemic };

struct Equilibrium {
    CoreState coords;
    EquilibriumKind kind = EquilibriumKind::DiseaseFree;
    EigenTriple eigenvalues{};
    StabilityClass stability = StabilityClass::Nonhyperbolic;
    double residual = 0.0;  // max-norm of rhs_reduced at coords
};

/// The scalar constants of the endemic closed form.
struct EndemicConstants {
    double R0 = 0.0;
    double D0 = 0.0;  // discriminant under the square root
    double C0 = 0.0;  // ratio S1/U1
    double C1 = 0.0;  // exponent argument in U1
};

struct EquilibriumOptions {
    double residual_tol = -1.0;      // Newton convergence, default 1e-8 * T_total
    double closed_form_tol = -1.0;   // consistency trigger, default 1e-6 * T_total
    double endemic_I_threshold = -1.0;  // endemic labeling, default 1e-10 * T_total
    int max_iter = 50;

    double residual_tol_for(const ModelParams& p) const {
        return residual_tol > 0 ? residual_tol : 1e-8 * p.T_total;
    }
    double closed_form_tol_for(const ModelParams& p) const {
        return closed_form_tol > 0 ? closed_form_tol : 1e-6 * p.T_total;
    }
    double endemic_threshold_for(const ModelParams& p) const {
        return endemic_I_threshold > 0 ? endemic_I_threshold : 1e-10 * p.T_total;
    }
};

struct EndemicResult {
    bool exists = false;                // false: R0 <= 1 (or infeasible closed form)
    Equilibrium eq;
    EndemicConstants constants;
    bool closed_form_consistent = true; // false: Newton fallback is authoritative
    double closed_form_residual = 0.0;
    std::string note;
};

/// Basic reproduction number beta/(mu + tau). DomainError when mu + tau = 0.
double r0(const ModelParams& params);

/// E0 = (T/(mu+1), 0, 0) with closed-form eigenvalues
/// (-(mu+1), beta-(mu+tau), -(mu+gamma)).
Equilibrium disease_free_equilibrium(const ModelParams& params);

/// Closed-form endemic point E1 for R0 > 1; NoEndemic (exists = false)
/// otherwise. On residual failure falls back to newton_equilibrium and
/// clears closed_form_consistent.
EndemicResult endemic_closed_form(const ModelParams& params, const EquilibriumOptions& opts = {});

/// Damped Newton on rhs_reduced. Halves the step (up to 30 times) to keep
/// S, I, U nonnegative and the residual decreasing.
Equilibrium newton_equilibrium(const CoreState& guess, const ModelParams& params,
                               double tol = -1.0, int max_iter = 50);

}  // namespace epibif
