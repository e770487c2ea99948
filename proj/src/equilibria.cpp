#include "epibif/equilibria.hpp"

#include <cmath>

#include <Eigen/LU>

namespace epibif {

double r0(const ModelParams& params) {
    const double denom = params.mu + params.tau;
    if (denom == 0.0)
        throw DomainError("R0 undefined: mu + tau = 0 (double-zero degeneracy)");
    return params.beta / denom;
}

namespace {

Equilibrium finish(const CoreState& x, EquilibriumKind kind, const ModelParams& params) {
    Equilibrium eq;
    eq.coords = x;
    eq.kind = kind;
    eq.eigenvalues = eigenvalues_3x3(jacobian_analytic(x, params));
    eq.stability = classify(eq.eigenvalues);
    eq.residual = rhs_reduced(x, params).cwiseAbs().maxCoeff();
    return eq;
}

}  // namespace

Equilibrium disease_free_equilibrium(const ModelParams& params) {
    Equilibrium eq;
    eq.coords = CoreState{params.T_total / (params.mu + 1.0), 0.0, 0.0};
    eq.kind = EquilibriumKind::DiseaseFree;
    eq.eigenvalues = sort_eigenvalues({
        std::complex<double>(-(params.mu + 1.0)),
        std::complex<double>(params.beta - (params.mu + params.tau)),
        std::complex<double>(-(params.mu + params.gamma)),
    });
    eq.stability = classify(eq.eigenvalues);
    eq.residual = rhs_reduced(eq.coords, params).cwiseAbs().maxCoeff();
    return eq;
}

EndemicResult endemic_closed_form(const ModelParams& params, const EquilibriumOptions& opts) {
    EndemicResult res;
    const double R0 = r0(params);
    res.constants.R0 = R0;
    if (R0 <= 1.0) {
        res.exists = false;
        res.note = "no endemic equilibrium: R0 <= 1";
        return res;
    }
    const double eta = params.eta, gamma = params.gamma, mu = params.mu, tau = params.tau;
    if (tau == 0.0)
        throw DegenerateError("endemic closed form degenerates at tau = 0");

    const double D0 = 2.0 * tau * (gamma * (2.0 * eta - 1.0) + eta * mu +
                                   (eta - 1.0) * R0 * (mu + tau)) +
                      std::pow(gamma + eta * mu - (eta - 1.0) * R0 * (mu + tau), 2) +
                      tau * tau;
    res.constants.D0 = D0;
    if (D0 < 0.0)
        throw DiscriminantError("endemic closed form: D0 = " + std::to_string(D0) + " < 0");
    const double sq = std::sqrt(D0);

    const double C0 =
        (sq + gamma + eta * mu + tau - R0 * (eta - 1.0) * (mu - tau)) / (2.0 * tau * (R0 - 1.0));
    // shared denominator bracket of U1 and C1
    const double Q = gamma + eta * mu + 2.0 * eta * tau + sq - (eta - 1.0) * R0 * (mu + tau) - tau;
    const double C1 =
        (R0 - 1.0) *
        (params.a1 * (gamma + eta * mu + sq - eta * R0 * (mu + tau) + R0 * (mu + tau) - tau) +
         2.0 * params.a2 * tau) /
        (R0 * Q);
    res.constants.C0 = C0;
    res.constants.C1 = C1;

    const double U1 = 2.0 * params.T_total * (R0 - 1.0) * tau /
                      (R0 * Q * (mu * std::exp(C1) + 1.0));
    const double S1 = C0 * U1;
    const double I1 = S1 * (R0 - 1.0) + U1 * (R0 * (1.0 - eta) - 1.0);

    const CoreState cf{S1, I1, U1};
    if (!(I1 > opts.endemic_threshold_for(params)) || !(S1 > 0.0) || !(U1 > 0.0)) {
        res.exists = false;
        res.note = "closed form produced an infeasible point";
        return res;
    }

    res.exists = true;
    res.closed_form_residual = rhs_reduced(cf, params).cwiseAbs().maxCoeff();
    if (res.closed_form_residual <= opts.closed_form_tol_for(params)) {
        res.closed_form_consistent = true;
        res.eq = finish(cf, EquilibriumKind::Endemic, params);
    } else {
        // suspected-typo path: the Newton oracle defines E1
        res.closed_form_consistent = false;
        res.note = "closed-form residual " + std::to_string(res.closed_form_residual) +
                   " above tolerance; Newton result is authoritative";
        res.eq = newton_equilibrium(cf, params, opts.residual_tol_for(params), opts.max_iter);
    }
    return res;
}

Equilibrium newton_equilibrium(const CoreState& guess, const ModelParams& params, double tol,
                               int max_iter) {
    if (tol <= 0.0) tol = 1e-8 * params.T_total;
    const double neg_floor = -1e-9 * params.T_total;

    Eigen::Vector3d x = guess.vec();
    if (!(x.sum() > 0.0)) throw DomainError("newton_equilibrium: guess has N <= 0");

    auto feasible = [&](const Eigen::Vector3d& v) {
        return v.minCoeff() >= neg_floor && v.sum() > 0.0;
    };

    Eigen::Vector3d f = rhs_reduced(CoreState::from_vec(x), params);
    double fnorm = f.cwiseAbs().maxCoeff();

    for (int it = 0; it < max_iter; ++it) {
        if (fnorm <= tol) {
            CoreState sol = CoreState::from_vec(x);
            Equilibrium eq = finish(sol,
                                    sol.I > 1e-10 * params.T_total ? EquilibriumKind::Endemic
                                                                   : EquilibriumKind::DiseaseFree,
                                    params);
            return eq;
        }
        const Eigen::Matrix3d J = jacobian_analytic(CoreState::from_vec(x), params);
        Eigen::FullPivLU<Eigen::Matrix3d> lu(J);
        if (!lu.isInvertible())
            throw SingularJacobian("newton_equilibrium: singular Jacobian at iterate " +
                                   std::to_string(it));
        const Eigen::Vector3d delta = lu.solve(-f);

        double lambda = 1.0;
        bool accepted = false;
        bool any_feasible = false;
        for (int half = 0; half < 30; ++half, lambda *= 0.5) {
            const Eigen::Vector3d trial = x + lambda * delta;
            if (!feasible(trial)) continue;
            any_feasible = true;
            const Eigen::Vector3d ft = rhs_reduced(CoreState::from_vec(trial), params);
            const double fn = ft.cwiseAbs().maxCoeff();
            if (fn <= (1.0 - 1e-4 * lambda) * fnorm || fn <= tol) {
                x = trial;
                f = ft;
                fnorm = fn;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            if (!any_feasible)
                throw NegativeCoordinate(
                    "newton_equilibrium: step leaves the nonnegative octant and cannot be damped");
            throw NoConvergence("newton_equilibrium: line search stalled at residual " +
                                std::to_string(fnorm));
        }
    }
    if (fnorm <= tol) {
        CoreState sol = CoreState::from_vec(x);
        return finish(sol,
                      sol.I > 1e-10 * params.T_total ? EquilibriumKind::Endemic
                                                     : EquilibriumKind::DiseaseFree,
                      params);
    }
    throw NoConvergence("newton_equilibrium: residual " + std::to_string(fnorm) + " after " +
                        std::to_string(max_iter) + " iterations");
}

}  // namespace epibif
