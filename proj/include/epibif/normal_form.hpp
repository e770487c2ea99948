#pragma once

#include <Eigen/Dense>
#include <functional>

#include "epibif/bifurcation.hpp"
#include "epibif/model.hpp"

namespace epibif {

using Field3 = std::function<Eigen::Vector3d(const Eigen::Vector3d&)>;

/// Right/left Jordan chains of a double-zero eigenvalue:
/// A q0 = 0, A q1 = q0, At p1 = 0, At p0 = p1, with
/// <p0,q0> = <p1,q1> = 1, <p0,q1> = <p1,q0> = 0.
struct JordanChains {
    Eigen::Vector3d q0, q1, p0, p1;
    double lambda0 = 0.0;  // the nonzero (negative) eigenvalue
    double res_Aq0 = 0.0, res_Aq1 = 0.0, res_Atp1 = 0.0, res_Atp0 = 0.0;
    double biorth_error = 0.0;

    double max_residual() const {
        return std::max(std::max(res_Aq0, res_Aq1), std::max(res_Atp1, res_Atp0));
    }
};

/// Chains via bordered linear systems, scaling fixed by ||q0|| = 1 with a
/// positive first nonzero component and q1 orthogonal to q0.
/// StructureError if the zero eigenvalue is semisimple or the spectrum is
/// not {0, 0, lambda0} (eigenvalue tolerance 1e-8 relative).
JordanChains jordan_chains(const Eigen::Matrix3d& A, double lambda0);

/// Second directional derivative D^2 f(x0)(u, v) by the symmetrized
/// polarization stencil; exact for quadratic fields, symmetric in (u, v)
/// by construction. Directions are normalized internally and the result
/// rescaled, so u, v of any magnitude are fine.
Eigen::Vector3d bilinear_form_B(const Field3& f, const Eigen::Vector3d& x0,
                                const Eigen::Vector3d& u, const Eigen::Vector3d& v,
                                double step = 1e-4);

/// Model version at state x0 (stencil states must keep N > 0).
Eigen::Vector3d bilinear_form_B(const CoreState& x0, const ModelParams& params,
                                const Eigen::Vector3d& u, const Eigen::Vector3d& v,
                                double step = 1e-4);

struct FitResult {
    double a2 = 0.0;
    double b2 = 0.0;
    Eigen::Vector3d h_coeffs{0, 0, 0};  // (H11, H12, H22) the graph iteration settled on
    double design_cond = 0.0;
    int iterations = 0;
};

struct TbtReport {
    JordanChains chains;
    double a2 = 0.0;  // w1^2 coefficient, quadratic normal form
    double b2 = 0.0;  // w1*w2 coefficient
    Eigen::Matrix2d H1 = Eigen::Matrix2d::Zero();  // z = 1/2 w^T H1 w
    double homological_residual = 0.0;
    double a2_fit = 0.0, b2_fit = 0.0;
    double b2_discrepancy = 0.0;  // |b2 - b2_fit| / |b2_fit|
    bool fit_agrees = false;      // within 5%
    double a2_zero_threshold = 0.0;
    bool a2_is_zero = false;      // the paper's normal form has no w1^2 term
};

struct NormalFormOptions {
    double step = 1e-4;       // bilinear stencil step factor
    double radius = -1.0;     // fit-oracle grid radius, default 1e-3*scale
    int grid = 7;             // grid points per w axis
    double agree_tol = 0.05;  // projection-vs-fit acceptance
};

/// Quadratic double-zero coefficients at a tBT point by the projection
/// formulas a2 = 1/2 <p1, B(q0,q0)>, b2 = <p0, B(q0,q0)> + <p1, B(q0,q1)>,
/// plus the quadratic center-manifold coefficients H1 from the homological
/// equation, cross-validated against reduced_fit_oracle.
TbtReport bt_quadratic_coeffs(const ModelParams& params_at_tbt,
                              const NormalFormOptions& opts = {});

/// Generic version for benchmark fields with spectrum {0, 0, lambda0} at x0.
TbtReport bt_quadratic_coeffs(const Field3& f, const Eigen::Vector3d& x0, double lambda0,
                              const NormalFormOptions& opts = {});

/// Independent (a2, b2) estimate: reconstructs states on the quadratic
/// center manifold (graph coefficients solved by fixed-point iteration),
/// projects f onto the adjoint chain, and least-squares fits the projected
/// quadratics on a symmetric w-grid of the given radius.
FitResult reduced_fit_oracle(const ModelParams& params_at_tbt, const JordanChains& chains,
                             double radius = -1.0, const NormalFormOptions& opts = {});

FitResult reduced_fit_oracle(const Field3& f, const Eigen::Vector3d& x0,
                             const JordanChains& chains, double radius,
                             const NormalFormOptions& opts = {});

}  // namespace epibif
