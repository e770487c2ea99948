#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "epibif/errors.hpp"

namespace epibif {

/// Parameters of the treatment-and-recruitment core-group model.
///
/// Rates are per unit time; a1/a2 are the dimensionless risk-perception
/// coefficients entering the recruitment function theta. T_total is the
/// (conserved) total population P + S + I + U.
struct ModelParams {
    double a1 = 0.0;      // risk perception from prevalence, >= 0
    double a2 = 0.0;      // risk perception from treatment, <= 0
    double beta = 0.0;    // infectious rate
    double eta = 0.0;     // treatment efficacy
    double gamma = 0.0;   // recovery rate
    double mu = 0.0;      // mortality rate
    double tau = 0.0;     // treatment rate
    double b = 0.0;       // susceptible birth rate
    double b_hat = 0.0;   // infected birth rate
    double T_total = 0.0; // total population

    double beta_hat() const { return (1.0 - eta) * beta; }

    /// b = b_hat = mu, the condition under which T is conserved and the
    /// 3D reduction is exact.
    bool reduced_system_valid() const { return b == mu && b_hat == mu; }

    /// Range checks against the biological parameter box. Violations are
    /// reported, not rejected: the analyses near bifurcation points
    /// deliberately sit on box boundaries (beta = 1, gamma + mu -> 0).
    std::vector<std::string> range_warnings() const;
};

/// The parameter values of the paper's simulation section, T = 100.
/// b and b_hat are set to mu so the reduced system is exact.
ModelParams section4_params();

struct CoreState {
    double S = 0.0;
    double I = 0.0;
    double U = 0.0;

    double N() const { return S + I + U; }
    Eigen::Vector3d vec() const { return {S, I, U}; }
    static CoreState from_vec(const Eigen::Vector3d& v) { return {v[0], v[1], v[2]}; }
};

struct FullState {
    double P = 0.0;
    double S = 0.0;
    double I = 0.0;
    double U = 0.0;

    double N() const { return S + I + U; }
    Eigen::Vector4d vec() const { return {P, S, I, U}; }
    static FullState from_vec(const Eigen::Vector4d& v) { return {v[0], v[1], v[2], v[3]}; }
};

/// Recruitment rate theta(S,I,U) = exp(-(a1*I + a2*U)/N).
/// Throws DomainError when N <= 0.
double theta(const CoreState& state, const ModelParams& params);

/// Reduced 3D vector field (Sdot, Idot, Udot); P = T_total - N inside Sdot.
Eigen::Vector3d rhs_reduced(const CoreState& state, const ModelParams& params);

/// Full 4D vector field (Pdot, Sdot, Idot, Udot).
Eigen::Vector4d rhs_full(const FullState& state, const ModelParams& params);

/// Jacobian of rhs_reduced, including theta's dependence on S, I, U
/// through N and the P = T_total - N substitution.
Eigen::Matrix3d jacobian_analytic(const CoreState& state, const ModelParams& params);

/// Central-difference Jacobian of rhs_reduced, column step h_j = step*(1+|x_j|).
Eigen::Matrix3d jacobian_fd(const CoreState& state, const ModelParams& params,
                            double step = 1e-5);

/// Central-difference Jacobian of a generic field (verification oracle).
Eigen::MatrixXd jacobian_fd(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step = 1e-5);

}  // namespace epibif
