#include "epibif/model.hpp"

#include <cmath>

namespace epibif {

namespace {

void require_positive_N(double N) {
    if (!(N > 0.0)) throw DomainError("state has N = S+I+U <= 0, vector field undefined");
}

}  // namespace

std::vector<std::string> ModelParams::range_warnings() const {
    std::vector<std::string> w;
    auto in01 = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (a1 < 0.0) w.push_back("a1 < 0 (expected >= 0)");
    if (a2 > 0.0) w.push_back("a2 > 0 (expected <= 0)");
    if (!(beta > 0.0 && beta <= 1.0)) w.push_back("beta outside (0, 1]");
    if (!in01(eta)) w.push_back("eta outside [0, 1]");
    if (!in01(gamma)) w.push_back("gamma outside [0, 1]");
    if (!in01(mu)) w.push_back("mu outside [0, 1]");
    if (!in01(tau)) w.push_back("tau outside [0, 1]");
    if (!in01(b)) w.push_back("b outside [0, 1]");
    if (!in01(b_hat)) w.push_back("b_hat outside [0, 1]");
    if (!(T_total > 0.0)) w.push_back("T_total <= 0");
    return w;
}

ModelParams section4_params() {
    ModelParams p;
    p.a1 = 8.0;
    p.a2 = -2.3;
    p.beta = 1.0;
    p.eta = 0.41;
    p.gamma = 0.46;
    p.mu = 0.44;
    p.tau = 0.002;
    p.b = p.b_hat = p.mu;
    p.T_total = 100.0;
    return p;
}

double theta(const CoreState& state, const ModelParams& params) {
    const double N = state.N();
    require_positive_N(N);
    return std::exp(-(params.a1 * state.I + params.a2 * state.U) / N);
}

Eigen::Vector3d rhs_reduced(const CoreState& state, const ModelParams& params) {
    const double S = state.S, I = state.I, U = state.U;
    const double N = S + I + U;
    require_positive_N(N);
    const double th = std::exp(-(params.a1 * I + params.a2 * U) / N);
    const double bh = params.beta_hat();
    const double P = params.T_total - N;

    Eigen::Vector3d f;
    f[0] = th * P - params.beta * S * I / N - params.mu * S + params.gamma * U;
    f[1] = (params.beta * S + bh * U) * I / N - (params.mu + params.tau) * I;
    f[2] = params.tau * I - bh * U * I / N - (params.mu + params.gamma) * U;
    return f;
}

Eigen::Vector4d rhs_full(const FullState& state, const ModelParams& params) {
    const double P = state.P, S = state.S, I = state.I, U = state.U;
    const double N = S + I + U;
    require_positive_N(N);
    const double th = std::exp(-(params.a1 * I + params.a2 * U) / N);
    const double bh = params.beta_hat();

    Eigen::Vector4d f;
    f[0] = params.b * (P + S) + params.b_hat * (I + U) - (th + params.mu) * P;
    f[1] = th * P - params.beta * S * I / N - params.mu * S + params.gamma * U;
    f[2] = (params.beta * S + bh * U) * I / N - (params.mu + params.tau) * I;
    f[3] = params.tau * I - bh * U * I / N - (params.mu + params.gamma) * U;
    return f;
}

Eigen::Matrix3d jacobian_analytic(const CoreState& state, const ModelParams& params) {
    const double S = state.S, I = state.I, U = state.U;
    const double N = S + I + U;
    require_positive_N(N);
    const double N2 = N * N;
    const double beta = params.beta, bh = params.beta_hat();
    const double E = params.a1 * I + params.a2 * U;
    const double th = std::exp(-E / N);
    const double P = params.T_total - N;

    // theta gradients, including the N-dependence of the exponent
    const double th_S = th * E / N2;
    const double th_I = th * (E - params.a1 * N) / N2;
    const double th_U = th * (E - params.a2 * N) / N2;

    const double mass = beta * S + bh * U;

    Eigen::Matrix3d J;
    J(0, 0) = th_S * P - th - beta * I * (N - S) / N2 - params.mu;
    J(0, 1) = th_I * P - th - beta * S * (N - I) / N2;
    J(0, 2) = th_U * P - th + beta * S * I / N2 + params.gamma;

    J(1, 0) = I * (beta * N - mass) / N2;
    J(1, 1) = mass * (N - I) / N2 - (params.mu + params.tau);
    J(1, 2) = I * (bh * N - mass) / N2;

    J(2, 0) = bh * U * I / N2;
    J(2, 1) = params.tau - bh * U * (N - I) / N2;
    J(2, 2) = -bh * I * (N - U) / N2 - (params.mu + params.gamma);
    return J;
}

Eigen::Matrix3d jacobian_fd(const CoreState& state, const ModelParams& params, double step) {
    auto f = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return rhs_reduced(CoreState{x[0], x[1], x[2]}, params);
    };
    Eigen::MatrixXd J = jacobian_fd(f, state.vec(), step);
    return J;
}

Eigen::MatrixXd jacobian_fd(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
                            const Eigen::VectorXd& x, double step) {
    const Eigen::Index n = x.size();
    const Eigen::Index m = f(x).size();
    Eigen::MatrixXd J(m, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        const double h = step * (1.0 + std::abs(x[j]));
        Eigen::VectorXd xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        J.col(j) = (f(xp) - f(xm)) / (2.0 * h);
    }
    return J;
}

}  // namespace epibif
