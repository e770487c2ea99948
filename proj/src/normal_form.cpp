#include "epibif/normal_form.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace epibif {

namespace {

void fix_sign(Eigen::Vector3d& v) {
    for (int i = 0; i < 3; ++i) {
        if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

}  // namespace

JordanChains jordan_chains(const Eigen::Matrix3d& A, double lambda0) {
    if (lambda0 == 0.0) throw StructureError("jordan_chains: lambda0 must be nonzero");
    const double scale = std::max(A.cwiseAbs().maxCoeff(), std::abs(lambda0));
    const double tol = 1e-8 * scale;

    const EigenTriple eigs = eigenvalues_3x3(A);
    int near_l0 = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
        const double d = std::abs(eigs[i] - std::complex<double>(lambda0));
        if (d < best) {
            best = d;
            near_l0 = i;
        }
    }
    if (best > tol)
        throw StructureError("jordan_chains: no eigenvalue near lambda0");
    for (int i = 0; i < 3; ++i) {
        if (i == near_l0) continue;
        if (std::abs(eigs[i]) > tol)
            throw StructureError("jordan_chains: spectrum is not {0, 0, lambda0}");
    }

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d sv = svd.singularValues();
    if (sv[1] <= 1e-10 * std::max(sv[0], 1e-300))
        throw StructureError("jordan_chains: zero eigenvalue is semisimple (kernel dimension 2)");

    Eigen::Vector3d q0 = svd.matrixV().col(2);
    fix_sign(q0);
    Eigen::Vector3d p_hat = svd.matrixU().col(2);  // kernel of A^T

    // bordered system for q1: A q1 + s p_hat = q0, q0 . q1 = 0
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    M.topLeftCorner<3, 3>() = A;
    M.topRightCorner<3, 1>() = p_hat;
    M.bottomLeftCorner<1, 3>() = q0.transpose();
    Eigen::Vector4d rhs;
    rhs << q0, 0.0;
    Eigen::FullPivLU<Eigen::Matrix4d> lu(M);
    if (!lu.isInvertible()) throw StructureError("jordan_chains: bordered system singular");
    const Eigen::Vector4d sol = lu.solve(rhs);
    Eigen::Vector3d q1 = sol.head<3>();
    if (std::abs(sol[3]) > 1e-8)
        throw StructureError("jordan_chains: q0 not in range(A), zero eigenvalue semisimple");

    // adjoint chain: A^T p0 + s q0_hat = p1, p_hat . p0 = 0
    Eigen::Vector3d p1 = p_hat;
    Eigen::Matrix4d Mt = Eigen::Matrix4d::Zero();
    Mt.topLeftCorner<3, 3>() = A.transpose();
    Mt.topRightCorner<3, 1>() = svd.matrixV().col(2);
    Mt.bottomLeftCorner<1, 3>() = p_hat.transpose();
    Eigen::Vector4d rhs2;
    rhs2 << p1, 0.0;
    Eigen::FullPivLU<Eigen::Matrix4d> lu2(Mt);
    if (!lu2.isInvertible()) throw StructureError("jordan_chains: adjoint bordered system singular");
    Eigen::Vector3d p0 = lu2.solve(rhs2).head<3>();

    // biorthonormalization: <p1,q1> = <p0,q0> = 1, <p0,q1> = <p1,q0> = 0
    const double g = p1.dot(q1);
    if (std::abs(g) < 1e-14)
        throw StructureError("jordan_chains: degenerate chain normalization");
    p1 /= g;
    p0 /= g;
    p0 -= p0.dot(q1) * p1;

    JordanChains ch;
    ch.q0 = q0;
    ch.q1 = q1;
    ch.p0 = p0;
    ch.p1 = p1;
    ch.lambda0 = lambda0;
    ch.res_Aq0 = (A * q0).norm();
    ch.res_Aq1 = (A * q1 - q0).norm();
    ch.res_Atp1 = (A.transpose() * p1).norm();
    ch.res_Atp0 = (A.transpose() * p0 - p1).norm();
    ch.biorth_error = std::max({std::abs(p0.dot(q0) - 1.0), std::abs(p1.dot(q1) - 1.0),
                                std::abs(p0.dot(q1)), std::abs(p1.dot(q0))});
    return ch;
}

Eigen::Vector3d bilinear_form_B(const Field3& f, const Eigen::Vector3d& x0,
                                const Eigen::Vector3d& u, const Eigen::Vector3d& v, double step) {
    const double nu = u.norm(), nv = v.norm();
    if (nu == 0.0 || nv == 0.0) return Eigen::Vector3d::Zero();
    const Eigen::Vector3d uu = u / nu, vv = v / nv;
    const double h = step * (1.0 + x0.cwiseAbs().maxCoeff());

    const Eigen::Vector3d f0 = f(x0);
    const Eigen::Vector3d dp =
        (f(x0 + h * (uu + vv)) - f(x0 + h * uu) - f(x0 + h * vv) + f0) / (h * h);
    const Eigen::Vector3d dm =
        (f(x0 - h * (uu + vv)) - f(x0 - h * uu) - f(x0 - h * vv) + f0) / (h * h);
    return 0.5 * (dp + dm) * nu * nv;
}

Eigen::Vector3d bilinear_form_B(const CoreState& x0, const ModelParams& params,
                                const Eigen::Vector3d& u, const Eigen::Vector3d& v, double step) {
    auto f = [&params](const Eigen::Vector3d& x) -> Eigen::Vector3d {
        return rhs_reduced(CoreState{x[0], x[1], x[2]}, params);
    };
    return bilinear_form_B(f, x0.vec(), u, v, step);
}

namespace {

struct NfFrame {
    JordanChains chains;
    Eigen::Vector3d qs, ps;  // stable eigenvector and its adjoint, <ps,qs> = 1
};

NfFrame build_frame(const Eigen::Matrix3d& A, double lambda0) {
    NfFrame fr;
    fr.chains = jordan_chains(A, lambda0);

    const Eigen::Matrix3d As = A - lambda0 * Eigen::Matrix3d::Identity();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(As, Eigen::ComputeFullU | Eigen::ComputeFullV);
    fr.qs = svd.matrixV().col(2);
    fix_sign(fr.qs);
    fr.ps = svd.matrixU().col(2);
    const double g = fr.ps.dot(fr.qs);
    if (std::abs(g) < 1e-12)
        throw StructureError("stable eigenvector adjoint normalization degenerate");
    fr.ps /= g;
    return fr;
}

Eigen::Matrix3d homological_matrix(double lambda0) {
    Eigen::Matrix3d L;
    L << lambda0, 0, 0, -1, lambda0, 0, 0, -2, lambda0;
    return L;
}

FitResult fit_oracle_impl(const Field3& f, const Eigen::Vector3d& x0, const NfFrame& fr,
                          double radius, const NormalFormOptions& opts) {
    const JordanChains& ch = fr.chains;
    const double l0 = ch.lambda0;
    const int g = std::max(opts.grid, 3);
    const double r = radius;

    // symmetric grid in w = (w1, w2)
    std::vector<Eigen::Vector2d> ws;
    ws.reserve(g * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j)
            ws.push_back({-r + 2.0 * r * i / (g - 1), -r + 2.0 * r * j / (g - 1)});

    const int n = static_cast<int>(ws.size());
    Eigen::MatrixXd design(n, 3);  // monomials scaled by 1/r^2
    for (int k = 0; k < n; ++k) {
        const double w1 = ws[k][0], w2 = ws[k][1];
        design(k, 0) = w1 * w1 / (r * r);
        design(k, 1) = w1 * w2 / (r * r);
        design(k, 2) = w2 * w2 / (r * r);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> dsvd(design);
    const double cond =
        dsvd.singularValues()(0) / std::max(dsvd.singularValues()(2), 1e-300);
    if (cond > 1e10)
        throw FitIllConditioned("fit design matrix condition " + std::to_string(cond));
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);

    auto fit3 = [&](const Eigen::VectorXd& y) -> Eigen::Vector3d {
        Eigen::Vector3d c = qr.solve(y);
        return c / (r * r);  // undo monomial scaling
    };

    // solve the quadratic graph coefficients h = (H11, H12, H22) by
    // fixed-point iteration on the homological (graph) condition
    const Eigen::Matrix3d M =
        Eigen::Vector3d(0.5, 1.0, 0.5).asDiagonal() * homological_matrix(l0);
    const Eigen::Matrix3d Minv = M.inverse();

    Eigen::Vector3d h = Eigen::Vector3d::Zero();
    Eigen::VectorXd w1dot(n), w2dot(n), zres(n);
    int used_iters = 0;
    for (int it = 0; it < 25; ++it) {
        for (int k = 0; k < n; ++k) {
            const double w1 = ws[k][0], w2 = ws[k][1];
            const double H = 0.5 * (h[0] * w1 * w1 + 2.0 * h[1] * w1 * w2 + h[2] * w2 * w2);
            const Eigen::Vector3d x = x0 + w1 * ch.q0 + w2 * ch.q1 + H * fr.qs;
            const Eigen::Vector3d fv = f(x);
            w1dot[k] = ch.p0.dot(fv);
            w2dot[k] = ch.p1.dot(fv);
            const double dH_w1 = h[0] * w1 + h[1] * w2;
            const double dH_w2 = h[1] * w1 + h[2] * w2;
            zres[k] = fr.ps.dot(fv) - (dH_w1 * w1dot[k] + dH_w2 * w2dot[k]);
        }
        const Eigen::Vector3d rho = fit3(zres);
        const Eigen::Vector3d dh = -(Minv * rho);
        h += dh;
        used_iters = it + 1;
        if (dh.norm() <= 1e-12 * (1.0 + h.norm())) break;
    }

    // final pass with the converged manifold
    for (int k = 0; k < n; ++k) {
        const double w1 = ws[k][0], w2 = ws[k][1];
        const double H = 0.5 * (h[0] * w1 * w1 + 2.0 * h[1] * w1 * w2 + h[2] * w2 * w2);
        const Eigen::Vector3d x = x0 + w1 * ch.q0 + w2 * ch.q1 + H * fr.qs;
        const Eigen::Vector3d fv = f(x);
        w1dot[k] = ch.p0.dot(fv) - w2;  // quadratic remainder of w1dot
        w2dot[k] = ch.p1.dot(fv);
    }
    const Eigen::Vector3d m = fit3(w2dot);
    const Eigen::Vector3d nn = fit3(w1dot);

    FitResult res;
    res.a2 = m[0];
    res.b2 = m[1] + 2.0 * nn[0];
    res.h_coeffs = h;
    res.design_cond = cond;
    res.iterations = used_iters;
    return res;
}

TbtReport bt_coeffs_impl(const Field3& f, const Eigen::Vector3d& x0, const NfFrame& fr,
                         const NormalFormOptions& opts, double scale) {
    const JordanChains& ch = fr.chains;
    TbtReport rep;
    rep.chains = ch;

    const Eigen::Vector3d B00 = bilinear_form_B(f, x0, ch.q0, ch.q0, opts.step);
    const Eigen::Vector3d B01 = bilinear_form_B(f, x0, ch.q0, ch.q1, opts.step);
    const Eigen::Vector3d B11 = bilinear_form_B(f, x0, ch.q1, ch.q1, opts.step);

    rep.a2 = 0.5 * ch.p1.dot(B00);
    rep.b2 = ch.p0.dot(B00) + ch.p1.dot(B01);

    // homological equation at quadratic order: L h = -beta
    const Eigen::Vector3d beta(fr.ps.dot(B00), fr.ps.dot(B01), fr.ps.dot(B11));
    const Eigen::Matrix3d L = homological_matrix(ch.lambda0);
    Eigen::JacobiSVD<Eigen::Matrix3d> lsvd(L, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double cond =
        lsvd.singularValues()(0) / std::max(lsvd.singularValues()(2), 1e-300);
    if (cond > 1e12)
        throw IllConditioned("homological solve condition " + std::to_string(cond));
    const Eigen::Vector3d h = lsvd.solve(-beta);
    rep.H1 << h[0], h[1], h[1], h[2];
    rep.homological_residual = (L * h + beta).norm() / (beta.norm() + 1e-300);

    const double radius = opts.radius > 0.0 ? opts.radius : 1e-3 * scale;
    const FitResult fit = fit_oracle_impl(f, x0, fr, radius, opts);
    rep.a2_fit = fit.a2;
    rep.b2_fit = fit.b2;
    const double b_ref = std::max(std::abs(rep.b2_fit), std::abs(rep.b2));
    if (b_ref <= 1e-12) {
        rep.b2_discrepancy = std::abs(rep.b2 - rep.b2_fit);
        rep.fit_agrees = rep.b2_discrepancy <= 1e-12;
    } else {
        rep.b2_discrepancy = std::abs(rep.b2 - rep.b2_fit) / std::abs(rep.b2_fit);
        rep.fit_agrees = rep.b2_discrepancy <= opts.agree_tol;
    }
    rep.a2_zero_threshold = std::max(1e-3 * b_ref, 1e-14);
    rep.a2_is_zero = std::abs(rep.a2) <= rep.a2_zero_threshold;
    return rep;
}

Field3 model_field(const ModelParams& params) {
    return [params](const Eigen::Vector3d& x) -> Eigen::Vector3d {
        return rhs_reduced(CoreState{x[0], x[1], x[2]}, params);
    };
}

}  // namespace

TbtReport bt_quadratic_coeffs(const Field3& f, const Eigen::Vector3d& x0, double lambda0,
                              const NormalFormOptions& opts) {
    auto fx = [&f](const Eigen::VectorXd& x) -> Eigen::VectorXd { return f(x.head<3>()); };
    const Eigen::Matrix3d A = jacobian_fd(fx, Eigen::VectorXd(x0), 1e-6);
    const NfFrame fr = build_frame(A, lambda0);
    return bt_coeffs_impl(f, x0, fr, opts, 1.0 + x0.cwiseAbs().maxCoeff());
}

TbtReport bt_quadratic_coeffs(const ModelParams& params_at_tbt, const NormalFormOptions& opts) {
    const UnfoldingParams delta = unfolding(params_at_tbt);
    if (std::abs(delta.delta1) > 1e-10 || std::abs(delta.delta2) > 1e-10)
        throw StructureError("bt_quadratic_coeffs requires delta1 = delta2 = 0 (use locate_tbt_point)");
    const Equilibrium dfe = disease_free_equilibrium(params_at_tbt);
    const Eigen::Matrix3d A = jacobian_analytic(dfe.coords, params_at_tbt);
    const NfFrame fr = build_frame(A, -(params_at_tbt.mu + 1.0));
    return bt_coeffs_impl(model_field(params_at_tbt), dfe.coords.vec(), fr, opts,
                          params_at_tbt.T_total);
}

FitResult reduced_fit_oracle(const Field3& f, const Eigen::Vector3d& x0,
                             const JordanChains& chains, double radius,
                             const NormalFormOptions& opts) {
    auto fx = [&f](const Eigen::VectorXd& x) -> Eigen::VectorXd { return f(x.head<3>()); };
    const Eigen::Matrix3d A = jacobian_fd(fx, Eigen::VectorXd(x0), 1e-6);
    NfFrame fr;
    fr.chains = chains;
    const Eigen::Matrix3d As = A - chains.lambda0 * Eigen::Matrix3d::Identity();
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(As, Eigen::ComputeFullU | Eigen::ComputeFullV);
    fr.qs = svd.matrixV().col(2);
    fix_sign(fr.qs);
    fr.ps = svd.matrixU().col(2);
    const double g = fr.ps.dot(fr.qs);
    if (std::abs(g) < 1e-12) throw StructureError("stable adjoint normalization degenerate");
    fr.ps /= g;
    return fit_oracle_impl(f, x0, fr, radius, opts);
}

FitResult reduced_fit_oracle(const ModelParams& params_at_tbt, const JordanChains& chains,
                             double radius, const NormalFormOptions& opts) {
    const Equilibrium dfe = disease_free_equilibrium(params_at_tbt);
    const double r = radius > 0.0 ? radius : 1e-3 * params_at_tbt.T_total;
    return reduced_fit_oracle(model_field(params_at_tbt), dfe.coords.vec(), chains, r, opts);
}

}  // namespace epibif
