#include "epibif/bifurcation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SVD>

#include "epibif/normal_form.hpp"

namespace epibif {

UnfoldingParams unfolding(const ModelParams& params) {
    return {r0(params) - 1.0, params.gamma + params.mu};
}

SweepParam sweep_param_from_string(const std::string& name) {
    if (name == "a1") return SweepParam::A1;
    if (name == "a2") return SweepParam::A2;
    if (name == "beta") return SweepParam::Beta;
    if (name == "eta") return SweepParam::Eta;
    if (name == "gamma") return SweepParam::Gamma;
    if (name == "mu") return SweepParam::Mu;
    if (name == "tau") return SweepParam::Tau;
    throw DomainError("unknown sweep parameter '" + name + "'");
}

std::string to_string(SweepParam p) {
    switch (p) {
        case SweepParam::A1: return "a1";
        case SweepParam::A2: return "a2";
        case SweepParam::Beta: return "beta";
        case SweepParam::Eta: return "eta";
        case SweepParam::Gamma: return "gamma";
        case SweepParam::Mu: return "mu";
        case SweepParam::Tau: return "tau";
    }
    return "?";
}

ModelParams with_param(ModelParams params, SweepParam p, double value) {
    switch (p) {
        case SweepParam::A1: params.a1 = value; break;
        case SweepParam::A2: params.a2 = value; break;
        case SweepParam::Beta: params.beta = value; break;
        case SweepParam::Eta: params.eta = value; break;
        case SweepParam::Gamma: params.gamma = value; break;
        case SweepParam::Mu: params.mu = value; break;
        case SweepParam::Tau: params.tau = value; break;
    }
    return params;
}

double get_param(const ModelParams& params, SweepParam p) {
    switch (p) {
        case SweepParam::A1: return params.a1;
        case SweepParam::A2: return params.a2;
        case SweepParam::Beta: return params.beta;
        case SweepParam::Eta: return params.eta;
        case SweepParam::Gamma: return params.gamma;
        case SweepParam::Mu: return params.mu;
        case SweepParam::Tau: return params.tau;
    }
    return 0.0;
}

std::vector<BranchRow> sweep_branch(const ModelParams& params, SweepParam p,
                                    std::span<const double> values) {
    std::vector<BranchRow> rows;
    rows.reserve(values.size());
    for (double v : values) {
        BranchRow row;
        row.value = v;
        try {
            const ModelParams pv = with_param(params, p, v);
            row.R0 = r0(pv);
            row.dfe_class = disease_free_equilibrium(pv).stability;
            if (row.R0 > 1.0) {
                EndemicResult res = endemic_closed_form(pv);
                row.d0_sign = res.constants.D0 >= 0.0 ? 1 : -1;
                if (res.exists) {
                    row.has_endemic = true;
                    row.endemic = res.eq.coords;
                    row.endemic_eigs = res.eq.eigenvalues;
                    row.e1_class = res.eq.stability;
                }
            }
        } catch (const DiscriminantError& e) {
            row.d0_sign = -1;
            row.error = e.what();
        } catch (const Error& e) {
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

namespace {

// bisection for delta1(v) = target, deterministic, 1e-10 relative width
double bisect_delta1(const ModelParams& params, SweepParam p, double lo, double hi,
                     double target) {
    auto f = [&](double v) { return r0(with_param(params, p, v)) - 1.0 - target; };
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0))
        throw NoCrossing("delta1 - " + std::to_string(target) + " does not change sign");
    while (hi - lo > 1e-10 * std::max({std::abs(lo), std::abs(hi), 1e-30})) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm < 0.0) == (flo < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double e1_e0_distance(const ModelParams& params) {
    const EndemicResult res = endemic_closed_form(params);
    if (!res.exists) return std::numeric_limits<double>::quiet_NaN();
    const Equilibrium dfe = disease_free_equilibrium(params);
    return (res.eq.coords.vec() - dfe.coords.vec()).cwiseAbs().maxCoeff();
}

}  // namespace

TranscriticalReport detect_transcritical(const ModelParams& params, SweepParam p,
                                         const std::vector<BranchRow>& rows) {
    // locate a bracketing pair of valid rows
    int lo_idx = -1;
    for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
        if (!rows[i].error.empty() || !rows[i + 1].error.empty()) continue;
        const double d0 = rows[i].R0 - 1.0;
        const double d1 = rows[i + 1].R0 - 1.0;
        if (d0 == 0.0 || (d0 < 0.0) != (d1 < 0.0)) {
            lo_idx = static_cast<int>(i);
            break;
        }
    }
    if (lo_idx < 0) throw NoCrossing("sweep does not bracket R0 = 1");

    TranscriticalReport rep;
    rep.bracket_lo = rows[lo_idx].value;
    rep.bracket_hi = rows[lo_idx + 1].value;
    rep.critical_value = bisect_delta1(params, p, rep.bracket_lo, rep.bracket_hi, 0.0);

    // branch continuity on the endemic side
    const bool hi_side_positive = rows[lo_idx + 1].R0 > rows[lo_idx].R0;
    const double endemic_end = hi_side_positive ? rep.bracket_hi : rep.bracket_lo;
    auto dist_at = [&](double delta1_target) {
        const double dmax = r0(with_param(params, p, endemic_end)) - 1.0;
        if (dmax < delta1_target) return std::numeric_limits<double>::quiet_NaN();
        const double v =
            bisect_delta1(params, p, std::min(rep.critical_value, endemic_end),
                          std::max(rep.critical_value, endemic_end), delta1_target);
        return e1_e0_distance(with_param(params, p, v));
    };
    rep.e1_e0_dist_1e2 = dist_at(1e-2);
    rep.e1_e0_dist_1e3 = dist_at(1e-3);
    rep.e1_e0_dist_1e4 = dist_at(1e-4);
    rep.continuity_ok = std::isfinite(rep.e1_e0_dist_1e4) &&
                        rep.e1_e0_dist_1e4 <= 1e-2 * params.T_total &&
                        (!std::isfinite(rep.e1_e0_dist_1e3) ||
                         (rep.e1_e0_dist_1e4 < rep.e1_e0_dist_1e3 &&
                          (!std::isfinite(rep.e1_e0_dist_1e2) ||
                           rep.e1_e0_dist_1e3 < rep.e1_e0_dist_1e2)));
    return rep;
}

namespace {

struct PairEval {
    bool endemic_exists = false;
    bool has_pair = false;
    double max_re = 0.0;
    std::complex<double> pair{0, 0};  // +i omega member
    EigenTriple eigs{};
    Equilibrium eq;
};

PairEval eval_pair(const ModelParams& params) {
    PairEval ev;
    EndemicResult res = endemic_closed_form(params);
    if (!res.exists) return ev;
    ev.endemic_exists = true;
    ev.eq = res.eq;
    ev.eigs = res.eq.eigenvalues;
    for (const auto& l : ev.eigs) {
        if (l.imag() > 0.0) {
            ev.has_pair = true;
            ev.pair = l;
            ev.max_re = l.real();
        }
    }
    return ev;
}

// minimal-distance matching cost between consecutive eigenvalue triples
double match_cost(const EigenTriple& a, const EigenTriple& b) {
    double best = std::numeric_limits<double>::infinity();
    int idx[3] = {0, 1, 2};
    std::sort(idx, idx + 3);
    do {
        double c = 0.0;
        for (int i = 0; i < 3; ++i) c += std::abs(a[i] - b[idx[i]]);
        best = std::min(best, c);
    } while (std::next_permutation(idx, idx + 3));
    return best;
}

}  // namespace

HopfResult find_hopf(const ModelParams& params, SweepParam p, double lo, double hi, double tol) {
    HopfResult out;
    PairEval elo = eval_pair(with_param(params, p, lo));
    PairEval ehi = eval_pair(with_param(params, p, hi));
    if (!elo.endemic_exists || !ehi.endemic_exists) {
        out.reason = "no-endemic-in-bracket";
        return out;
    }
    if (!elo.has_pair && !ehi.has_pair) {
        out.reason = "pair-degenerate";
        return out;
    }
    if (!elo.has_pair || !ehi.has_pair) {
        // the pair collapses somewhere inside; a Hopf sign change is not
        // well-defined across the collapse
        throw PairLost("complex pair exists at only one bracket end [" + std::to_string(lo) +
                       ", " + std::to_string(hi) + "]");
    }
    if ((elo.max_re < 0.0) == (ehi.max_re < 0.0)) {
        out.reason = "constant-sign";
        return out;
    }

    EigenTriple prev = elo.eigs;
    double a = lo, b = hi;
    double m_a = elo.max_re;
    while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        if (mid == a || mid == b) break;
        PairEval em = eval_pair(with_param(params, p, mid));
        if (!em.endemic_exists) {
            out.reason = "no-endemic-in-bracket";
            return out;
        }
        if (!em.has_pair)
            throw PairLost("complex pair degenerated to real eigenvalues inside [" +
                           std::to_string(a) + ", " + std::to_string(b) + "]");
        (void)match_cost(prev, em.eigs);  // continuity bookkeeping
        prev = em.eigs;
        if ((em.max_re < 0.0) == (m_a < 0.0)) {
            a = mid;
            m_a = em.max_re;
        } else {
            b = mid;
        }
    }

    const double crit = 0.5 * (a + b);
    PairEval ec = eval_pair(with_param(params, p, crit));
    if (!ec.has_pair) ec = eval_pair(with_param(params, p, a));

    out.found = true;
    out.point.critical_value = crit;
    out.point.equilibrium = ec.eq;
    out.point.pair = ec.pair;
    out.point.omega = ec.pair.imag();
    out.point.bracket_width = b - a;
    return out;
}

TbtLocation locate_tbt_point(const ModelParams& params) {
    if (params.tau == 0.0)
        throw DegenerateError(
            "tau = 0: the zero eigenvalue is semisimple, no Jordan block at the tBT point");

    TbtLocation loc;
    loc.params = params;
    loc.params.gamma = 0.0;
    loc.params.mu = 0.0;
    loc.params.beta = params.tau;
    loc.params.b = loc.params.b_hat = 0.0;  // keep b = b_hat = mu

    TbtDiagnostics& d = loc.diagnostics;
    d.warnings.push_back("delta2 = 0 sits on the boundary of the biological box (gamma = mu = 0)");

    const Equilibrium dfe = disease_free_equilibrium(loc.params);
    d.e0 = dfe.coords;
    d.f_norm = rhs_reduced(d.e0, loc.params).cwiseAbs().maxCoeff();

    const Eigen::Matrix3d A = jacobian_analytic(d.e0, loc.params);
    d.eigenvalues = eigenvalues_3x3(A);
    const EigenTriple expected = sort_eigenvalues(
        {std::complex<double>(0.0), std::complex<double>(0.0), std::complex<double>(-1.0)});
    d.eig_error = 0.0;
    for (int i = 0; i < 3; ++i)
        d.eig_error = std::max(d.eig_error, std::abs(d.eigenvalues[i] - expected[i]));

    const JordanChains chains = jordan_chains(A, -1.0);
    d.chain_residual = chains.max_residual();
    d.biorth_error = chains.biorth_error;
    d.nilpotency = std::max((A * (A * chains.q0)).norm(), (A * (A * chains.q1)).norm());

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(A);
    const Eigen::Vector3d sv = svd.singularValues();
    d.jordan_block = sv[1] > 1e-8 * sv[0] && sv[2] <= 1e-8 * sv[0];
    return loc;
}

}  // namespace epibif
