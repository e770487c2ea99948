#include "epibif/cycles.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "epibif/bifurcation.hpp"

namespace epibif {

std::string to_string(CycleOutcome o) {
    switch (o) {
        case CycleOutcome::Found: return "found";
        case CycleOutcome::ConvergesToEquilibrium: return "converges-to-equilibrium";
        case CycleOutcome::Escaped: return "escaped";
    }
    return "?";
}

namespace {

struct ReturnOutcome {
    std::optional<SectionCrossing> crossing;
    Eigen::Vector3d final_state{0, 0, 0};
    bool escaped = false;
};

class ReturnMap {
public:
    ReturnMap(const RhsFn& rhs, const SectionSpec& section, const CycleSearchSpec& spec,
              const CycleOptions& opts)
        : rhs_(rhs), section_(section), spec_(spec), opts_(opts) {
        time_tol_ = 1e-10 * opts.t_max_per_return;
        // orthonormal in-section basis
        Eigen::Vector3d seed_axis = std::abs(section.normal[0]) < 0.9
                                        ? Eigen::Vector3d(1, 0, 0)
                                        : Eigen::Vector3d(0, 1, 0);
        e1_ = section.normal.cross(seed_axis).normalized();
        e2_ = section.normal.cross(e1_).normalized();
    }

    Eigen::Vector3d project(const Eigen::Vector3d& x) const {
        return x - section_.offset(x) * section_.normal;
    }
    Eigen::Vector2d coords(const Eigen::Vector3d& x) const {
        const Eigen::Vector3d d = x - section_.anchor;
        return {d.dot(e1_), d.dot(e2_)};
    }
    Eigen::Vector3d point(const Eigen::Vector2d& u) const {
        return section_.anchor + u[0] * e1_ + u[1] * e2_;
    }

    /// One pass of the first-return map. Records period and, when asked,
    /// amplitude / saddle-distance diagnostics along the lap.
    ReturnOutcome advance(const Eigen::Vector3d& from, bool collect, double* amplitude,
                          double* min_dist_saddle) {
        ReturnOutcome out;
        double comp_min = from[spec_.amplitude_component];
        double comp_max = comp_min;
        double dmin = (from - spec_.saddle).norm();

        Dopri5 st(rhs_, opts_.integ);
        st.init(0.0, from);
        try {
            while (st.step(opts_.t_max_per_return)) {
                if (collect) {
                    for (int i = 1; i <= 4; ++i) {
                        const double t =
                            st.t_prev() + (st.t_curr() - st.t_prev()) * (i / 4.0);
                        const Eigen::Vector3d x = st.dense(t).head<3>();
                        comp_min = std::min(comp_min, x[spec_.amplitude_component]);
                        comp_max = std::max(comp_max, x[spec_.amplitude_component]);
                        dmin = std::min(dmin, (x - spec_.saddle).norm());
                    }
                }
                if (st.y_curr().cwiseAbs().maxCoeff() > 100.0 * (spec_.scale + 1.0)) {
                    out.escaped = true;
                    out.final_state = st.y_curr().head<3>();
                    return out;
                }
                auto cs = detail::crossings_in_step(st, rhs_, section_, 0.0, time_tol_);
                if (!cs.empty()) {
                    out.crossing = cs.front();
                    out.final_state = cs.front().state;
                    if (amplitude) *amplitude = comp_max - comp_min;
                    if (min_dist_saddle) *min_dist_saddle = dmin;
                    return out;
                }
            }
            out.final_state = st.y_curr().head<3>();
        } catch (const DomainError&) {
            out.escaped = true;
            out.final_state = st.y_curr().head<3>();
        } catch (const StepSizeUnderflow&) {
            out.escaped = true;
            out.final_state = st.y_curr().head<3>();
        }
        return out;
    }

private:
    const RhsFn& rhs_;
    SectionSpec section_;
    CycleSearchSpec spec_;
    CycleOptions opts_;
    double time_tol_ = 0.0;
    Eigen::Vector3d e1_, e2_;
};

}  // namespace

CycleResult find_limit_cycle(const RhsFn& rhs, const SectionSpec& section,
                             const Eigen::Vector3d& seed, const CycleSearchSpec& spec,
                             const CycleOptions& opts) {
    const double scale = spec.scale;
    const double tol = opts.tol > 0.0 ? opts.tol : 1e-8 * scale;
    const double closure_tol = opts.closure_tol > 0.0 ? opts.closure_tol : 1e-6 * scale;
    const double eq_radius = opts.equilibrium_radius * scale;

    ReturnMap map(rhs, section, spec, opts);
    CycleResult res;

    auto no_cycle = [&](CycleOutcome outcome, const std::string& why) {
        res.outcome = outcome;
        res.reason = why;
        return res;
    };

    std::vector<Eigen::Vector3d> returns;
    returns.push_back(map.project(seed));
    bool converged = false;

    for (int k = 0; k < opts.max_returns; ++k) {
        ReturnOutcome step = map.advance(returns.back(), false, nullptr, nullptr);
        if (step.escaped)
            return no_cycle(CycleOutcome::Escaped, "trajectory left the valid region");
        if (!step.crossing) {
            const double d = (step.final_state - spec.equilibrium).norm();
            if (d < 0.1 * scale)
                return no_cycle(CycleOutcome::ConvergesToEquilibrium,
                                "no recurrence; trajectory settled near the equilibrium");
            return no_cycle(CycleOutcome::Escaped, "no recurrence before t_max_per_return");
        }

        Eigen::Vector3d next = step.crossing->state;
        const double d = (next - returns.back()).norm();
        res.convergence_history.push_back(d);
        returns.push_back(next);
        res.returns_used = k + 1;

        if (d <= tol) {
            converged = true;
            break;
        }

        // contraction onto the equilibrium: a tightening spiral, no cycle
        const int m = opts.equilibrium_returns;
        if (static_cast<int>(returns.size()) > m) {
            bool spiral = true;
            double prev = std::numeric_limits<double>::infinity();
            for (std::size_t i = returns.size() - m; i < returns.size(); ++i) {
                const double de = (returns[i] - spec.equilibrium).norm();
                if (de > eq_radius || de >= prev) {
                    spiral = false;
                    break;
                }
                prev = de;
            }
            if (spiral)
                return no_cycle(CycleOutcome::ConvergesToEquilibrium,
                                "returns contract onto the equilibrium");
        }

        // Aitken acceleration on three consecutive returns
        if (returns.size() >= 3 && k % 3 == 2) {
            const Eigen::Vector3d &x0 = returns[returns.size() - 3],
                                  &x1 = returns[returns.size() - 2], &x2 = returns.back();
            Eigen::Vector3d acc = x2;
            bool ok = true;
            for (int c = 0; c < 3; ++c) {
                const double den = x2[c] - 2.0 * x1[c] + x0[c];
                if (std::abs(den) < 1e-14 * (std::abs(x2[c]) + 1.0)) continue;
                acc[c] = x2[c] - (x2[c] - x1[c]) * (x2[c] - x1[c]) / den;
                if (!std::isfinite(acc[c])) ok = false;
            }
            if (ok && (acc - x2).norm() < d) returns.back() = map.project(acc);
        }
    }

    if (!converged)
        throw MaxReturnsExceeded("return map did not settle within " +
                                 std::to_string(opts.max_returns) + " returns");

    // secant (Broyden) refinement of R(u) = u in section coordinates
    Eigen::Vector2d u = map.coords(returns.back());
    auto G = [&](const Eigen::Vector2d& v) -> std::optional<Eigen::Vector2d> {
        ReturnOutcome ro = map.advance(map.point(v), false, nullptr, nullptr);
        if (!ro.crossing) return std::nullopt;
        return Eigen::Vector2d(map.coords(ro.crossing->state) - v);
    };

    auto g0 = G(u);
    if (g0) {
        const double h = std::max(1e-7 * scale, 1e-9);
        Eigen::Matrix2d J;
        bool have_J = true;
        for (int c = 0; c < 2 && have_J; ++c) {
            Eigen::Vector2d up = u;
            up[c] += h;
            auto gp = G(up);
            if (!gp) have_J = false;
            else J.col(c) = (*gp - *g0) / h;
        }
        for (int it = 0; it < 20 && have_J; ++it) {
            if (g0->norm() <= 0.01 * tol) break;
            if (std::abs(J.determinant()) < 1e-14) break;
            const Eigen::Vector2d du = J.inverse() * (-*g0);
            const Eigen::Vector2d un = u + du;
            auto gn = G(un);
            if (!gn) break;
            // Broyden rank-1 update
            const Eigen::Vector2d dg = *gn - *g0;
            const double denom = du.squaredNorm();
            if (denom > 0.0) J += (dg - J * du) * du.transpose() / denom;
            u = un;
            g0 = gn;
            if (du.norm() < 1e-13 * (scale + 1.0)) break;
        }
    }

    // final lap from the fixed point: period, amplitude, saddle distance
    const Eigen::Vector3d fp = map.point(u);
    double amplitude = 0.0, dmin = 0.0;
    ReturnOutcome lap = map.advance(fp, true, &amplitude, &dmin);
    if (!lap.crossing)
        throw NoConvergence("refined fixed point lost recurrence");

    res.outcome = CycleOutcome::Found;
    res.fixed_point = fp;
    res.period = lap.crossing->t;
    res.amplitude = amplitude;
    res.min_distance_to_E0 = dmin;
    res.closure_error = (lap.crossing->state - fp).norm();
    if (res.closure_error > closure_tol)
        res.reason = "closure error above tolerance";
    return res;
}

CycleResult find_limit_cycle(const ModelParams& params, const SectionSpec& section,
                             const CoreState& seed, double tol, CycleOptions opts) {
    const EndemicResult endemic = endemic_closed_form(params);
    if (!endemic.exists)
        throw DomainError("find_limit_cycle: no endemic equilibrium (R0 <= 1)");
    CycleSearchSpec spec;
    spec.equilibrium = endemic.eq.coords.vec();
    spec.saddle = disease_free_equilibrium(params).coords.vec();
    spec.amplitude_component = 1;
    spec.scale = params.T_total;
    if (tol > 0.0) opts.tol = tol;
    if (opts.integ.rel_tol == IntegratorOptions{}.rel_tol &&
        opts.integ.abs_tol == IntegratorOptions{}.abs_tol)
        opts.integ = model_integrator_defaults(params);
    auto rhs = [params](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return rhs_reduced(CoreState{y[0], y[1], y[2]}, params);
    };
    return find_limit_cycle(rhs, section, seed.vec(), spec, opts);
}

HomoclinicTable homoclinic_proximity(const ModelParams& params, const std::string& param_name,
                                     const std::vector<double>& values,
                                     const CycleOptions& opts) {
    const SweepParam p = sweep_param_from_string(param_name);
    HomoclinicTable table;
    std::optional<Eigen::Vector3d> warm;

    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        ModelParams pv = with_param(params, p, v);

        EndemicResult endemic;
        try {
            endemic = endemic_closed_form(pv);
        } catch (const Error& e) {
            if (i == 0) throw;
            throw ContinuationBroken("endemic point lost at " + param_name + " = " +
                                     std::to_string(v) + ": " + e.what());
        }
        if (!endemic.exists) {
            table.stop_reason = "no-endemic-equilibrium";
            table.stop_value = v;
            return table;
        }
        const Eigen::Vector3d e1 = endemic.eq.coords.vec();
        const SectionSpec section =
            SectionSpec::make({0, 1, 0}, e1, CrossingDirection::Positive);

        Eigen::Vector3d seed;
        if (warm) {
            seed = *warm;
            seed[1] = e1[1];  // project the previous fixed point onto the new section
        } else {
            seed = e1 + Eigen::Vector3d(0.01 * params.T_total, 0.0, 0.0);
        }

        CycleResult cyc;
        try {
            cyc = find_limit_cycle(pv, section, CoreState::from_vec(seed), -1.0, opts);
        } catch (const Error& e) {
            if (i == 0) throw;
            throw ContinuationBroken("warm start failed at " + param_name + " = " +
                                     std::to_string(v) + ": " + e.what());
        }
        if (cyc.outcome != CycleOutcome::Found) {
            table.stop_reason = to_string(cyc.outcome);
            table.stop_value = v;
            return table;
        }

        if (!table.rows.empty()) {
            if (cyc.period <= table.rows.back().period)
                table.notes.push_back("period not increasing at " + param_name + " = " +
                                      std::to_string(v));
            if (cyc.min_distance_to_E0 >= table.rows.back().min_distance_to_E0)
                table.notes.push_back("distance to E0 not decreasing at " + param_name + " = " +
                                      std::to_string(v));
        }
        table.rows.push_back(
            {v, cyc.period, cyc.min_distance_to_E0, cyc.amplitude, cyc.fixed_point});
        warm = cyc.fixed_point;
    }
    table.completed = true;
    return table;
}

}  // namespace epibif
