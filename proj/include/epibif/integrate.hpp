#pragma once

#include <Eigen/Dense>
#include <functional>
#include <utility>
#include <vector>

#include "epibif/errors.hpp"
#include "epibif/model.hpp"

namespace epibif {

using RhsFn = std::function<Eigen::VectorXd(double, const Eigen::VectorXd&)>;

struct IntegratorOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-12;
    double h_init = 0.0;   // 0: choose automatically
    double h_max = 0.0;    // 0: span length
    long max_steps = 50'000'000;
    // Reject steps that drive any coordinate below -guard_factor*abs_tol.
    // Off by default; model integrations switch it on (the biological
    // octant is invariant, benchmark systems are not restricted).
    bool nonneg_guard = false;
    double guard_factor = 100.0;
};

struct Trajectory {
    enum class Status { Completed, StoppedAtEvent };

    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    long n_accepted = 0;
    long n_rejected = 0;
    Status status = Status::Completed;
};

/// Dormand-Prince 5(4) stepper with the classic free 4th-order dense output.
/// Errors surface as exceptions: StepSizeUnderflow when adaptivity stalls,
/// DomainError when the vector field rejects every retried step.
class Dopri5 {
public:
    Dopri5(RhsFn rhs, IntegratorOptions opts);

    void init(double t0, const Eigen::VectorXd& y0);

    /// Advance one accepted step, capped at t_end. Returns false once
    /// t == t_end and no further step is possible.
    bool step(double t_end);

    double t_prev() const { return t_prev_; }
    double t_curr() const { return t_; }
    const Eigen::VectorXd& y_prev() const { return y_prev_; }
    const Eigen::VectorXd& y_curr() const { return y_; }
    const Eigen::VectorXd& f_curr() const { return k1_; }

    /// Dense evaluation on the last accepted interval [t_prev, t_curr].
    Eigen::VectorXd dense(double t) const;

    long n_accepted() const { return n_accepted_; }
    long n_rejected() const { return n_rejected_; }

private:
    Eigen::VectorXd eval(double t, const Eigen::VectorXd& y) const;
    double initial_step(double t0, double t_end) const;
    bool state_ok(const Eigen::VectorXd& y) const;

    RhsFn rhs_;
    IntegratorOptions opts_;
    double t_ = 0.0, t_prev_ = 0.0, h_ = 0.0;
    Eigen::VectorXd y_, y_prev_, k1_;
    Eigen::MatrixXd rcont_;  // 5 dense-output columns
    long n_accepted_ = 0, n_rejected_ = 0;
    bool have_k1_ = false;
};

/// Integrate over t_span, recording every accepted step. An optional sink
/// sees the stepper after each accepted step (dense output valid), so
/// callers can stream rows or locate events without storing segments.
Trajectory integrate(const RhsFn& rhs, const Eigen::VectorXd& x0,
                     std::pair<double, double> t_span,
                     const IntegratorOptions& opts = {},
                     const std::function<bool(const Dopri5&)>& sink = nullptr);

/// rel 1e-10 / abs 1e-12*T_total, octant guard on. Homoclinic-adjacent
/// orbits loiter near the saddle; loose tolerances produce spurious escapes.
IntegratorOptions model_integrator_defaults(const ModelParams& params);

Trajectory integrate_reduced(const ModelParams& params, const CoreState& x0,
                             std::pair<double, double> t_span, IntegratorOptions opts);
inline Trajectory integrate_reduced(const ModelParams& params, const CoreState& x0,
                                    std::pair<double, double> t_span) {
    return integrate_reduced(params, x0, t_span, model_integrator_defaults(params));
}

Trajectory integrate_full(const ModelParams& params, const FullState& x0,
                          std::pair<double, double> t_span, IntegratorOptions opts);
inline Trajectory integrate_full(const ModelParams& params, const FullState& x0,
                                 std::pair<double, double> t_span) {
    return integrate_full(params, x0, t_span, model_integrator_defaults(params));
}

enum class CrossingDirection { Positive, Negative, Both };

struct SectionSpec {
    Eigen::Vector3d normal{0, 1, 0};
    Eigen::Vector3d anchor{0, 0, 0};
    CrossingDirection direction = CrossingDirection::Positive;

    /// Normalizes the normal; throws DomainError on a zero vector.
    static SectionSpec make(const Eigen::Vector3d& normal, const Eigen::Vector3d& anchor,
                            CrossingDirection dir = CrossingDirection::Positive);

    double offset(const Eigen::Vector3d& x) const { return normal.dot(x - anchor); }
};

struct SectionCrossing {
    double t = 0.0;
    Eigen::Vector3d state;
    double flow_dot_normal = 0.0;
    bool tangency_warning = false;  // |flow.normal| < 1e-8 at the crossing
};

/// First max_crossings direction-matching crossings before t_max, located
/// by root finding on the dense output (time tolerance 1e-10*t_max).
/// Throws NoCrossing when none is found.
std::vector<SectionCrossing> section_crossings(const RhsFn& rhs, const Eigen::Vector3d& x0,
                                               const SectionSpec& section, double t_max,
                                               int max_crossings,
                                               const IntegratorOptions& opts = {});

namespace detail {
// Crossing scan over the stepper's last accepted interval (shared with the
// return-map machinery).
std::vector<SectionCrossing> crossings_in_step(const Dopri5& st, const RhsFn& rhs,
                                               const SectionSpec& section, double t_skip,
                                               double time_tol);
}  // namespace detail

}  // namespace epibif
