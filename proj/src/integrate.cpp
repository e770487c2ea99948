#include "epibif/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epibif {

namespace {

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
// y5 - y4 error weights
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense-output weights for the 4th-order continuous extension
constexpr double d1 = -12715105075.0 / 11282082432.0;
constexpr double d3 = 87487479700.0 / 32700410799.0;
constexpr double d4 = -10690763975.0 / 1880347072.0;
constexpr double d5 = 701980252875.0 / 199316789632.0;
constexpr double d6 = -1453857185.0 / 822651844.0;
constexpr double d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9, kFacMin = 0.2, kFacMax = 10.0;

}  // namespace

Dopri5::Dopri5(RhsFn rhs, IntegratorOptions opts) : rhs_(std::move(rhs)), opts_(opts) {
    if (!(opts_.rel_tol > 0.0) || !(opts_.abs_tol > 0.0))
        throw DomainError("integrator tolerances must be positive");
}

Eigen::VectorXd Dopri5::eval(double t, const Eigen::VectorXd& y) const {
    Eigen::VectorXd f = rhs_(t, y);
    if (!f.allFinite()) throw DomainError("vector field returned a non-finite value");
    return f;
}

bool Dopri5::state_ok(const Eigen::VectorXd& y) const {
    if (!y.allFinite()) return false;
    if (opts_.nonneg_guard && y.minCoeff() < -opts_.guard_factor * opts_.abs_tol) return false;
    return true;
}

void Dopri5::init(double t0, const Eigen::VectorXd& y0) {
    t_ = t_prev_ = t0;
    y_ = y_prev_ = y0;
    k1_ = eval(t0, y0);
    rcont_.resize(y0.size(), 5);
    have_k1_ = true;
    h_ = opts_.h_init;
    n_accepted_ = n_rejected_ = 0;
}

double Dopri5::initial_step(double t0, double t_end) const {
    const double span = t_end - t0;
    Eigen::VectorXd sc =
        (opts_.abs_tol + opts_.rel_tol * y_.cwiseAbs().array()).matrix();
    const double d0 = std::sqrt((y_.array() / sc.array()).square().mean());
    const double dd1 = std::sqrt((k1_.array() / sc.array()).square().mean());
    double h0 = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / dd1;
    h0 = std::min(h0, span);
    double d2 = 0.0;
    try {
        Eigen::VectorXd y1 = y_ + h0 * k1_;
        Eigen::VectorXd f1 = rhs_(t0 + h0, y1);
        d2 = std::sqrt(((f1 - k1_).array() / sc.array()).square().mean()) / h0;
    } catch (const Error&) {
        d2 = 0.0;  // probe left the domain; fall back to h0
    }
    const double dmax = std::max(dd1, d2);
    double h1 = dmax > 1e-15 ? std::pow(0.01 / dmax, 0.2) : std::max(1e-6 * span, h0 * 1e-3);
    return std::min({100.0 * h0, h1, span});
}

bool Dopri5::step(double t_end) {
    if (!have_k1_) throw Error("Dopri5::step before init");
    if (t_ >= t_end) return false;

    const double span = t_end - t_;
    const double hmax = opts_.h_max > 0.0 ? opts_.h_max : span;
    if (h_ <= 0.0) h_ = initial_step(t_, t_end);
    h_ = std::min(h_, hmax);

    const double tiny = 16.0 * std::numeric_limits<double>::epsilon() *
                        std::max(std::abs(t_), std::abs(t_end));
    const Eigen::Index n = y_.size();
    Eigen::VectorXd k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y_new(n), err(n);
    bool rejected_before = false;

    for (long attempt = 0;; ++attempt) {
        if (n_accepted_ + n_rejected_ > opts_.max_steps)
            throw Error("integrator exceeded the step budget");
        double h = h_;
        if (t_ + 1.01 * h >= t_end) h = t_end - t_;
        if (h <= tiny)
            throw StepSizeUnderflow("step size underflow at t = " + std::to_string(t_));

        bool domain_failure = false;
        double err_norm = 0.0;
        try {
            k2 = eval(t_ + c2 * h, y_ + h * (a21 * k1_));
            k3 = eval(t_ + c3 * h, y_ + h * (a31 * k1_ + a32 * k2));
            k4 = eval(t_ + c4 * h, y_ + h * (a41 * k1_ + a42 * k2 + a43 * k3));
            k5 = eval(t_ + c5 * h, y_ + h * (a51 * k1_ + a52 * k2 + a53 * k3 + a54 * k4));
            k6 = eval(t_ + h, y_ + h * (a61 * k1_ + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
            y_new = y_ + h * (a71 * k1_ + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
            k7 = eval(t_ + h, y_new);

            err = h * (e1 * k1_ + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
            Eigen::ArrayXd sc = opts_.abs_tol +
                                opts_.rel_tol * y_.cwiseAbs().cwiseMax(y_new.cwiseAbs()).array();
            err_norm = std::sqrt((err.array() / sc).square().mean());
            if (!std::isfinite(err_norm)) domain_failure = true;
            if (!state_ok(y_new)) domain_failure = true;
        } catch (const DomainError&) {
            domain_failure = true;
        }

        if (domain_failure) {
            ++n_rejected_;
            rejected_before = true;
            h_ = 0.5 * h;
            if (h_ <= tiny)
                throw DomainError("step drives the state out of the domain at t = " +
                                  std::to_string(t_) + " and cannot be retried");
            continue;
        }

        if (err_norm <= 1.0) {
            // accept; build dense-output coefficients on [t_, t_ + h]
            t_prev_ = t_;
            y_prev_ = y_;
            const Eigen::VectorXd ydiff = y_new - y_;
            const Eigen::VectorXd bspl = h * k1_ - ydiff;
            rcont_.col(0) = y_;
            rcont_.col(1) = ydiff;
            rcont_.col(2) = bspl;
            rcont_.col(3) = ydiff - h * k7 - bspl;
            rcont_.col(4) = h * (d1 * k1_ + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

            t_ += h;
            y_ = y_new;
            k1_ = k7;  // FSAL
            ++n_accepted_;

            double fac = kSafety * std::pow(err_norm > 0.0 ? 1.0 / err_norm : 1e10, 0.2);
            fac = std::clamp(fac, kFacMin, rejected_before ? 1.0 : kFacMax);
            h_ = std::min(h * fac, hmax);
            return true;
        }

        ++n_rejected_;
        rejected_before = true;
        const double fac = std::max(kFacMin, kSafety * std::pow(1.0 / err_norm, 0.2));
        h_ = h * fac;
    }
}

Eigen::VectorXd Dopri5::dense(double t) const {
    const double h = t_ - t_prev_;
    if (h == 0.0) return y_;
    const double th = (t - t_prev_) / h;
    const double th1 = 1.0 - th;
    return rcont_.col(0) +
           th * (rcont_.col(1) +
                 th1 * (rcont_.col(2) + th * (rcont_.col(3) + th1 * rcont_.col(4))));
}

Trajectory integrate(const RhsFn& rhs, const Eigen::VectorXd& x0,
                     std::pair<double, double> t_span, const IntegratorOptions& opts,
                     const std::function<bool(const Dopri5&)>& sink) {
    const auto [t0, t1] = t_span;
    if (!std::isfinite(t0) || !std::isfinite(t1) || t1 < t0)
        throw DomainError("t_span must be finite with t1 >= t0");

    Trajectory traj;
    traj.times.push_back(t0);
    traj.states.push_back(x0);
    if (t1 == t0) return traj;

    Dopri5 stepper(rhs, opts);
    stepper.init(t0, x0);
    while (stepper.step(t1)) {
        traj.times.push_back(stepper.t_curr());
        traj.states.push_back(stepper.y_curr());
        if (sink && !sink(stepper)) {
            traj.status = Trajectory::Status::StoppedAtEvent;
            break;
        }
    }
    traj.n_accepted = stepper.n_accepted();
    traj.n_rejected = stepper.n_rejected();
    return traj;
}

IntegratorOptions model_integrator_defaults(const ModelParams& params) {
    IntegratorOptions opts;
    opts.rel_tol = 1e-10;
    opts.abs_tol = 1e-12 * params.T_total;
    opts.nonneg_guard = true;
    return opts;
}

Trajectory integrate_reduced(const ModelParams& params, const CoreState& x0,
                             std::pair<double, double> t_span, IntegratorOptions opts) {
    auto rhs = [params](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return rhs_reduced(CoreState{y[0], y[1], y[2]}, params);
    };
    return integrate(rhs, x0.vec(), t_span, opts);
}

Trajectory integrate_full(const ModelParams& params, const FullState& x0,
                          std::pair<double, double> t_span, IntegratorOptions opts) {
    auto rhs = [params](double, const Eigen::VectorXd& y) -> Eigen::VectorXd {
        return rhs_full(FullState{y[0], y[1], y[2], y[3]}, params);
    };
    return integrate(rhs, x0.vec(), t_span, opts);
}

SectionSpec SectionSpec::make(const Eigen::Vector3d& normal, const Eigen::Vector3d& anchor,
                              CrossingDirection dir) {
    const double n = normal.norm();
    if (!(n > 0.0)) throw DomainError("section normal must be nonzero");
    return SectionSpec{normal / n, anchor, dir};
}

namespace detail {

// Scan the stepper's last accepted interval for section crossings. The
// dense output is sampled on a fixed sub-grid so that a double crossing
// within one step is still caught.
std::vector<SectionCrossing> crossings_in_step(const Dopri5& st, const RhsFn& rhs,
                                               const SectionSpec& section, double t_skip,
                                               double time_tol) {
    std::vector<SectionCrossing> found;
    constexpr int kSamples = 8;
    const double ta = st.t_prev(), tb = st.t_curr();
    if (tb <= t_skip) return found;

    auto g = [&](double t) {
        return section.offset(Eigen::Vector3d(st.dense(t).head<3>()));
    };

    const double base = std::max(ta, t_skip);
    double t_lo = base;
    double g_lo = g(t_lo);
    for (int i = 1; i <= kSamples; ++i) {
        const double t_hi = base + (tb - base) * (static_cast<double>(i) / kSamples);
        const double g_hi = g(t_hi);
        if ((g_lo < 0.0 && g_hi >= 0.0) || (g_lo > 0.0 && g_hi <= 0.0)) {
            const bool upward = g_lo < 0.0;
            if (section.direction == CrossingDirection::Both ||
                (section.direction == CrossingDirection::Positive && upward) ||
                (section.direction == CrossingDirection::Negative && !upward)) {
                double lo = t_lo, hi = t_hi, glo = g_lo, ghi = g_hi;
                while (hi - lo > time_tol) {
                    const double mid = 0.5 * (lo + hi);
                    const double gm = g(mid);
                    if ((glo < 0.0) == (gm < 0.0)) {
                        lo = mid;
                        glo = gm;
                    } else {
                        hi = mid;
                        ghi = gm;
                    }
                }
                // secant polish drives the section offset to roundoff level
                double tr = glo != ghi ? lo - glo * (hi - lo) / (ghi - glo) : 0.5 * (lo + hi);
                for (int k = 0; k < 3; ++k) {
                    tr = std::clamp(tr, ta, tb);
                    const double gr = g(tr);
                    const double slope = (ghi - glo) / (hi - lo);
                    if (gr == 0.0 || slope == 0.0) break;
                    tr -= gr / slope;
                }
                tr = std::clamp(tr, ta, tb);

                SectionCrossing c;
                c.t = tr;
                c.state = st.dense(c.t).head<3>();
                Eigen::VectorXd fx = rhs(c.t, Eigen::VectorXd(c.state));
                c.flow_dot_normal = section.normal.dot(Eigen::Vector3d(fx.head<3>()));
                c.tangency_warning = std::abs(c.flow_dot_normal) < 1e-8;
                found.push_back(c);
            }
        }
        t_lo = t_hi;
        g_lo = g_hi;
    }
    return found;
}

}  // namespace detail

std::vector<SectionCrossing> section_crossings(const RhsFn& rhs, const Eigen::Vector3d& x0,
                                               const SectionSpec& section, double t_max,
                                               int max_crossings,
                                               const IntegratorOptions& opts) {
    if (!(t_max > 0.0)) throw DomainError("section_crossings requires t_max > 0");
    const double time_tol = 1e-10 * t_max;

    std::vector<SectionCrossing> out;
    auto sink = [&](const Dopri5& st) {
        auto cs = detail::crossings_in_step(st, rhs, section, -1e300, time_tol);
        for (auto& c : cs) {
            out.push_back(c);
            if (static_cast<int>(out.size()) >= max_crossings) return false;
        }
        return true;
    };
    integrate(rhs, x0, {0.0, t_max}, opts, sink);
    if (out.empty())
        throw NoCrossing("no section crossing before t = " + std::to_string(t_max));
    return out;
}

}  // namespace epibif
