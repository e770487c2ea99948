#pragma once

#include <optional>
#include <string>
#include <vector>

#include "epibif/equilibria.hpp"
#include "epibif/integrate.hpp"

namespace epibif {

enum class CycleOutcome { Found, ConvergesToEquilibrium, Escaped };

std::string to_string(CycleOutcome o);

struct CycleResult {
    CycleOutcome outcome = CycleOutcome::Found;
    std::string reason;

    Eigen::Vector3d fixed_point{0, 0, 0};  // on the section
    double period = 0.0;
    double amplitude = 0.0;                // max-minus-min of the chosen component
    double min_distance_to_E0 = 0.0;       // over one period, Euclidean
    double closure_error = 0.0;            // |x(period) - x(0)| re-integration check
    int returns_used = 0;
    std::vector<double> convergence_history;  // successive return distances
};

struct CycleSearchSpec {
    Eigen::Vector3d equilibrium{0, 0, 0};  // cycle-center candidate (E1)
    Eigen::Vector3d saddle{0, 0, 0};       // distance reference (E0)
    int amplitude_component = 1;           // I for the model
    double scale = 1.0;                    // T_total for the model
};

struct CycleOptions {
    double tol = -1.0;          // return-map convergence, default 1e-8*scale
    double closure_tol = -1.0;  // default 1e-6*scale
    int max_returns = 200;
    double t_max_per_return = 1e4;
    // Contraction onto the equilibrium: spiral below this radius (x scale)
    // shrinking for this many successive returns means no cycle.
    double equilibrium_radius = 1e-3;
    int equilibrium_returns = 5;
    IntegratorOptions integ;
};

/// Poincare return-map iteration (Aitken accelerated) followed by a
/// Broyden/secant solve of R(u) = u in section coordinates.
CycleResult find_limit_cycle(const RhsFn& rhs, const SectionSpec& section,
                             const Eigen::Vector3d& seed, const CycleSearchSpec& spec,
                             const CycleOptions& opts = {});

/// Model-level wrapper: section through E1, distances measured to E0.
CycleResult find_limit_cycle(const ModelParams& params, const SectionSpec& section,
                             const CoreState& seed, double tol = -1.0,
                             CycleOptions opts = {});

struct HomoclinicRow {
    double param_value = 0.0;
    double period = 0.0;
    double min_distance_to_E0 = 0.0;
    double amplitude = 0.0;
    Eigen::Vector3d fixed_point{0, 0, 0};
};

struct HomoclinicTable {
    std::vector<HomoclinicRow> rows;
    bool completed = false;       // ran through every ramp value
    std::string stop_reason;      // first NoCycle reason when not completed
    double stop_value = 0.0;
    std::vector<std::string> notes;  // soft-check violations (non-monotone period, ...)
};

/// Continue the cycle along a parameter ramp, warm-starting each section
/// seed from the previous fixed point. Stops at the first NoCycle.
/// Throws ContinuationBroken if integration fails mid-ramp.
HomoclinicTable homoclinic_proximity(const ModelParams& params, const std::string& param_name,
                                     const std::vector<double>& values,
                                     const CycleOptions& opts = {});

}  // namespace epibif
