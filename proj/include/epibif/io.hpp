#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "epibif/bifurcation.hpp"
#include "epibif/cycles.hpp"
#include "epibif/equilibria.hpp"
#include "epibif/integrate.hpp"
#include "epibif/normal_form.hpp"

namespace epibif::io {

inline constexpr int kSchemaVersion = 1;

/// Parse the parameter JSON object {a1, a2, beta, eta, gamma, mu, tau,
/// T_total[, b, b_hat]}. b/b_hat default to mu (the reduced-system
/// condition). Missing/non-numeric fields raise DomainError.
ModelParams params_from_json(const nlohmann::json& j);
ModelParams params_from_file(const std::string& path);
nlohmann::json params_to_json(const ModelParams& p);

/// Format one double with 12 significant digits (CSV convention).
std::string csv_num(double v);

/// Header t,S,I,U[,P][,event]; 12 significant digits, one row per accepted
/// step. The event column appears only when event rows are present.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, bool full_state);
void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                          const std::vector<SectionCrossing>& events);

/// Header param,R0,dfe_class,S1,I1,U1,re_l1,im_l1,re_l2,im_l2,re_l3,im_l3,
/// e1_class,d0_sign; absent endemic fields are empty cells.
void write_branch_csv(std::ostream& os, const std::vector<BranchRow>& rows);

nlohmann::json equilibria_report(const ModelParams& params, const EquilibriumOptions& opts = {});
nlohmann::json transcritical_report_json(const TranscriticalReport& rep, SweepParam p);
nlohmann::json hopf_report_json(const HopfResult& res, SweepParam p);
nlohmann::json cycle_report_json(const CycleResult& res, const SectionSpec& section);
nlohmann::json homoclinic_table_json(const HomoclinicTable& table, const std::string& param);
nlohmann::json tbt_report_json(const TbtLocation& loc);
nlohmann::json normal_form_report_json(const TbtReport& rep);

}  // namespace epibif::io
