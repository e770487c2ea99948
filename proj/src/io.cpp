#include "epibif/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>

#include <nlohmann/json.hpp>

namespace epibif::io {

using nlohmann::json;

std::string csv_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

ModelParams params_from_json(const json& j) {
    if (!j.is_object()) throw DomainError("parameter file must hold a JSON object");
    auto need = [&](const char* key) -> double {
        if (!j.contains(key) || !j.at(key).is_number())
            throw DomainError(std::string("parameter '") + key + "' missing or not a number");
        return j.at(key).get<double>();
    };
    ModelParams p;
    p.a1 = need("a1");
    p.a2 = need("a2");
    p.beta = need("beta");
    p.eta = need("eta");
    p.gamma = need("gamma");
    p.mu = need("mu");
    p.tau = need("tau");
    p.T_total = need("T_total");
    p.b = j.contains("b") ? need("b") : p.mu;
    p.b_hat = j.contains("b_hat") ? need("b_hat") : p.mu;
    return p;
}

ModelParams params_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open parameter file '" + path + "'");
    json j = json::parse(in);  // json::parse_error on bad syntax
    return params_from_json(j);
}

json params_to_json(const ModelParams& p) {
    return json{{"a1", p.a1},       {"a2", p.a2},   {"beta", p.beta}, {"eta", p.eta},
                {"gamma", p.gamma}, {"mu", p.mu},   {"tau", p.tau},   {"b", p.b},
                {"b_hat", p.b_hat}, {"T_total", p.T_total}};
}

namespace {

json complex_json(const std::complex<double>& z) {
    return json{{"re", z.real()}, {"im", z.imag()}};
}

json eigs_json(const EigenTriple& eigs) {
    json a = json::array();
    for (const auto& l : eigs) a.push_back(complex_json(l));
    return a;
}

json equilibrium_json(const Equilibrium& eq) {
    return json{{"S", eq.coords.S},
                {"I", eq.coords.I},
                {"U", eq.coords.U},
                {"kind", eq.kind == EquilibriumKind::DiseaseFree ? "disease-free" : "endemic"},
                {"eigenvalues", eigs_json(eq.eigenvalues)},
                {"class", to_string(eq.stability)},
                {"residual", eq.residual}};
}

json vec3_json(const Eigen::Vector3d& v) { return json::array({v[0], v[1], v[2]}); }

}  // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, bool full_state) {
    os << (full_state ? "t,S,I,U,P\n" : "t,S,I,U\n");
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        const Eigen::VectorXd& y = traj.states[i];
        os << csv_num(traj.times[i]);
        if (full_state) {
            os << ',' << csv_num(y[1]) << ',' << csv_num(y[2]) << ',' << csv_num(y[3]) << ','
               << csv_num(y[0]);
        } else {
            os << ',' << csv_num(y[0]) << ',' << csv_num(y[1]) << ',' << csv_num(y[2]);
        }
        os << '\n';
    }
}

void write_branch_csv(std::ostream& os, const std::vector<BranchRow>& rows) {
    os << "param,R0,dfe_class,S1,I1,U1,re_l1,im_l1,re_l2,im_l2,re_l3,im_l3,e1_class,d0_sign\n";
    for (const BranchRow& r : rows) {
        os << csv_num(r.value) << ',';
        if (r.error.empty()) os << csv_num(r.R0);
        os << ',' << (r.error.empty() ? to_string(r.dfe_class) : std::string());
        if (r.has_endemic) {
            os << ',' << csv_num(r.endemic.S) << ',' << csv_num(r.endemic.I) << ','
               << csv_num(r.endemic.U);
            for (const auto& l : r.endemic_eigs)
                os << ',' << csv_num(l.real()) << ',' << csv_num(l.imag());
            os << ',' << to_string(r.e1_class);
        } else {
            os << ",,,,,,,,,,";
        }
        os << ',' << (r.d0_sign > 0 ? "+" : (r.d0_sign < 0 ? "-" : "")) << '\n';
    }
}

json equilibria_report(const ModelParams& params, const EquilibriumOptions& opts) {
    json rep;
    rep["schema_version"] = kSchemaVersion;
    rep["params"] = params_to_json(params);
    rep["R0"] = r0(params);
    const UnfoldingParams delta = unfolding(params);
    rep["delta1"] = delta.delta1;
    rep["delta2"] = delta.delta2;
    rep["dfe"] = equilibrium_json(disease_free_equilibrium(params));

    const EndemicResult endemic = endemic_closed_form(params, opts);
    if (endemic.exists) {
        json e = equilibrium_json(endemic.eq);
        e["closed_form_consistent"] = endemic.closed_form_consistent;
        e["closed_form_residual"] = endemic.closed_form_residual;
        if (!endemic.note.empty()) e["note"] = endemic.note;
        e["constants"] = json{{"R0", endemic.constants.R0},
                              {"D0", endemic.constants.D0},
                              {"C0", endemic.constants.C0},
                              {"C1", endemic.constants.C1}};
        rep["endemic"] = e;
    } else {
        rep["endemic"] = nullptr;
    }
    rep["warnings"] = params.range_warnings();
    return rep;
}

json transcritical_report_json(const TranscriticalReport& rep, SweepParam p) {
    return json{{"schema_version", kSchemaVersion},
                {"found", true},
                {"param", to_string(p)},
                {"critical_value", rep.critical_value},
                {"bracket", json::array({rep.bracket_lo, rep.bracket_hi})},
                {"e1_e0_distance",
                 json{{"delta1_1e-2", rep.e1_e0_dist_1e2},
                      {"delta1_1e-3", rep.e1_e0_dist_1e3},
                      {"delta1_1e-4", rep.e1_e0_dist_1e4}}},
                {"continuity_ok", rep.continuity_ok}};
}

json hopf_report_json(const HopfResult& res, SweepParam p) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["param"] = to_string(p);
    j["found"] = res.found;
    if (res.found) {
        j["critical_value"] = res.point.critical_value;
        j["omega"] = res.point.omega;
        j["pair"] = complex_json(res.point.pair);
        j["bracket_width"] = res.point.bracket_width;
        j["equilibrium"] = equilibrium_json(res.point.equilibrium);
    } else {
        j["reason"] = res.reason;
    }
    return j;
}

json cycle_report_json(const CycleResult& res, const SectionSpec& section) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["found"] = res.outcome == CycleOutcome::Found;
    j["section"] = json{{"normal", vec3_json(section.normal)},
                        {"anchor", vec3_json(section.anchor)}};
    if (res.outcome == CycleOutcome::Found) {
        j["fixed_point"] = json{{"S", res.fixed_point[0]},
                                {"I", res.fixed_point[1]},
                                {"U", res.fixed_point[2]}};
        j["period"] = res.period;
        j["amplitude"] = res.amplitude;
        j["min_distance_to_E0"] = res.min_distance_to_E0;
        j["closure_error"] = res.closure_error;
        j["returns_used"] = res.returns_used;
        if (!res.reason.empty()) j["note"] = res.reason;
    } else {
        j["reason"] = to_string(res.outcome);
        j["detail"] = res.reason;
    }
    return j;
}

json homoclinic_table_json(const HomoclinicTable& table, const std::string& param) {
    json rows = json::array();
    for (const auto& r : table.rows) {
        rows.push_back(json{{"value", r.param_value},
                            {"period", r.period},
                            {"min_distance_to_E0", r.min_distance_to_E0},
                            {"amplitude", r.amplitude},
                            {"fixed_point", vec3_json(r.fixed_point)}});
    }
    json j{{"schema_version", kSchemaVersion},
           {"param", param},
           {"rows", rows},
           {"completed", table.completed},
           {"notes", table.notes}};
    if (!table.completed) {
        j["stop_reason"] = table.stop_reason;
        j["stop_value"] = table.stop_value;
    }
    return j;
}

json tbt_report_json(const TbtLocation& loc) {
    const TbtDiagnostics& d = loc.diagnostics;
    return json{{"schema_version", kSchemaVersion},
                {"params", params_to_json(loc.params)},
                {"E0", json{{"S", d.e0.S}, {"I", d.e0.I}, {"U", d.e0.U}}},
                {"f_norm", d.f_norm},
                {"eigenvalues", eigs_json(d.eigenvalues)},
                {"eig_error", d.eig_error},
                {"chain_residual", d.chain_residual},
                {"biorthogonality_error", d.biorth_error},
                {"nilpotency", d.nilpotency},
                {"jordan_block", d.jordan_block},
                {"warnings", d.warnings}};
}

json normal_form_report_json(const TbtReport& rep) {
    const JordanChains& ch = rep.chains;
    json chains{{"q0", vec3_json(ch.q0)},
                {"q1", vec3_json(ch.q1)},
                {"p0", vec3_json(ch.p0)},
                {"p1", vec3_json(ch.p1)},
                {"lambda0", ch.lambda0},
                {"residuals", json{{"Aq0", ch.res_Aq0},
                                   {"Aq1_minus_q0", ch.res_Aq1},
                                   {"Atp1", ch.res_Atp1},
                                   {"Atp0_minus_p1", ch.res_Atp0}}},
                {"biorthogonality_error", ch.biorth_error}};
    return json{{"schema_version", kSchemaVersion},
                {"chains", chains},
                {"a2", rep.a2},
                {"b2", rep.b2},
                {"H1", json::array({json::array({rep.H1(0, 0), rep.H1(0, 1)}),
                                    json::array({rep.H1(1, 0), rep.H1(1, 1)})})},
                {"homological_residual", rep.homological_residual},
                {"fit", json{{"a2", rep.a2_fit},
                             {"b2", rep.b2_fit},
                             {"b2_discrepancy", rep.b2_discrepancy},
                             {"agrees", rep.fit_agrees}}},
                {"a2_zero", json{{"value", rep.a2},
                                 {"threshold", rep.a2_zero_threshold},
                                 {"is_zero", rep.a2_is_zero}}}};
}

}  // namespace epibif::io
