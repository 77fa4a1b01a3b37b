#pragma once

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ceh/report.hpp"
#include "ceh/scenario.hpp"

namespace ceh::cli {

// Exit codes: 0 the command produced a report, 2 usage problems, 3 the
// scenario file failed to load or validate, 4 the computation itself
// rejected its inputs. Reports go to stdout, errors to stderr, both in the
// selected format.

namespace detail {

using Element = BooleanLattice::Element;

inline const LoadedFamily& find_family(const LoadedScenario& sc, const std::string& name) {
    const auto it = sc.families.find(name);
    if (it == sc.families.end()) throw Error("unresolved name", name);
    return it->second;
}

inline std::string element_label(const LoadedFamily& fam, Element e) {
    if (e == 0) return "0";
    std::string out;
    for (std::size_t i = 0; i < fam.atom_names.size(); ++i)
        if (e & (Element{1} << i)) {
            if (!out.empty()) out += '+';
            out += fam.atom_names[i];
        }
    return out;
}

inline nlohmann::json class_json(const OperatorClass& oc) {
    nlohmann::json j;
    j["is_hermitian"] = oc.is_hermitian;
    j["is_psd"] = oc.is_psd;
    j["is_effect"] = oc.is_effect;
    j["is_projector"] = oc.is_projector;
    j["is_density"] = oc.is_density;
    j["hermiticity_deviation"] = oc.hermiticity_deviation;
    if (oc.is_hermitian) {
        j["min_eigenvalue"] = oc.min_eigenvalue;
        j["max_eigenvalue"] = oc.max_eigenvalue;
        j["trace_deviation"] = oc.trace_deviation;
    }
    return j;
}

inline nlohmann::json pair_issues_json(const LoadedFamily& fam,
                                       const std::vector<LatticePairIssue>& issues,
                                       const char* value_key) {
    nlohmann::json arr = nlohmann::json::array();
    for (const LatticePairIssue& issue : issues) {
        nlohmann::json j;
        j["a"] = element_label(fam, issue.a);
        j["b"] = element_label(fam, issue.b);
        j[value_key] = issue.value;
        j["defined"] = issue.defined;
        arr.push_back(std::move(j));
    }
    return arr;
}

inline nlohmann::json cmd_validate(const LoadedScenario& sc) {
    nlohmann::json j;
    j["command"] = "validate";
    j["dim"] = sc.scenario.dim();
    j["hbar"] = sc.scenario.hbar();
    j["fiducial_time"] = sc.scenario.fiducial_time();
    j["initial_state"] = class_json(classify(sc.scenario.initial_state()));
    nlohmann::json ops;
    for (const auto& [name, m] : sc.operators) ops[name] = class_json(classify(m));
    j["operators"] = std::move(ops);
    nlohmann::json hs;
    for (const auto& [name, h] : sc.histories) {
        nlohmann::json hj;
        if (const auto* hom = std::get_if<HomogeneousEffectHistory>(&h)) {
            hj["kind"] = "homogeneous";
            hj["events"] = hom->events().size();
            hj["is_zero"] = hom->is_zero();
            hj["is_unit"] = hom->is_unit();
        } else {
            const TensorHistory& th = std::get<TensorHistory>(h);
            hj["kind"] = "tensor";
            hj["support"] = th.support();
            hj["dim"] = th.op().dim();
        }
        hs[name] = std::move(hj);
    }
    j["histories"] = std::move(hs);
    nlohmann::json fs;
    for (const auto& [name, fam] : sc.families) {
        nlohmann::json fj;
        fj["atoms"] = fam.atom_names;
        fj["elements"] = fam.lattice.element_count();
        fj["support"] = fam.lattice.support();
        fj["tolerance"] = fam.tolerance;
        fj["custom_valuation_entries"] = fam.custom_valuation.size();
        fs[name] = std::move(fj);
    }
    j["families"] = std::move(fs);
    j["pass"] = true;
    return j;
}

inline nlohmann::json cmd_classop(const LoadedScenario& sc, const std::string& name) {
    const auto it = sc.histories.find(name);
    if (it == sc.histories.end()) throw Error("unresolved name", name);
    nlohmann::json j;
    j["command"] = "classop";
    j["history"] = name;
    ComplexMatrix c;
    if (const auto* hom = std::get_if<HomogeneousEffectHistory>(&it->second)) {
        j["kind"] = "homogeneous";
        c = class_operator(sc.scenario, *hom);
    } else {
        j["kind"] = "tensor";
        c = class_operator(sc.scenario, std::get<TensorHistory>(it->second));
    }
    j["matrix"] = matrix_to_json(c);
    j["frobenius_norm"] = c.frobenius_norm();
    return j;
}

inline nlohmann::json cmd_decohere(const LoadedScenario& sc, const std::string& family,
                                   WeightKind kind) {
    const LoadedFamily& fam = find_family(sc, family);
    std::vector<AnyHistory> hs;
    for (const std::string& name : fam.atom_names) hs.push_back(sc.histories.at(name));
    const DecoherenceContext ctx{sc.scenario, kind};
    const DecoherenceMatrix dm = decoherence_matrix(ctx, hs, fam.atom_names);
    nlohmann::json j;
    j["command"] = "decohere";
    j["family"] = family;
    j["kind"] = kind == WeightKind::first_kind ? "first" : "extended";
    j["labels"] = dm.labels;
    nlohmann::json rows = nlohmann::json::array();
    double herm_dev = 0.0;
    double diag_imag = 0.0;
    for (std::size_t a = 0; a < dm.size; ++a) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t b = 0; b < dm.size; ++b) {
            row.push_back(complex_to_json(dm.at(a, b)));
            herm_dev = std::max(herm_dev, std::abs(dm.at(a, b) - std::conj(dm.at(b, a))));
        }
        diag_imag = std::max(diag_imag, std::abs(dm.at(a, a).imag()));
        rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
    nlohmann::json diag;
    diag["hermiticity_deviation"] = herm_dev;
    diag["diagonal_imag_max"] = diag_imag;
    j["diagnostics"] = std::move(diag);
    return j;
}

inline nlohmann::json cmd_consistent(const LoadedScenario& sc, const std::string& family,
                                     double tol, bool strict) {
    const LoadedFamily& fam = find_family(sc, family);
    const DecoherenceContext ctx{sc.scenario, WeightKind::extended};
    const ConsistencyReport rep = check_consistent(ctx, fam.lattice, tol, strict);
    nlohmann::json j;
    j["command"] = "consistent";
    j["family"] = family;
    j["strict"] = rep.strict;
    j["tol"] = rep.tol;
    j["consistent"] = rep.consistent;
    j["normalization"] = rep.normalization;
    j["worst_residual"] = rep.worst;
    j["violations"] = pair_issues_json(fam, rep.violations, "residual");
    return j;
}

inline nlohmann::json cmd_check_lattice(const LoadedScenario& sc, const std::string& family) {
    const LoadedFamily& fam = find_family(sc, family);
    const DecoherenceContext ctx{sc.scenario, WeightKind::extended};
    const AdmissibilityReport rep = check_admissible(ctx, fam.lattice, fam.custom_valuation);
    nlohmann::json j;
    j["command"] = "check-lattice";
    j["family"] = family;
    j["admissible"] = rep.admissible;
    j["atoms"] = fam.atom_names;
    j["elements"] = fam.lattice.element_count();
    nlohmann::json vc;
    vc["ok"] = rep.valuation_condition_ok;
    vc["violations"] = pair_issues_json(fam, rep.valuation_issues, "residual");
    j["valuation_condition"] = std::move(vc);
    nlohmann::json inj;
    inj["ok"] = rep.injective;
    inj["violations"] = pair_issues_json(fam, rep.injectivity_issues, "distance");
    j["injectivity"] = std::move(inj);
    nlohmann::json w;
    w["ok"] = rep.weights_match;
    w["violations"] = pair_issues_json(fam, rep.weight_issues, "residual");
    j["weights"] = std::move(w);
    return j;
}

inline nlohmann::json cmd_prob(const LoadedScenario& sc, const std::string& family,
                               const std::string& expr) {
    const LoadedFamily& fam = find_family(sc, family);
    const Element e = parse_element(expr, fam.atom_names);
    const DecoherenceContext ctx{sc.scenario, WeightKind::extended};
    const double p = probability(ctx, fam.lattice, e);
    nlohmann::json j;
    j["command"] = "prob";
    j["family"] = family;
    j["element"] = element_label(fam, e);
    j["probability"] = p;
    j["normalization"] = check_consistent(ctx, fam.lattice, fam.tolerance, false).normalization;
    return j;
}

inline nlohmann::json cmd_implies(const LoadedScenario& sc, const std::string& family,
                                  const std::string& e1_expr, const std::string& e2_expr,
                                  const std::string& via_expr) {
    const LoadedFamily& fam = find_family(sc, family);
    const Element e1 = parse_element(e1_expr, fam.atom_names);
    const Element e2 = parse_element(e2_expr, fam.atom_names);
    const DecoherenceContext ctx{sc.scenario, WeightKind::extended};
    nlohmann::json j;
    j["command"] = "implies";
    j["family"] = family;
    j["e1"] = element_label(fam, e1);
    j["e2"] = element_label(fam, e2);
    ImplicationResult res;
    if (!via_expr.empty()) {
        const Element e3 = parse_element(via_expr, fam.atom_names);
        j["via"] = element_label(fam, e3);
        res = implies_via(ctx, fam.lattice, e1, e2, e3);
    } else {
        res = implies(ctx, fam.lattice, e1, e2);
    }
    j["holds"] = res.holds;
    j["conditional"] = res.conditional;
    j["p_e1"] = probability(ctx, fam.lattice, e1);
    j["p_meet"] = probability(ctx, fam.lattice, e1 & e2);
    return j;
}

inline std::string render_error(const Error& e, const std::string& format) {
    nlohmann::json j;
    j["error"] = e.code();
    if (!e.detail().empty()) j["detail"] = e.detail();
    return render_report(j, format);
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"consistent effect histories calculus"};
    app.require_subcommand(1);

    struct Args {
        std::string scenario;
        std::string format = "json";
        std::string family;
        std::string kind = "extended";
        std::string history;
        std::string element;
        std::string e1, e2, via;
        double tol = 1e-9;
        bool strict = false;
    } a;

    const auto add_common = [&a](CLI::App* c) {
        c->add_option("scenario", a.scenario, "scenario file")->required();
        c->add_option("--format", a.format, "output format")
            ->check(CLI::IsMember({"json", "text"}));
    };

    CLI::App* validate = app.add_subcommand("validate", "load a scenario and report what it declares");
    add_common(validate);

    CLI::App* classop = app.add_subcommand("classop", "class operator of a named history");
    add_common(classop);
    classop->add_option("history", a.history, "history name")->required();

    CLI::App* decohere = app.add_subcommand("decohere", "decoherence matrix of a family");
    add_common(decohere);
    decohere->add_option("--family", a.family, "family name")->required();
    decohere->add_option("--kind", a.kind, "weight functional")
        ->check(CLI::IsMember({"first", "extended"}));

    CLI::App* consistent = app.add_subcommand("consistent", "consistency check of a family");
    add_common(consistent);
    consistent->add_option("--family", a.family, "family name")->required();
    CLI::Option* tol_opt = consistent->add_option("--tol", a.tol, "consistency tolerance");
    consistent->add_flag("--strict", a.strict, "require full complex cross terms to vanish");

    CLI::App* check_lattice = app.add_subcommand("check-lattice", "admissibility diagnostics");
    add_common(check_lattice);
    check_lattice->add_option("--family", a.family, "family name")->required();

    CLI::App* prob = app.add_subcommand("prob", "probability of a lattice element");
    add_common(prob);
    prob->add_option("--family", a.family, "family name")->required();
    prob->add_option("--element", a.element, "element expression")->required();

    CLI::App* implies_cmd = app.add_subcommand("implies", "logical implication between elements");
    add_common(implies_cmd);
    implies_cmd->add_option("--family", a.family, "family name")->required();
    implies_cmd->add_option("e1", a.e1, "antecedent element expression")->required();
    implies_cmd->add_option("e2", a.e2, "consequent element expression")->required();
    implies_cmd->add_option("--via", a.via, "common lower bound certifying the implication");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return 2;
    }

    std::optional<LoadedScenario> sc;
    try {
        sc.emplace(load_scenario(a.scenario));
    } catch (const Error& e) {
        err << detail::render_error(e, a.format);
        return 3;
    } catch (const std::exception& e) {
        err << detail::render_error(Error("invalid field", e.what()), a.format);
        return 3;
    }

    try {
        nlohmann::json payload;
        if (validate->parsed()) {
            payload = detail::cmd_validate(*sc);
        } else if (classop->parsed()) {
            payload = detail::cmd_classop(*sc, a.history);
        } else if (decohere->parsed()) {
            payload = detail::cmd_decohere(
                *sc, a.family, a.kind == "first" ? WeightKind::first_kind : WeightKind::extended);
        } else if (consistent->parsed()) {
            const double tol =
                tol_opt->count() > 0 ? a.tol : detail::find_family(*sc, a.family).tolerance;
            payload = detail::cmd_consistent(*sc, a.family, tol, a.strict);
        } else if (check_lattice->parsed()) {
            payload = detail::cmd_check_lattice(*sc, a.family);
        } else if (prob->parsed()) {
            payload = detail::cmd_prob(*sc, a.family, a.element);
        } else {
            payload = detail::cmd_implies(*sc, a.family, a.e1, a.e2, a.via);
        }
        out << render_report(payload, a.format);
        return 0;
    } catch (const Error& e) {
        err << detail::render_error(e, a.format);
        return 4;
    }
}

}  // namespace ceh::cli
