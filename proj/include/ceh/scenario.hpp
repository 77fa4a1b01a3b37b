#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ceh/logic.hpp"

namespace ceh {

// A scenario file bundles one quantum scenario with named effect operators,
// named histories built from them, and named proposition families (lattices).
// Complex scalars are serialized as [re, im] pairs throughout.

struct LoadedFamily {
    std::vector<std::string> atom_names;
    double tolerance = 1e-9;
    BooleanLattice lattice;
    std::map<BooleanLattice::Element, TensorHistory> custom_valuation;
};

struct LoadedScenario {
    Scenario scenario;
    std::map<std::string, ComplexMatrix> operators;
    std::map<std::string, AnyHistory> histories;
    std::map<std::string, LoadedFamily> families;
};

namespace detail {

inline const nlohmann::json& need(const nlohmann::json& j, const char* key) {
    const auto it = j.find(key);
    if (it == j.end()) throw Error("missing field", key);
    return *it;
}

inline Complex parse_complex(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw Error("invalid field", path + " (expected [re, im])");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

inline ComplexMatrix parse_matrix(const nlohmann::json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw Error("invalid field", path + " (expected a square matrix)");
    const std::size_t n = j.size();
    ComplexMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!j[i].is_array() || j[i].size() != n)
            throw Error("invalid field", path + " (expected a square matrix)");
        for (std::size_t k = 0; k < n; ++k)
            m(i, k) = parse_complex(j[i][k], path + "[" + std::to_string(i) + "][" +
                                                  std::to_string(k) + "]");
    }
    return m;
}

inline double parse_number(const nlohmann::json& j, const std::string& path) {
    if (!j.is_number()) throw Error("invalid field", path);
    return j.get<double>();
}

inline ComplexMatrix parse_initial_state(const nlohmann::json& j, std::size_t dim) {
    if (!j.is_object()) throw Error("invalid field", "initial_state");
    const std::string kind = need(j, "kind").get<std::string>();
    if (kind == "pure") {
        const nlohmann::json& vj = need(j, "vector");
        if (!vj.is_array() || vj.size() != dim) throw Error("invalid field", "initial_state.vector");
        std::vector<Complex> psi(dim);
        double norm2 = 0.0;
        for (std::size_t i = 0; i < dim; ++i) {
            psi[i] = parse_complex(vj[i], "initial_state.vector[" + std::to_string(i) + "]");
            norm2 += std::norm(psi[i]);
        }
        if (std::abs(std::sqrt(norm2) - 1.0) > 1e-10) throw Error("state not normalized");
        ComplexMatrix rho(dim);
        for (std::size_t i = 0; i < dim; ++i)
            for (std::size_t k = 0; k < dim; ++k) rho(i, k) = psi[i] * std::conj(psi[k]);
        return rho;
    }
    if (kind == "density") {
        ComplexMatrix rho = parse_matrix(need(j, "matrix"), "initial_state.matrix");
        if (rho.dim() != dim) throw Error("dimension mismatch", "initial_state.matrix");
        return rho;
    }
    throw Error("invalid field", "initial_state.kind");
}

}  // namespace detail

// Resolves one element expression over the atom labels of a lattice. Parts
// separated by commas are united; a part is a single atom label or a
// '+'-joined chain of labels (labels may themselves contain '+', longer
// labels win a tie). "0" and "1" denote the lattice bounds unless shadowed
// by an atom label.
inline BooleanLattice::Element parse_element(const std::string& expr,
                                             const std::vector<std::string>& labels) {
    using Element = BooleanLattice::Element;
    const auto match_part = [&labels](const std::string& part) -> std::optional<Element> {
        // label start positions reachable from a valid decomposition prefix
        const std::size_t n = part.size();
        std::vector<std::optional<std::pair<std::size_t, std::size_t>>> from(n + 1);  // pos -> (prev, label)
        std::vector<std::size_t> order(labels.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&labels](std::size_t x, std::size_t y) {
            return labels[x].size() > labels[y].size();
        });
        std::vector<bool> reachable(n + 1, false);
        reachable[0] = true;
        std::optional<std::pair<std::size_t, std::size_t>> final_hop;
        for (std::size_t pos = 0; pos < n && !final_hop; ++pos) {
            if (!reachable[pos]) continue;
            for (std::size_t li : order) {
                const std::string& lab = labels[li];
                if (lab.empty() || part.compare(pos, lab.size(), lab) != 0) continue;
                const std::size_t end = pos + lab.size();
                if (end == n) {
                    final_hop = std::make_pair(pos, li);
                    break;
                }
                if (part[end] == '+' && !reachable[end + 1]) {
                    reachable[end + 1] = true;
                    from[end + 1] = std::make_pair(pos, li);
                }
            }
        }
        if (!final_hop) return std::nullopt;
        Element e = 0;
        std::optional<std::pair<std::size_t, std::size_t>> hop = final_hop;
        while (hop) {
            e |= Element{1} << hop->second;
            hop = hop->first == 0 ? std::nullopt : from[hop->first];
        }
        return e;
    };

    Element mask = 0;
    std::size_t start = 0;
    bool any = false;
    while (start <= expr.size()) {
        const std::size_t comma = expr.find(',', start);
        const std::string part =
            expr.substr(start, (comma == std::string::npos ? expr.size() : comma) - start);
        if (!part.empty()) {
            std::optional<Element> m = match_part(part);
            if (!m && part == "0") m = Element{0};
            if (!m && part == "1")
                m = static_cast<Element>((std::size_t{1} << labels.size()) - 1);
            if (!m) throw Error("unknown element", expr);
            mask |= *m;
            any = true;
        }
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (!any) throw Error("unknown element", expr);
    return mask;
}

namespace detail {

inline TensorHistory as_tensor(const AnyHistory& h) {
    if (const auto* hom = std::get_if<HomogeneousEffectHistory>(&h)) return to_tensor_history(*hom);
    return std::get<TensorHistory>(h);
}

}  // namespace detail

inline LoadedScenario load_scenario_json(const nlohmann::json& root) {
    using detail::need;
    if (!root.is_object()) throw Error("invalid field", "top level (expected an object)");
    const nlohmann::json& dj = need(root, "dim");
    if (!dj.is_number_integer() || dj.get<long long>() <= 0) throw Error("invalid field", "dim");
    const std::size_t dim = dj.get<std::size_t>();
    double hbar = 1.0;
    if (root.contains("hbar")) hbar = detail::parse_number(root["hbar"], "hbar");
    double fiducial = 0.0;
    if (root.contains("fiducial_time")) fiducial = detail::parse_number(root["fiducial_time"], "fiducial_time");
    ComplexMatrix h = detail::parse_matrix(need(root, "hamiltonian"), "hamiltonian");
    if (h.dim() != dim) throw Error("dimension mismatch", "hamiltonian");
    ComplexMatrix rho = detail::parse_initial_state(need(root, "initial_state"), dim);

    LoadedScenario out{Scenario(dim, std::move(h), std::move(rho), hbar, fiducial), {}, {}, {}};

    if (root.contains("operators")) {
        const nlohmann::json& ops = root["operators"];
        if (!ops.is_object()) throw Error("invalid field", "operators");
        for (const auto& [name, mj] : ops.items()) {
            ComplexMatrix m = detail::parse_matrix(mj, "operators." + name);
            if (m.dim() != dim) throw Error("dimension mismatch", "operators." + name);
            if (!classify(m).is_effect) throw Error("not an effect", name);
            out.operators.emplace(name, std::move(m));
        }
    }

    if (root.contains("histories")) {
        const nlohmann::json& hs = root["histories"];
        if (!hs.is_object()) throw Error("invalid field", "histories");
        for (const auto& [name, hj] : hs.items()) {
            const std::string where = "histories." + name;
            if (!hj.is_object()) throw Error("invalid field", where);
            const std::string kind = need(hj, "kind").get<std::string>();
            try {
                if (kind == "homogeneous") {
                    const nlohmann::json& evj = need(hj, "events");
                    if (!evj.is_array()) throw Error("invalid field", where + ".events");
                    std::vector<Event> events;
                    for (const auto& ej : evj) {
                        const double t = detail::parse_number(need(ej, "time"), where + ".time");
                        const std::string opname = need(ej, "operator").get<std::string>();
                        const auto it = out.operators.find(opname);
                        if (it == out.operators.end()) throw Error("unresolved name", opname);
                        events.push_back({t, it->second});
                    }
                    out.histories.emplace(name, HomogeneousEffectHistory(dim, std::move(events)));
                } else if (kind == "tensor") {
                    const nlohmann::json& sj = need(hj, "support");
                    if (!sj.is_array()) throw Error("invalid field", where + ".support");
                    std::vector<double> support;
                    for (const auto& tj : sj)
                        support.push_back(detail::parse_number(tj, where + ".support"));
                    ComplexMatrix m = detail::parse_matrix(need(hj, "matrix"), where + ".matrix");
                    out.histories.emplace(name, TensorHistory(dim, std::move(support), std::move(m)));
                } else {
                    throw Error("invalid field", where + ".kind");
                }
            } catch (const Error& e) {
                if (e.code() == "not an effect" || e.code() == "temporal overlap" ||
                    e.code() == "dimension mismatch" || e.code() == "tensor dimension overflow")
                    throw Error(e.code(), name);
                throw;
            }
        }
    }

    if (root.contains("families")) {
        const nlohmann::json& fs = root["families"];
        if (!fs.is_object()) throw Error("invalid field", "families");
        for (const auto& [name, fj] : fs.items()) {
            const std::string where = "families." + name;
            if (!fj.is_object()) throw Error("invalid field", where);
            const nlohmann::json& aj = need(fj, "atoms");
            if (!aj.is_array() || aj.empty()) throw Error("invalid field", where + ".atoms");
            std::vector<std::string> atom_names;
            std::vector<TensorHistory> atoms;
            for (const auto& nj : aj) {
                const std::string hname = nj.get<std::string>();
                const auto it = out.histories.find(hname);
                if (it == out.histories.end()) throw Error("unresolved name", hname);
                atom_names.push_back(hname);
                atoms.push_back(detail::as_tensor(it->second));
            }
            BooleanLattice::Options opts;
            opts.labels = atom_names;
            if (fj.contains("tolerance")) opts.tol = detail::parse_number(fj["tolerance"], where + ".tolerance");
            if (fj.contains("zero_image")) {
                const std::string zname = fj["zero_image"].get<std::string>();
                const auto it = out.histories.find(zname);
                if (it == out.histories.end()) throw Error("unresolved name", zname);
                opts.zero_image = detail::as_tensor(it->second);
            }
            const double tol = opts.tol;
            BooleanLattice lattice(atoms, std::move(opts));
            std::map<BooleanLattice::Element, TensorHistory> custom;
            if (fj.contains("valuation")) {
                const nlohmann::json& vj = fj["valuation"];
                if (!vj.is_object()) throw Error("invalid field", where + ".valuation");
                for (const auto& [expr, hv] : vj.items()) {
                    const BooleanLattice::Element e = parse_element(expr, atom_names);
                    const std::string hname = hv.get<std::string>();
                    const auto it = out.histories.find(hname);
                    if (it == out.histories.end()) throw Error("unresolved name", hname);
                    custom.emplace(e, detail::as_tensor(it->second));
                }
            }
            out.families.emplace(name, LoadedFamily{std::move(atom_names), tol, std::move(lattice),
                                                    std::move(custom)});
        }
    }
    return out;
}

inline LoadedScenario load_scenario_text(const std::string& text) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error("parse error", e.what());
    }
    return load_scenario_json(root);
}

inline LoadedScenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io error", path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return load_scenario_text(buf.str());
}

}  // namespace ceh
