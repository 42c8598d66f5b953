#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "oplab/capacity.hpp"
#include "oplab/domain.hpp"
#include "oplab/measure.hpp"
#include "oplab/vi.hpp"

namespace oplab {

using json = nlohmann::json;

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

/// Nodal field CSV with header x[,y],value.
inline std::string field_to_csv(const DiscreteDomain& dom, const std::vector<double>& field) {
    std::string out;
    if (dom.kind == MeshKind::Grid2d) {
        out += "x,y,value\n";
        for (int n = 0; n < dom.node_count(); ++n)
            out += detail::fmt_double(dom.coord_x(n)) + "," + detail::fmt_double(dom.coord_y(n)) +
                   "," + detail::fmt_double(field[n]) + "\n";
    } else {
        out += "x,value\n";
        for (int n = 0; n < dom.node_count(); ++n)
            out += detail::fmt_double(dom.coord_x(n)) + "," + detail::fmt_double(field[n]) + "\n";
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write " + path.string());
    f << text;
}

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

inline json measure_to_json(const DiscreteMeasure& mu) {
    json atoms = json::array();
    for (const auto& a : mu.atoms) {
        json ja;
        ja["x"] = a.x;
        if (mu.dom->kind == MeshKind::Grid2d) ja["y"] = a.y;
        ja["mass"] = a.mass;
        ja["singular"] = a.singular;
        atoms.push_back(ja);
    }
    json params = json::object();
    for (const auto& [k, v] : mu.density.params) params[k] = v;
    return json{{"atoms", atoms}, {"density", mu.density.name}, {"params", params}};
}

inline DiscreteMeasure measure_from_json(const DomainPtr& dom, const json& j) {
    std::vector<Atom> atoms;
    for (const auto& ja : j.at("atoms")) {
        Atom a;
        a.x = ja.at("x").get<double>();
        a.y = ja.value("y", 0.0);
        a.mass = ja.at("mass").get<double>();
        a.singular = ja.value("singular", false);
        atoms.push_back(a);
    }
    const std::string name = j.value("density", "none");
    DensityParams params;
    if (j.contains("params"))
        for (auto it = j.at("params").begin(); it != j.at("params").end(); ++it)
            params[it.key()] = it.value().get<double>();
    return discretize_measure(dom, atoms, make_density(name, params));
}

/// Writes <base>.json plus <base>_u.csv / <base>_lambda.csv next to it.
inline json write_solution(const std::filesystem::path& dir, const std::string& base,
                           const DiscreteDomain& dom, const VISolution& sol) {
    std::filesystem::create_directories(dir);
    const std::string uf = base + "_u.csv", lf = base + "_lambda.csv";
    write_text(dir / uf, field_to_csv(dom, sol.u));
    write_text(dir / lf, field_to_csv(dom, sol.lambda));
    json j{{"u", uf},
           {"lambda", lf},
           {"residual", sol.residual},
           {"iterations", sol.iterations},
           {"reaction_mass", reaction_norm(sol)}};
    write_text(dir / (base + ".json"), j.dump(2) + "\n");
    return j;
}

inline json verdict_to_json(const ConvergenceVerdict& v) {
    json rows = json::array();
    for (const auto& e : v.entries) {
        rows.push_back(json{{"t", e.t},
                            {"s", e.s},
                            {"box", e.box},
                            {"cap_limit_t_inner", e.cap_limit_t_inner},
                            {"cap_limit_s_outer", e.cap_limit_s_outer},
                            {"family_t_inner", e.family_t_inner},
                            {"family_s_outer", e.family_s_outer},
                            {"liminf_ok", e.liminf_ok},
                            {"limsup_ok", e.limsup_ok},
                            {"trace_ok", e.trace_ok}});
    }
    return json{{"verdict", to_string(v.verdict)},
                {"limit_unconstrained", v.limit_unconstrained},
                {"entries", rows}};
}

/// Capacity trace CSV: n,t,box,cap (n = -1 is the limit obstacle).
inline std::string verdict_trace_csv(const ConvergenceVerdict& v) {
    std::string out = "n,t,box,cap\n";
    for (const auto& e : v.entries) {
        out += "-1," + detail::fmt_double(e.t) + "," + std::to_string(e.box) + "," +
               detail::fmt_double(e.cap_limit_t_inner) + "\n";
        for (size_t n = 0; n < e.family_t_inner.size(); ++n)
            out += std::to_string(n) + "," + detail::fmt_double(e.t) + "," +
                   std::to_string(e.box) + "," + detail::fmt_double(e.family_t_inner[n]) + "\n";
    }
    return out;
}

}  // namespace oplab
