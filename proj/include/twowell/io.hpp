#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "twowell/error.hpp"
#include "twowell/field.hpp"
#include "twowell/laminate_tree.hpp"
#include "twowell/mat.hpp"
#include "twowell/minimize.hpp"
#include "twowell/wells.hpp"

namespace twowell {

using json = nlohmann::ordered_json;

/// Row-major text form with 17 significant digits.
inline std::string format17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json to_json(Vec2 v) { return json::array({v.x, v.y}); }
inline json to_json(const Mat2& m) { return json::array({m.m11, m.m12, m.m21, m.m22}); }
inline json to_json(const Mat3& m) {
    json a = json::array();
    for (double v : m.m) a.push_back(v);
    return a;
}

inline Vec2 vec2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw config_error("expected a 2-element array");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Mat2 mat2_from_json(const json& j) {
    if (!j.is_array() || j.size() != 4) throw config_error("expected a 4-element row-major array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

inline json tree_to_json(const LaminateTree& t) {
    json j;
    j["matrix"] = to_json(t.matrix);
    if (t.leaf) {
        j["well"] = t.well;
        return j;
    }
    j["zeta"] = t.zeta;
    j["a"] = to_json(t.a);
    j["n"] = to_json(t.n);
    j["children"] = json::array({tree_to_json(*t.plus), tree_to_json(*t.minus)});
    return j;
}

inline LaminateTree tree_from_json(const json& j) {
    if (!j.contains("matrix")) throw config_error("laminate tree: missing matrix");
    const Mat2 m = mat2_from_json(j["matrix"]);
    if (!j.contains("children")) return LaminateTree::make_leaf(m, j.value("well", 0));
    if (!j["children"].is_array() || j["children"].size() != 2)
        throw config_error("laminate tree: node needs exactly two children");
    return LaminateTree::make_node(m, j["zeta"].get<double>(), vec2_from_json(j["a"]),
                                   vec2_from_json(j["n"]), tree_from_json(j["children"][0]),
                                   tree_from_json(j["children"][1]));
}

inline json field_to_json(const DeformationField& f) {
    json j;
    j["nx"] = f.nx;
    j["ny"] = f.ny;
    j["R"] = to_json(f.R);
    j["b"] = to_json(f.b);
    json verts = json::array(), def = json::array();
    for (int row = 0; row <= f.ny; ++row)
        for (int i = 0; i <= f.nx; ++i) {
            verts.push_back(to_json(f.ref(i, row)));
            def.push_back(to_json(f.deformed[f.vid(i, row)]));
        }
    j["vertices"] = std::move(verts);
    j["deformed"] = std::move(def);
    j["pinned"] = f.pinned;
    j["eps"] = f.eps;
    j["diag"] = static_cast<int>(f.default_diag);
    if (!f.cell_diag.empty()) {
        json cd = json::array();
        for (auto d : f.cell_diag) cd.push_back(static_cast<int>(d));
        j["cell_diag"] = std::move(cd);
    }
    return j;
}

inline DeformationField field_from_json(const json& j) {
    DeformationField f;
    f.nx = j.at("nx").get<int>();
    f.ny = j.at("ny").get<int>();
    if (f.nx < 1 || f.ny < 1) throw config_error("field: grid sizes must be positive");
    f.R = mat2_from_json(j.at("R"));
    f.b = vec2_from_json(j.at("b"));
    f.pinned = j.value("pinned", true);
    f.eps = j.value("eps", 0.0);
    f.default_diag = static_cast<Diag>(j.value("diag", 0));
    const auto& def = j.at("deformed");
    const std::size_t nv = static_cast<std::size_t>(f.n_vertices());
    if (!def.is_array() || def.size() != nv)
        throw config_error("field: deformed vertex count does not match the grid");
    f.deformed.resize(nv);
    for (std::size_t v = 0; v < nv; ++v) f.deformed[v] = vec2_from_json(def[v]);
    if (j.contains("cell_diag")) {
        const auto& cd = j["cell_diag"];
        if (!cd.is_array() || cd.size() != static_cast<std::size_t>(f.nx) * f.ny)
            throw config_error("field: cell_diag size does not match the grid");
        f.cell_diag.resize(cd.size());
        for (std::size_t c = 0; c < cd.size(); ++c)
            f.cell_diag[c] = static_cast<std::uint8_t>(cd[c].get<int>());
    }
    return f;
}

/// Deformed mesh as SVG: triangle fills colored by nearest well, one
/// polyline per mesh line, [0,1]^2 mapped to an 800x800 view box.
inline void write_field_svg(const DeformationField& f, const TwoWellParams& p,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("write_field_svg: cannot open " + path);
    auto X = [](Vec2 v) { return 800.0 * v.x; };
    auto Y = [](Vec2 v) { return 800.0 * (1.0 - v.y); };
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"-40 -40 880 880\">\n";
    out << "<rect x=\"-40\" y=\"-40\" width=\"880\" height=\"880\" fill=\"#ffffff\"/>\n";
    const Mat2 H = p.H();
    for (int t = 0; t < f.n_triangles(); ++t) {
        const auto tri = f.triangle(t);
        const Mat2 g = f.gradient(t);
        const double d0 = dist2_to_coset(g, Mat2::identity());
        const double d1 = dist2_to_coset(g, H);
        const char* color = d0 <= d1 ? "#4878a8" : "#e09048";
        const double din = std::sqrt(std::min(d0, d1));
        const double opacity = din <= 1e-6 ? 1.0 : std::max(0.25, 1.0 - din);
        const Vec2 q0 = f.deformed[f.vid(tri[0][0], tri[0][1])];
        const Vec2 q1 = f.deformed[f.vid(tri[1][0], tri[1][1])];
        const Vec2 q2 = f.deformed[f.vid(tri[2][0], tri[2][1])];
        std::snprintf(buf, sizeof buf,
                      "<polygon points=\"%.3f,%.3f %.3f,%.3f %.3f,%.3f\" fill=\"%s\" "
                      "fill-opacity=\"%.3f\"/>\n",
                      X(q0), Y(q0), X(q1), Y(q1), X(q2), Y(q2), color, opacity);
        out << buf;
    }
    auto polyline = [&](auto next, int count) {
        out << "<polyline fill=\"none\" stroke=\"#303030\" stroke-width=\"0.6\" points=\"";
        for (int k = 0; k < count; ++k) {
            const Vec2 q = next(k);
            std::snprintf(buf, sizeof buf, "%.3f,%.3f ", X(q), Y(q));
            out << buf;
        }
        out << "\"/>\n";
    };
    for (int j = 0; j <= f.ny; ++j)
        polyline([&](int i) { return f.deformed[f.vid(i, j)]; }, f.nx + 1);
    for (int i = 0; i <= f.nx; ++i)
        polyline([&](int j) { return f.deformed[f.vid(i, j)]; }, f.ny + 1);
    out << "</svg>\n";
    if (!out) throw config_error("write_field_svg: write failed for " + path);
}

/// Per-iteration descent trace: iter, energy, penalty_residual, step_size.
inline void write_trace_csv(const SolveReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw config_error("write_trace_csv: cannot open " + path);
    out << "iter,energy,penalty_residual,step_size\n";
    for (const TraceRow& r : report.trace)
        out << r.iter << ',' << format17(r.energy) << ',' << format17(r.penalty_residual) << ','
            << format17(r.step) << '\n';
}

}  // namespace twowell
