#pragma once

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "twowell/envelope.hpp"
#include "twowell/io.hpp"
#include "twowell/rng.hpp"
#include "twowell/so3.hpp"

namespace twowell::cli {

namespace detail {

inline std::vector<double> parse_reals(const std::string& csv, std::size_t expect,
                                       const char* field) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            vals.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw config_error(std::string(field) + ": cannot parse '" + item + "' as a real");
        }
    }
    if (vals.size() != expect)
        throw config_error(std::string(field) + ": expected " + std::to_string(expect) +
                           " comma-separated reals");
    return vals;
}

inline Mat2 parse_mat2(const std::string& csv, const char* field) {
    const auto v = parse_reals(csv, 4, field);
    return {v[0], v[1], v[2], v[3]};
}

inline void emit(const json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream f(out_path);
        if (!f) throw config_error("cannot open output file " + out_path);
        f << j.dump(2) << "\n";
    }
}

inline Mat2 midpoint_matrix(const TwoWellParams& p) {
    return 0.5 * (Mat2::identity() + Mat2::rotation(p.connection_angle()) * p.H());
}

/// Default laminate grid: nx = 4N and ny = round(mu) * nx (exact interface
/// alignment when mu is integral, e.g. the canonical lambda = 1/2).
inline std::pair<int, int> default_grid(int freq, const TwoWellParams& p) {
    const int nx = 4 * freq;
    const int aspect = std::max(1, static_cast<int>(std::lround(p.mu)));
    return {nx, aspect * nx};
}

inline json stats_to_json(const FieldStats& st) {
    json j;
    j["fraction_in_K"] = st.fraction_in_K;
    j["l2_dist_to_K"] = st.l2_dist_to_K;
    j["well_histogram"] = json::array({st.well_fraction[0], st.well_fraction[1]});
    j["det_min"] = st.det_min;
    j["det_max"] = st.det_max;
    j["det_min_nonblend"] = st.det_min_nonblend;
    j["det_max_nonblend"] = st.det_max_nonblend;
    j["boundary_error"] = st.boundary_error;
    j["n_triangles"] = st.n_triangles;
    j["n_nonblend"] = st.n_nonblend;
    return j;
}

struct MinimizeConfig {
    std::string model = "dirichlet";
    double lambda = 0.5;
    int nx = 16, ny = 16;
    std::string boundary = "identity";  // "identity" | "mid" | explicit matrix
    Mat2 boundary_matrix = Mat2::identity();
    Vec2 b{};
    std::string init = "perturbed";  // "identity" | "perturbed" | "laminate"
    double perturbation = 0.05;
    std::uint64_t seed = 1;
    int laminate_freq = 32;
    double laminate_cutoff = 0.0;  // 0 = 1/freq
    double beta0 = 10.0, beta_factor = 10.0;
    int beta_stages = 3;
    int max_iterations = 5000;
    double descent_tol = 1e-7;
};

inline MinimizeConfig minimize_config_from_json(const json& j) {
    MinimizeConfig c;
    c.model = j.value("model", c.model);
    if (c.model != "dirichlet" && c.model != "two_well")
        throw config_error("minimize config: model must be 'dirichlet' or 'two_well'");
    c.lambda = j.value("lambda", c.lambda);
    if (j.contains("grid")) {
        if (!j["grid"].is_array() || j["grid"].size() != 2)
            throw config_error("minimize config: grid must be [nx, ny]");
        c.nx = j["grid"][0].get<int>();
        c.ny = j["grid"][1].get<int>();
    }
    if (c.nx < 2 || c.ny < 2) throw config_error("minimize config: grid sizes must be >= 2");
    if (j.contains("boundary")) {
        const auto& bj = j["boundary"];
        if (bj.is_string()) {
            c.boundary = bj.get<std::string>();
            if (c.boundary != "identity" && c.boundary != "mid")
                throw config_error("minimize config: boundary must be 'identity', 'mid' or a matrix");
        } else {
            c.boundary = "matrix";
            c.boundary_matrix = mat2_from_json(bj.at("matrix"));
            if (bj.contains("b")) c.b = vec2_from_json(bj["b"]);
        }
    }
    c.init = j.value("init", c.init);
    if (c.init != "identity" && c.init != "perturbed" && c.init != "laminate")
        throw config_error("minimize config: init must be 'identity', 'perturbed' or 'laminate'");
    c.perturbation = j.value("perturbation", c.perturbation);
    c.seed = j.value("seed", c.seed);
    if (j.contains("laminate")) {
        c.laminate_freq = j["laminate"].value("freq", c.laminate_freq);
        c.laminate_cutoff = j["laminate"].value("cutoff", c.laminate_cutoff);
    }
    c.beta0 = j.value("beta0", c.beta0);
    c.beta_factor = j.value("beta_factor", c.beta_factor);
    c.beta_stages = j.value("beta_stages", c.beta_stages);
    c.max_iterations = j.value("max_iterations", c.max_iterations);
    c.descent_tol = j.value("descent_tol", c.descent_tol);
    if (c.beta0 <= 0 || c.beta_factor <= 1 || c.beta_stages < 1)
        throw config_error("minimize config: need beta0 > 0, beta_factor > 1, beta_stages >= 1");
    if (c.max_iterations < 0) throw config_error("minimize config: max_iterations must be >= 0");
    return c;
}

}  // namespace detail

/// Command-line front end; returns the process exit code.
/// 0 = success, 2 = validation error, 3 = numeric failure.
inline int run(std::vector<std::string> args) {
    CLI::App app{"two-well microstructure toolbox: coset geometry, hulls, convex envelopes,\n"
                 "laminates and discrete incompressible minimization"};
    app.require_subcommand(1);

    std::string out_path;
    app.add_option("--out", out_path, "write the primary JSON result to this file (default stdout)")
        ->capture_default_str();

    // ---- wells connect ----------------------------------------------------
    auto* wells = app.add_subcommand("wells", "rotation-coset geometry");
    auto* connect = wells->add_subcommand("connect", "rank-one connection angles between cosets");
    double c_lambda = 0.5;
    std::string c_q1, c_q2;
    connect->add_option("--lambda", c_lambda, "two-well parameter in (0,1)")->capture_default_str();
    connect->add_option("--q1", c_q1, "first unimodular matrix, row-major a,b,c,d (default I)");
    connect->add_option("--q2", c_q2, "second unimodular matrix (default H(lambda))");

    // ---- hull test / sample / sweep ---------------------------------------
    auto* hull = app.add_subcommand("hull", "convex hull K^c and minimizing set Z_min");
    auto* htest = hull->add_subcommand("test", "membership flags and hull coordinates");
    std::string ht_matrix;
    double ht_lambda = 0.5, ht_tol = 1e-9;
    htest->add_option("--matrix", ht_matrix, "row-major a,b,c,d")->required();
    htest->add_option("--lambda", ht_lambda)->capture_default_str();
    htest->add_option("--tol", ht_tol, "membership tolerance")->capture_default_str();

    auto* hsample = hull->add_subcommand("sample", "point of Z_min from (alpha, gamma, t)");
    double hs_alpha = 0.0, hs_gamma = 0.0, hs_t = 0.5, hs_lambda = 0.5;
    hsample->add_option("--alpha", hs_alpha, "direction of x")->required();
    hsample->add_option("--gamma", hs_gamma, "direction of y")->required();
    hsample->add_option("--t", hs_t, "|x| in [0,1]")->required();
    hsample->add_option("--lambda", hs_lambda)->capture_default_str();

    auto* hsweep = hull->add_subcommand("sweep", "CSV sweep of Z_min samples");
    int sw_na = 8, sw_ng = 8, sw_nt = 5;
    double sw_lambda = 0.5;
    std::string sw_out;
    hsweep->add_option("--n-alpha", sw_na)->capture_default_str();
    hsweep->add_option("--n-gamma", sw_ng)->capture_default_str();
    hsweep->add_option("--n-t", sw_nt)->capture_default_str();
    hsweep->add_option("--lambda", sw_lambda)->capture_default_str();
    hsweep->add_option("--csv", sw_out, "CSV output path (default stdout)");

    // ---- envelope build / query / slice ------------------------------------
    auto* envl = app.add_subcommand("envelope", "grid convex envelope of the two-well energy");
    auto* ebuild = envl->add_subcommand("build", "build and save the biconjugate table");
    double eb_lambda = 0.5, eb_box = 3.0;
    int eb_res = 33;
    std::string eb_out;
    ebuild->add_option("--lambda", eb_lambda)->capture_default_str();
    ebuild->add_option("--box", eb_box, "half-width of the sampled box (>= 3)")->capture_default_str();
    ebuild->add_option("--resolution", eb_res, "odd node count per axis (>= 9)")->capture_default_str();
    ebuild->add_option("--file", eb_out, "envelope output file")->required();

    auto* equery = envl->add_subcommand("query", "interpolate the envelope at a matrix");
    std::string eq_env, eq_matrix;
    equery->add_option("--env", eq_env, "envelope file")->required();
    equery->add_option("--matrix", eq_matrix, "row-major a,b,c,d")->required();

    auto* eslice = envl->add_subcommand("slice", "dump a 2-D slice as CSV");
    std::string es_env, es_axes = "0,3", es_fix = "0,0", es_out;
    eslice->add_option("--env", es_env)->required();
    eslice->add_option("--axes", es_axes, "two varying axes, e.g. 0,3 (order m11,m12,m21,m22)")
        ->capture_default_str();
    eslice->add_option("--fix", es_fix, "values of the two fixed axes")->capture_default_str();
    eslice->add_option("--csv", es_out, "CSV output path (default stdout)");

    // ---- laminate build -----------------------------------------------------
    auto* lam = app.add_subcommand("laminate", "laminate decomposition and field construction");
    auto* lbuild = lam->add_subcommand("build", "decompose a hull matrix and build its field");
    std::string lb_target = "mid", lb_matrix, lb_grid, lb_prefix;
    double lb_lambda = 0.5, lb_cutoff = 0.0, lb_bx = 0.0, lb_by = 0.0;
    int lb_freq = 16;
    lbuild->add_option("--target", lb_target, "'mid' for the canonical midpoint")->capture_default_str();
    lbuild->add_option("--matrix", lb_matrix, "explicit target matrix a,b,c,d (overrides --target)");
    lbuild->add_option("--lambda", lb_lambda)->capture_default_str();
    lbuild->add_option("--freq", lb_freq, "bands per unit length N")->capture_default_str();
    lbuild->add_option("--cutoff", lb_cutoff, "boundary blend width (default 1/N)");
    lbuild->add_option("--grid", lb_grid, "nx,ny (default 4N x 4N*round(mu))");
    lbuild->add_option("--bx", lb_bx, "translation x")->capture_default_str();
    lbuild->add_option("--by", lb_by, "translation y")->capture_default_str();
    lbuild->add_option("--prefix", lb_prefix, "write <prefix>.tree.json/.field.json/.svg");

    // ---- minimize -----------------------------------------------------------
    auto* mini = app.add_subcommand("minimize", "penalized incompressible energy descent");
    std::string mi_config, mi_prefix;
    mini->add_option("--config", mi_config, "JSON config file")->required();
    mini->add_option("--prefix", mi_prefix, "write <prefix>.trace.csv/.field.json/.svg");

    // ---- certify ------------------------------------------------------------
    auto* cert = app.add_subcommand("certify", "affineness / single-coset certificate for a field");
    std::string ce_field;
    double ce_coset_tol = 1e-6, ce_affine_tol = 1e-6, ce_lambda = 0.5;
    cert->add_option("--field", ce_field, "field JSON file")->required();
    cert->add_option("--coset-tol", ce_coset_tol)->capture_default_str();
    cert->add_option("--affine-tol", ce_affine_tol)->capture_default_str();
    cert->add_option("--lambda", ce_lambda)->capture_default_str();

    // ---- so3scan ------------------------------------------------------------
    auto* so3 = app.add_subcommand("so3scan", "scan |det(R - Q)| over SO(3)");
    std::string s3_diag, s3_q;
    int s3_samples = 100000, s3_refine = 60;
    so3->add_option("--diag", s3_diag, "diagonal l1,l2,l3 with product 1");
    so3->add_option("--q", s3_q, "full 3x3 matrix, 9 reals row-major");
    so3->add_option("--samples", s3_samples)->capture_default_str();
    so3->add_option("--refine", s3_refine, "refinement iterations")->capture_default_str();

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("twowell");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (connect->parsed()) {
            const TwoWellParams p = TwoWellParams::from_lambda(c_lambda);
            const Mat2 q1 = c_q1.empty() ? Mat2::identity() : detail::parse_mat2(c_q1, "--q1");
            const Mat2 q2 = c_q2.empty() ? p.H() : detail::parse_mat2(c_q2, "--q2");
            const ConnectionAngles ca = rank_one_angles(q1, q2);
            json j;
            j["lambda"] = c_lambda;
            j["q1"] = to_json(q1);
            j["q2"] = to_json(q2);
            j["angles"] = ca.angles;
            j["degenerate"] = ca.degenerate;
            json res = json::array();
            for (double th : ca.angles) res.push_back(det(Mat2::rotation(th) * q1 - q2));
            j["residuals"] = std::move(res);
            detail::emit(j, out_path);
        } else if (htest->parsed()) {
            const TwoWellParams p = TwoWellParams::from_lambda(ht_lambda);
            const Mat2 X = detail::parse_mat2(ht_matrix, "--matrix");
            const Membership m = membership(X, p, ht_tol);
            const HullCoords hc = hull_coordinates(X, p);
            json j;
            j["matrix"] = to_json(X);
            j["lambda"] = ht_lambda;
            j["in_K"] = m.in_K;
            j["in_Zmin"] = m.in_Zmin;
            j["in_Kc"] = m.in_Kc;
            j["x"] = to_json(hc.x);
            j["y"] = to_json(hc.y);
            j["constraint"] = hull_constraint(hc, p);
            detail::emit(j, out_path);
        } else if (hsample->parsed()) {
            const TwoWellParams p = TwoWellParams::from_lambda(hs_lambda);
            const Mat2 X = sample_Zmin(hs_alpha, hs_gamma, hs_t, p);
            const HullCoords hc = hull_coordinates(X, p);
            json j;
            j["matrix"] = to_json(X);
            j["x"] = to_json(hc.x);
            j["y"] = to_json(hc.y);
            j["det"] = det(X);
            detail::emit(j, out_path);
        } else if (hsweep->parsed()) {
            if (sw_na < 1 || sw_ng < 1 || sw_nt < 1)
                throw config_error("hull sweep: counts must be >= 1");
            const TwoWellParams p = TwoWellParams::from_lambda(sw_lambda);
            std::ostringstream csv;
            csv << "alpha,gamma,t,m11,m12,m21,m22\n";
            for (int ia = 0; ia < sw_na; ++ia)
                for (int ig = 0; ig < sw_ng; ++ig)
                    for (int it = 0; it < sw_nt; ++it) {
                        const double alpha = 2.0 * M_PI * ia / sw_na;
                        const double gamma = 2.0 * M_PI * ig / sw_ng;
                        const double t = sw_nt == 1 ? 0.0 : static_cast<double>(it) / (sw_nt - 1);
                        Mat2 X;
                        try {
                            X = sample_Zmin(alpha, gamma, t, p);
                        } catch (const numeric_error&) {
                            continue;  // infeasible (gamma too far from alpha at this t)
                        }
                        csv << format17(alpha) << ',' << format17(gamma) << ',' << format17(t)
                            << ',' << format17(X.m11) << ',' << format17(X.m12) << ','
                            << format17(X.m21) << ',' << format17(X.m22) << '\n';
                    }
            if (sw_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream f(sw_out);
                if (!f) throw config_error("cannot open " + sw_out);
                f << csv.str();
            }
        } else if (ebuild->parsed()) {
            const TwoWellParams p = TwoWellParams::from_lambda(eb_lambda);
            const GridEnvelope env = build_biconjugate(two_well_model(p), eb_box, eb_res);
            save_envelope(env, eb_out);
            json j;
            j["file"] = eb_out;
            j["box"] = env.box;
            j["resolution"] = env.resolution;
            j["lambda"] = eb_lambda;
            j["nodes"] = env.values.size();
            detail::emit(j, out_path);
        } else if (equery->parsed()) {
            const GridEnvelope env = load_envelope(eq_env);
            const Mat2 X = detail::parse_mat2(eq_matrix, "--matrix");
            json j;
            j["matrix"] = to_json(X);
            j["value"] = envelope_eval(env, X);
            detail::emit(j, out_path);
        } else if (eslice->parsed()) {
            const GridEnvelope env = load_envelope(es_env);
            const auto axes = detail::parse_reals(es_axes, 2, "--axes");
            const auto fix = detail::parse_reals(es_fix, 2, "--fix");
            const int a0 = static_cast<int>(axes[0]), a1 = static_cast<int>(axes[1]);
            if (a0 < 0 || a0 > 3 || a1 < 0 || a1 > 3 || a0 == a1)
                throw config_error("envelope slice: axes must be two distinct indices in 0..3");
            static const char* names[4] = {"m11", "m12", "m21", "m22"};
            int fixed[2], nf = 0;
            for (int a = 0; a < 4; ++a)
                if (a != a0 && a != a1) fixed[nf++] = a;
            int idx[4] = {0, 0, 0, 0};
            idx[fixed[0]] = env.nearest_node(fix[0]);
            idx[fixed[1]] = env.nearest_node(fix[1]);
            std::ostringstream csv;
            csv << names[a0] << ',' << names[a1] << ",value\n";
            for (int i = 0; i < env.resolution; ++i)
                for (int k = 0; k < env.resolution; ++k) {
                    idx[a0] = i;
                    idx[a1] = k;
                    csv << format17(env.node_coord(i)) << ',' << format17(env.node_coord(k)) << ','
                        << format17(env.values[env.index(idx[0], idx[1], idx[2], idx[3])]) << '\n';
                }
            if (es_out.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream f(es_out);
                if (!f) throw config_error("cannot open " + es_out);
                f << csv.str();
            }
        } else if (lbuild->parsed()) {
            const TwoWellParams p = TwoWellParams::from_lambda(lb_lambda);
            Mat2 target;
            if (!lb_matrix.empty())
                target = detail::parse_mat2(lb_matrix, "--matrix");
            else if (lb_target == "mid")
                target = detail::midpoint_matrix(p);
            else
                throw config_error("laminate build: --target must be 'mid' or use --matrix");
            if (lb_freq < 1) throw config_error("laminate build: --freq must be >= 1");
            const double cutoff = lb_cutoff > 0.0 ? lb_cutoff : 1.0 / lb_freq;
            int nx, ny;
            if (!lb_grid.empty()) {
                const auto g = detail::parse_reals(lb_grid, 2, "--grid");
                nx = static_cast<int>(g[0]);
                ny = static_cast<int>(g[1]);
            } else {
                std::tie(nx, ny) = detail::default_grid(lb_freq, p);
            }
            const LaminateTree tree = laminate_decompose(target, p);
            const DeformationField field =
                build_laminate_field(tree, lb_freq, cutoff, nx, ny, {lb_bx, lb_by});
            const FieldStats st = field_gradient_stats(field, p);
            json j;
            j["target"] = to_json(target);
            j["depth"] = tree.depth();
            j["tree"] = tree_to_json(tree);
            j["freq"] = lb_freq;
            j["cutoff"] = cutoff;
            j["grid"] = json::array({nx, ny});
            j["stats"] = detail::stats_to_json(st);
            j["two_well_energy"] = field_energy(field, two_well_model(p));
            j["affine_competitor_energy"] = two_well_model(p).eval(target);
            if (!lb_prefix.empty()) {
                std::ofstream tf(lb_prefix + ".tree.json");
                if (!tf) throw config_error("cannot open " + lb_prefix + ".tree.json");
                tf << tree_to_json(tree).dump(2) << "\n";
                std::ofstream ff(lb_prefix + ".field.json");
                if (!ff) throw config_error("cannot open " + lb_prefix + ".field.json");
                ff << field_to_json(field).dump(2) << "\n";
                write_field_svg(field, p, lb_prefix + ".svg");
                j["files"] = json::array({lb_prefix + ".tree.json", lb_prefix + ".field.json",
                                          lb_prefix + ".svg"});
            }
            detail::emit(j, out_path);
        } else if (mini->parsed()) {
            std::ifstream cf(mi_config);
            if (!cf) throw config_error("minimize: cannot open config file " + mi_config);
            json cj;
            try {
                cf >> cj;
            } catch (const std::exception& e) {
                throw config_error(std::string("minimize: config is not valid JSON: ") + e.what());
            }
            const detail::MinimizeConfig c = detail::minimize_config_from_json(cj);
            const TwoWellParams p = TwoWellParams::from_lambda(c.lambda);

            MinimizeProblem prob;
            prob.model = c.model == "dirichlet" ? dirichlet_model() : two_well_model(p);
            Mat2 bound = Mat2::identity();
            if (c.boundary == "mid")
                bound = detail::midpoint_matrix(p);
            else if (c.boundary == "matrix")
                bound = c.boundary_matrix;

            if (c.init == "laminate") {
                const LaminateTree tree = laminate_decompose(bound, p);
                const double cutoff =
                    c.laminate_cutoff > 0.0 ? c.laminate_cutoff : 1.0 / c.laminate_freq;
                prob.initial = build_laminate_field(tree, c.laminate_freq, cutoff, c.nx, c.ny, c.b);
            } else {
                prob.initial = DeformationField::affine(c.nx, c.ny, bound, c.b);
                if (c.init == "perturbed") {
                    Rng rng(c.seed);
                    for (int j = 1; j < c.ny; ++j)
                        for (int i = 1; i < c.nx; ++i)
                            prob.initial.deformed[prob.initial.vid(i, j)] =
                                prob.initial.deformed[prob.initial.vid(i, j)] +
                                rng.vec2(-c.perturbation, c.perturbation);
                }
            }
            prob.beta0 = c.beta0;
            prob.beta_factor = c.beta_factor;
            prob.beta_stages = c.beta_stages;
            prob.max_iterations = c.max_iterations;
            prob.descent_tol = c.descent_tol;

            auto [field, report] = minimize(prob);
            const FieldStats st = field_gradient_stats(field, p);
            json j;
            j["model"] = c.model;
            j["boundary"] = to_json(bound);
            j["final_energy"] = report.final_energy;
            j["penalty_residual"] = report.penalty_residual;
            j["iterations"] = report.iterations;
            j["monotone"] = report.monotone;
            j["failed"] = report.failed;
            if (report.failed) j["failure"] = report.failure;
            j["stats"] = detail::stats_to_json(st);
            if (!mi_prefix.empty()) {
                write_trace_csv(report, mi_prefix + ".trace.csv");
                std::ofstream ff(mi_prefix + ".field.json");
                if (!ff) throw config_error("cannot open " + mi_prefix + ".field.json");
                ff << field_to_json(field).dump(2) << "\n";
                write_field_svg(field, p, mi_prefix + ".svg");
                j["files"] = json::array(
                    {mi_prefix + ".trace.csv", mi_prefix + ".field.json", mi_prefix + ".svg"});
            }
            detail::emit(j, out_path);
            if (report.failed) return 3;
        } else if (cert->parsed()) {
            std::ifstream ff(ce_field);
            if (!ff) throw config_error("certify: cannot open field file " + ce_field);
            json fj;
            try {
                ff >> fj;
            } catch (const std::exception& e) {
                throw config_error(std::string("certify: field file is not valid JSON: ") + e.what());
            }
            const DeformationField field = field_from_json(fj);
            const AffineCertificate ac = affine_certificate(field, ce_coset_tol, ce_affine_tol);
            json j;
            j["certified"] = ac.certified;
            j["single_coset"] = ac.single_coset;
            j["fitted_P"] = to_json(ac.fitted_P);
            j["coset_residual"] = ac.coset_residual;
            j["affine_residual"] = ac.affine_residual;
            if (!ac.reason.empty()) j["reason"] = ac.reason;
            j["null_lagrangian_residual"] = null_lagrangian_residual(field);
            detail::emit(j, out_path);
        } else if (so3->parsed()) {
            Mat3 Q;
            if (!s3_q.empty()) {
                const auto v = detail::parse_reals(s3_q, 9, "--q");
                for (int k = 0; k < 9; ++k) Q.m[k] = v[k];
            } else if (!s3_diag.empty()) {
                const auto v = detail::parse_reals(s3_diag, 3, "--diag");
                Q = Mat3::diag(v[0], v[1], v[2]);
            } else {
                throw config_error("so3scan: provide --diag or --q");
            }
            const So3ScanResult r = so3_rank_one_scan(Q, s3_samples, s3_refine);
            json j;
            j["q"] = to_json(Q);
            j["samples"] = r.samples_evaluated;
            j["min_residual"] = r.min_abs_residual;
            j["argmin"] = to_json(r.argmin);
            detail::emit(j, out_path);
        } else {
            std::cerr << app.help() << "\n";
            return 2;
        }
    } catch (const config_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace twowell::cli
