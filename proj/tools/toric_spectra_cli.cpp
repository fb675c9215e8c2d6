// Command-line front end: reproducible verification campaigns over polytope
// kernels, with CSV/JSON outputs.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "toric/cli_registry.hpp"
#include "toric/toric.hpp"

namespace {

using namespace toric;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitUsage = 4;

struct OutputTable {
    std::vector<std::pair<std::string, std::string>> header;  // reproducibility keys
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;

    void kv(const std::string& k, const std::string& v) { header.push_back({k, v}); }
    void kv(const std::string& k, double v) { header.push_back({k, format_double(v)}); }
};

std::string now_rfc3339() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[64];
    std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
    return buf;
}

void emit(const OutputTable& table, const std::string& format, const std::string& out_path) {
    std::ostringstream body;
    if (format == "json") {
        nlohmann::json j;
        for (const auto& [k, v] : table.header) j["meta"][k] = v;
        j["columns"] = table.columns;
        j["rows"] = nlohmann::json::array();
        for (const auto& row : table.rows) j["rows"].push_back(row);
        body << j.dump(2) << "\n";
    } else {
        for (const auto& [k, v] : table.header) body << "# " << k << "=" << v << "\n";
        if (!table.columns.empty()) {
            for (size_t i = 0; i < table.columns.size(); ++i)
                body << (i ? "," : "") << table.columns[i];
            body << "\n";
        }
        for (const auto& row : table.rows) {
            for (size_t i = 0; i < row.size(); ++i) body << (i ? "," : "") << row[i];
            body << "\n";
        }
    }
    if (out_path.empty() || out_path == "-") {
        std::cout << body.str();
    } else {
        std::ofstream f(out_path);
        if (!f) throw std::runtime_error("cannot open output file: " + out_path);
        f << body.str();
    }
}

std::vector<double> parse_point(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
    return out;
}

std::vector<std::int64_t> parse_int_list(const std::string& text) {
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(std::stoll(tok));
    return out;
}

Eigen::VectorXd to_vec(const std::vector<double>& v) {
    Eigen::VectorXd x(Eigen::Index(v.size()));
    for (size_t i = 0; i < v.size(); ++i) x(Eigen::Index(i)) = v[i];
    return x;
}

IntVec to_intvec(const std::vector<std::int64_t>& v) { return IntVec(v.begin(), v.end()); }

struct CommonArgs {
    std::string polytope_path;
    std::string out_path;
    std::string format = "csv";
    int threads = 0;
    bool stamp = false;
    double tol = 0.0;  // 0 = engine defaults
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_polytope = true) {
    if (needs_polytope)
        cmd->add_option("--polytope", args.polytope_path, "polytope JSON file")->required();
    cmd->add_option("--out", args.out_path, "output file (default: stdout)");
    cmd->add_option("--format", args.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--threads", args.threads, "worker thread cap");
    cmd->add_flag("--stamp", args.stamp, "include a timestamp in the output header");
    cmd->add_option("--tol", args.tol, "override the quadrature tolerance");
}

QuadratureOptions options_from(const CommonArgs& args) {
    QuadratureOptions opts;
    if (args.tol > 0.0) {
        opts.abs_tol = args.tol;
        opts.log_rel_tol = args.tol;
        opts.max_evals = 20'000'000;
    }
    return opts;
}

OutputTable make_table(const std::string& command, const CommonArgs& args,
                       const DelzantPolytope* poly) {
    OutputTable t;
    t.kv("tool", "toric-spectra " TORIC_SPECTRA_VERSION);
    t.kv("command", command);
    if (poly) t.kv("polytope_hash", polytope_hash(*poly));
    if (args.stamp) t.kv("generated_at", now_rfc3339());
    return t;
}

void apply_threads(const CommonArgs& args) {
    if (args.threads > 0) set_thread_count(args.threads);
}

// ---------------------------------------------------------------- validate

int run_validate(const CommonArgs& args) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    OutputTable t = make_table("validate", args, &poly);
    t.kv("delzant", "true");
    t.kv("dim", std::to_string(poly.dim()));
    t.kv("facets", std::to_string(poly.facet_count()));
    t.kv("vertices", std::to_string(poly.vertices().size()));
    t.kv("volume", to_double(poly.body().volume()));

    // barycenter containment and distances as a smoke check
    Eigen::VectorXd bary = Eigen::VectorXd::Zero(Eigen::Index(poly.dim()));
    for (const auto& v : poly.vertices())
        for (size_t j = 0; j < poly.dim(); ++j) bary(Eigen::Index(j)) += to_double(v[j]);
    bary /= double(poly.vertices().size());
    t.kv("barycenter_inside", poly.contains(bary) ? "true" : "false");
    t.kv("min_barycenter_distance", poly.lattice_distances(bary).minCoeff());

    for (const auto& v : poly.vertices()) {
        auto chart = poly.vertex_chart(v);
        Rational det = chart.linear_det();
        if (det != 1 && det != -1) throw std::runtime_error("vertex chart is not unimodular");
    }
    t.kv("vertex_charts_unimodular", "true");

    t.columns = {"face_dim", "active_set", "lattice_measure"};
    QuadratureOptions opts = options_from(args);
    for (const auto& f : poly.faces()) {
        std::string act;
        for (size_t i : f.active) act += (act.empty() ? "" : " ") + std::to_string(i);
        double measure =
            integrate_face(poly, f, [](const Eigen::VectorXd&) { return 1.0; }, opts).value;
        t.rows.push_back({std::to_string(f.dimension), act, format_double(measure)});
    }
    emit(t, args.format, args.out_path);
    std::cerr << "delzant: true, vertices: " << poly.vertices().size() << "\n";
    return kExitOk;
}

// ----------------------------------------------------------------- lattice

int run_lattice(const CommonArgs& args, std::int64_t n_level) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    auto dilated = poly.dilate(n_level);  // level-N polytope in lattice units
    auto pts = poly.lattice_points(n_level);
    OutputTable t = make_table("lattice", args, &poly);
    t.kv("N", std::to_string(n_level));
    t.kv("count", std::to_string(pts.size()));
    t.kv("dilated_volume", to_double(dilated.body().volume()));
    for (size_t j = 0; j < poly.dim(); ++j) t.columns.push_back("k" + std::to_string(j));
    for (const auto& k : pts) {
        std::vector<std::string> row;
        for (auto c : k) row.push_back(std::to_string(c));
        t.rows.push_back(std::move(row));
    }
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// -------------------------------------------------------------- kernel-eval

int run_kernel_eval(const CommonArgs& args, std::int64_t n_level, const std::string& x_text,
                    const std::string& y_text, const std::string& k_text, bool asymptotic) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    KernelContext ctx(poly, n_level, options_from(args));
    Eigen::VectorXd x = to_vec(parse_point(x_text));
    OutputTable t = make_table("kernel-eval", args, &poly);
    t.kv("N", std::to_string(n_level));
    t.kv("x", x_text);

    std::string act;
    for (size_t i : poly.active_set(x)) act += (act.empty() ? "" : " ") + std::to_string(i);
    t.kv("active_set", act.empty() ? "(interior)" : act);
    t.kv("log_c", ctx.log_c(x));

    auto rep = argmax_phi_report(poly, x);
    t.kv("argmax_gradient_norm", rep.gradient_norm);
    t.kv("argmax_distance_to_x", (rep.point - x).lpNorm<Eigen::Infinity>());

    t.columns = {"quantity", "value"};
    if (!y_text.empty()) {
        Eigen::VectorXd y = to_vec(parse_point(y_text));
        t.rows.push_back({"phi", format_double(ctx.phi(x, y))});
        t.rows.push_back({"kernel", format_double(ctx.kernel(x, y))});
        if (!k_text.empty()) {
            IntVec k = to_intvec(parse_int_list(k_text));
            t.rows.push_back({"section_norm", format_double(ctx.section_norm(k, y))});
            if (asymptotic) {
                Eigen::VectorXd xk = ctx.lattice_to_point(k);
                t.rows.push_back({"section_norm_prediction",
                                  format_double(pointwise_norm_asymptotic(poly, double(n_level),
                                                                          xk, y))});
            }
        }
    }
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// ---------------------------------------------------------------- transform

int run_transform(const CommonArgs& args, std::int64_t n_level, const std::string& f_text,
                  const std::string& x_text, size_t orthant_dim) {
    std::vector<double> xv = parse_point(x_text);
    Eigen::VectorXd x = to_vec(xv);
    OutputTable t = make_table("transform", args, nullptr);
    t.kv("N", std::to_string(n_level));
    t.kv("x", x_text);
    t.kv("f", f_text);
    double value = 0.0;
    if (orthant_dim > 0) {
        Polynomial f = parse_polynomial_arg(f_text, orthant_dim);
        OrthantModel model(orthant_dim, 0.0, options_from(args));
        value = model.transform([&](const Eigen::VectorXd& y) { return f(y); }, x,
                                double(n_level));
        t.kv("domain", "orthant:" + std::to_string(orthant_dim));
    } else {
        DelzantPolytope poly = load_polytope_file(args.polytope_path);
        t.kv("polytope_hash", polytope_hash(poly));
        Polynomial f = parse_polynomial_arg(f_text, poly.dim());
        KernelContext ctx(poly, n_level, options_from(args));
        value = ctx.transform([&](const Eigen::VectorXd& y) { return f(y); }, x);
    }
    t.columns = {"quantity", "value"};
    t.rows.push_back({"transform", format_double(value)});
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// ------------------------------------------------------------------- expand

int run_expand(const CommonArgs& args, const std::string& f_text, const std::string& x_text,
               int order, const std::string& grid_text, size_t orthant_dim) {
    Eigen::VectorXd x = to_vec(parse_point(x_text));
    std::vector<std::int64_t> grid =
        grid_text.empty() ? default_level_grid() : parse_int_list(grid_text);
    ExpansionReport rep;
    OutputTable t = make_table("expand", args, nullptr);
    if (orthant_dim > 0) {
        Polynomial f = parse_polynomial_arg(f_text, orthant_dim);
        OrthantModel model(orthant_dim, 0.0, options_from(args));
        rep = extract_expansion_orthant(model, grid,
                                        [&](const Eigen::VectorXd& y) { return f(y); }, x, order);
        t.kv("domain", "orthant:" + std::to_string(orthant_dim));
        t.kv("model_P1", model_p1(f, x));
    } else {
        DelzantPolytope poly = load_polytope_file(args.polytope_path);
        t.kv("polytope_hash", polytope_hash(poly));
        Polynomial f = parse_polynomial_arg(f_text, poly.dim());
        rep = extract_expansion(poly, grid, [&](const Eigen::VectorXd& y) { return f(y); }, x,
                                order, options_from(args));
    }
    t.kv("x", x_text);
    t.kv("f", f_text);
    t.kv("order", std::to_string(order));
    for (size_t i = 0; i < rep.coefficients.size(); ++i)
        t.kv("a" + std::to_string(i), rep.coefficients[i]);
    t.kv("residual_norm", rep.residual_norm);
    t.kv("condition", rep.condition);
    t.kv("tail_order", rep.tail_order);
    t.columns = {"N", "value", "prediction", "ratio"};
    for (size_t i = 0; i < rep.n_grid.size(); ++i) {
        double pred = 0.0, p = 1.0;
        for (double a : rep.coefficients) {
            pred += a * p;
            p /= double(rep.n_grid[i]);
        }
        t.rows.push_back({std::to_string(rep.n_grid[i]), format_double(rep.values[i]),
                          format_double(pred), format_double(rep.values[i] / pred)});
    }
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// ------------------------------------------------------------------ density

int run_density(const CommonArgs& args, std::int64_t n_level, int grid_points) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    SpectralMeasure mu(poly, n_level, options_from(args));
    OutputTable t = make_table("density", args, &poly);
    t.kv("N", std::to_string(n_level));
    t.kv("lattice_count", std::to_string(mu.weights().size()));
    for (size_t j = 0; j < poly.dim(); ++j) t.columns.push_back("y" + std::to_string(j));
    t.columns.push_back("density");

    // grid over the bounding box, filtered to the closed polytope
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(Eigen::Index(poly.dim()), 1e300);
    Eigen::VectorXd hi = -lo;
    for (const auto& v : poly.vertices())
        for (size_t j = 0; j < poly.dim(); ++j) {
            lo(Eigen::Index(j)) = std::min(lo(Eigen::Index(j)), to_double(v[j]));
            hi(Eigen::Index(j)) = std::max(hi(Eigen::Index(j)), to_double(v[j]));
        }
    std::vector<Eigen::VectorXd> points;
    std::vector<int> idx(poly.dim(), 0);
    while (true) {
        Eigen::VectorXd y(Eigen::Index(poly.dim()));
        for (size_t j = 0; j < poly.dim(); ++j) {
            double u = grid_points > 1 ? double(idx[j]) / double(grid_points - 1) : 0.5;
            y(Eigen::Index(j)) = lo(Eigen::Index(j)) +
                                 (hi(Eigen::Index(j)) - lo(Eigen::Index(j))) * u;
        }
        if (poly.contains(y, 1e-12)) points.push_back(y);
        size_t j = poly.dim();
        bool done = true;
        while (j > 0) {
            --j;
            if (idx[j] + 1 < grid_points) {
                ++idx[j];
                for (size_t l = j + 1; l < poly.dim(); ++l) idx[l] = 0;
                done = false;
                break;
            }
        }
        if (done) break;
    }
    std::vector<double> vals(points.size());
    parallel_for(points.size(), [&](size_t i) { vals[i] = mu.spectral_density(points[i]); });
    for (size_t i = 0; i < points.size(); ++i) {
        std::vector<std::string> row;
        for (size_t j = 0; j < poly.dim(); ++j)
            row.push_back(format_double(points[i](Eigen::Index(j))));
        row.push_back(format_double(vals[i]));
        t.rows.push_back(std::move(row));
    }
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// --------------------------------------------------------------------- pair

int run_pair(const CommonArgs& args, std::int64_t n_level, const std::string& f_text,
             const std::string& k_text, int expand_order, const std::string& grid_text) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    Polynomial f = parse_polynomial_arg(f_text, poly.dim());
    auto fn = [&](const Eigen::VectorXd& y) { return f(y); };
    OutputTable t = make_table("pair", args, &poly);
    t.kv("N", std::to_string(n_level));
    t.kv("f", f_text);
    t.columns = {"quantity", "value"};
    if (!k_text.empty()) {
        SpectralMeasure mu(poly, n_level, options_from(args));
        IntVec k = to_intvec(parse_int_list(k_text));
        t.rows.push_back({"eigensection_average", format_double(mu.eigensection_average(k, fn))});
    } else if (expand_order >= 0) {
        std::vector<std::int64_t> grid =
            grid_text.empty() ? std::vector<std::int64_t>{} : parse_int_list(grid_text);
        auto rep = asymptotic_pairing(poly, fn, expand_order, grid, options_from(args));
        for (size_t i = 0; i < rep.coefficients.size(); ++i)
            t.rows.push_back({"c" + std::to_string(i), format_double(rep.coefficients[i])});
        t.kv("residual_norm", rep.residual_norm);
    } else {
        SpectralMeasure mu(poly, n_level, options_from(args));
        t.rows.push_back({"pair", format_double(mu.pair(fn))});
    }
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// ------------------------------------------------------------------ moments

int run_moments(const CommonArgs& args, std::int64_t n_level, const std::string& k_text,
                const std::string& m_list, bool laplace) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    SpectralMeasure mu(poly, n_level, options_from(args));
    IntVec k = to_intvec(parse_int_list(k_text));
    OutputTable t = make_table("moments", args, &poly);
    t.kv("N", std::to_string(n_level));
    t.kv("k", k_text);
    if (laplace) {
        Eigen::VectorXd x = mu.context().lattice_to_point(k);
        double lc = mu.context().log_c(x);
        double pred = log_laplace_normalization(poly, double(n_level), x);
        t.kv("laplace_ratio", std::exp(lc - pred));
        t.kv("hessian_det", hessian_form(poly, x).determinant);
    }
    t.columns = {"m", "value", "prediction", "ratio"};
    for (std::int64_t m : parse_int_list(m_list)) {
        auto res = mu.moment(k, int(m));
        t.rows.push_back({std::to_string(m), format_double(res.value),
                          res.prediction ? format_double(*res.prediction) : "",
                          res.ratio ? format_double(*res.ratio) : ""});
    }
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// ------------------------------------------------------------- distribution

int run_distribution(const CommonArgs& args, std::int64_t n_level, const std::string& k_text,
                     const std::string& t_grid_text, int t_count, double t_max) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    SpectralMeasure mu(poly, n_level, options_from(args));
    IntVec k = to_intvec(parse_int_list(k_text));
    std::vector<double> ts;
    if (!t_grid_text.empty()) {
        for (double v : parse_point(t_grid_text)) ts.push_back(v);
    } else {
        for (int i = 1; i <= t_count; ++i) ts.push_back(t_max * double(i) / double(t_count));
    }
    auto table = mu.distribution_function(k, ts, options_from(args));
    OutputTable t = make_table("distribution", args, &poly);
    t.kv("N", std::to_string(n_level));
    t.kv("k", k_text);
    t.columns = {"t", "volume"};
    for (const auto& [tv, vol] : table)
        t.rows.push_back({format_double(tv), format_double(vol)});
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// ----------------------------------------------------------------- em-check

int run_em_check(const CommonArgs& args, const std::string& f_text, std::int64_t n_level,
                 int order, const std::string& grid_text) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    Polynomial f = parse_polynomial_arg(f_text, poly.dim());
    auto fn = [&](const Eigen::VectorXd& y) { return f(y); };
    OutputTable t = make_table("em-check", args, &poly);
    t.kv("f", f_text);
    t.kv("order", std::to_string(order));
    auto tau = tau_coefficients(order);
    std::string tau_text;
    for (const auto& c : tau.coefficients)
        tau_text += (tau_text.empty() ? "" : " ") + c.convert_to<std::string>();
    t.kv("tau_coefficients", tau_text);
    t.columns = {"N", "order", "riemann_sum", "em_sum", "abs_error"};
    std::vector<std::int64_t> grid =
        grid_text.empty() ? std::vector<std::int64_t>{n_level} : parse_int_list(grid_text);
    std::vector<int> orders{order};
    auto rep = em_error_report(poly, fn, grid, orders);
    for (const auto& row : rep.rows)
        t.rows.push_back({std::to_string(row.n_level), std::to_string(row.order),
                          format_double(row.riemann), format_double(row.em),
                          format_double(row.abs_error)});
    for (const auto& [m, slope] : rep.fitted_slopes)
        t.kv("slope_order_" + std::to_string(m), slope);
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// ----------------------------------------------------------------- localize

int run_localize(const CommonArgs& args, const std::string& x_text, const std::string& g_center,
                 double g_radius, const std::string& grid_text) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    Eigen::VectorXd x = to_vec(parse_point(x_text));
    Eigen::VectorXd c = to_vec(parse_point(g_center));
    auto f = [](const Eigen::VectorXd&) { return 1.0; };
    auto g = [&](const Eigen::VectorXd& y) { return bump_window(((y - c) / g_radius).eval()); };
    std::vector<std::int64_t> grid = grid_text.empty()
                                         ? std::vector<std::int64_t>{20, 40, 60, 80, 100, 120}
                                         : parse_int_list(grid_text);
    OutputTable t = make_table("localize", args, &poly);
    t.kv("x", x_text);
    t.kv("g_center", g_center);
    t.kv("g_radius", g_radius);
    t.columns = {"N", "log_ratio"};
    std::vector<double> ns, lrs;
    for (std::int64_t n_level : grid) {
        KernelContext ctx(poly, n_level, options_from(args));
        auto r = localization_ratio(ctx, f, g, x);
        ns.push_back(double(n_level));
        lrs.push_back(r.log_ratio);
        t.rows.push_back({std::to_string(n_level), format_double(r.log_ratio)});
    }
    auto fit = fit_line(ns, lrs);
    t.kv("slope", fit.slope);
    t.kv("r_squared", fit.r_squared);
    emit(t, args.format, args.out_path);
    return kExitOk;
}

// -------------------------------------------------------------------- pinch

int run_pinch(const CommonArgs& args, const std::string& k_text, std::int64_t n_base,
              double delta, const std::string& mult_text) {
    DelzantPolytope poly = load_polytope_file(args.polytope_path);
    IntVec k = to_intvec(parse_int_list(k_text));
    std::vector<std::int64_t> mults =
        mult_text.empty() ? std::vector<std::int64_t>{1, 2, 4, 8} : parse_int_list(mult_text);
    auto psi = [](const Eigen::VectorXd& u) { return bump_window(u); };
    auto rep = pinched_average(poly, k, n_base, delta, psi, mults, options_from(args));
    OutputTable t = make_table("pinch", args, &poly);
    t.kv("k", k_text);
    t.kv("N_base", std::to_string(n_base));
    t.kv("delta", delta);
    t.kv("sigma0", rep.sigma0);
    t.kv("second_exponent", rep.second_exponent);
    t.kv("exponent_r_squared", rep.exponent_r_squared);
    t.kv("window_escaped", rep.window_escaped ? "true" : "false");
    t.columns = {"N", "value"};
    for (size_t i = 0; i < rep.n_grid.size(); ++i)
        t.rows.push_back({std::to_string(rep.n_grid[i]), format_double(rep.values[i])});
    emit(t, args.format, args.out_path);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"toric-spectra: spectral density toolkit for Delzant polytopes"};
    app.require_subcommand(1);

    // validate
    CommonArgs a_validate;
    auto* c_validate = app.add_subcommand("validate", toric::cli::subcommand_table()[0].summary);
    add_common(c_validate, a_validate);

    // lattice
    CommonArgs a_lattice;
    std::int64_t lattice_n = 1;
    auto* c_lattice = app.add_subcommand("lattice", toric::cli::subcommand_table()[1].summary);
    add_common(c_lattice, a_lattice);
    c_lattice->add_option("--N", lattice_n, "dilation level")->required();

    // kernel-eval
    CommonArgs a_kernel;
    std::int64_t kernel_n = 1;
    std::string kernel_x, kernel_y, kernel_k;
    bool kernel_asym = false;
    auto* c_kernel = app.add_subcommand("kernel-eval", toric::cli::subcommand_table()[2].summary);
    add_common(c_kernel, a_kernel);
    c_kernel->add_option("--N", kernel_n)->required();
    c_kernel->add_option("--x", kernel_x, "point, comma-separated")->required();
    c_kernel->add_option("--y", kernel_y, "second point");
    c_kernel->add_option("--k", kernel_k, "lattice weight of N*Delta");
    c_kernel->add_flag("--asymptotic", kernel_asym, "include the pointwise norm prediction");

    // transform
    CommonArgs a_transform;
    std::int64_t transform_n = 1;
    std::string transform_f, transform_x;
    size_t transform_orthant = 0;
    auto* c_transform = app.add_subcommand("transform", toric::cli::subcommand_table()[3].summary);
    c_transform->add_option("--polytope", a_transform.polytope_path, "polytope JSON file");
    c_transform->add_option("--out", a_transform.out_path);
    c_transform->add_option("--format", a_transform.format)->check(CLI::IsMember({"csv", "json"}));
    c_transform->add_option("--threads", a_transform.threads);
    c_transform->add_flag("--stamp", a_transform.stamp);
    c_transform->add_option("--tol", a_transform.tol);
    c_transform->add_option("--N", transform_n)->required();
    c_transform->add_option("--f", transform_f, "polynomial (poly: spec or multi-index JSON)")
        ->required();
    c_transform->add_option("--x", transform_x)->required();
    c_transform->add_option("--orthant", transform_orthant,
                            "use the truncated orthant model of this dimension");

    // expand
    CommonArgs a_expand;
    std::string expand_f, expand_x, expand_grid;
    int expand_order = 2;
    size_t expand_orthant = 0;
    auto* c_expand = app.add_subcommand("expand", toric::cli::subcommand_table()[4].summary);
    c_expand->add_option("--polytope", a_expand.polytope_path, "polytope JSON file");
    c_expand->add_option("--out", a_expand.out_path);
    c_expand->add_option("--format", a_expand.format)->check(CLI::IsMember({"csv", "json"}));
    c_expand->add_option("--threads", a_expand.threads);
    c_expand->add_flag("--stamp", a_expand.stamp);
    c_expand->add_option("--tol", a_expand.tol);
    c_expand->add_option("--f", expand_f)->required();
    c_expand->add_option("--x", expand_x)->required();
    c_expand->add_option("--order", expand_order);
    c_expand->add_option("--N-grid", expand_grid, "comma-separated levels");
    c_expand->add_option("--orthant", expand_orthant);

    // density
    CommonArgs a_density;
    std::int64_t density_n = 1;
    int density_grid = 101;
    auto* c_density = app.add_subcommand("density", toric::cli::subcommand_table()[5].summary);
    add_common(c_density, a_density);
    c_density->add_option("--N", density_n)->required();
    c_density->add_option("--grid", density_grid, "grid points per axis");

    // pair
    CommonArgs a_pair;
    std::int64_t pair_n = 1;
    std::string pair_f, pair_k, pair_grid;
    int pair_expand = -1;
    auto* c_pair = app.add_subcommand("pair", toric::cli::subcommand_table()[6].summary);
    add_common(c_pair, a_pair);
    c_pair->add_option("--N", pair_n)->required();
    c_pair->add_option("--f", pair_f)->required();
    c_pair->add_option("--k", pair_k, "weight: compute the eigensection average instead");
    c_pair->add_option("--expand-order", pair_expand, "fit the N-expansion of N^{-n} pair(f)");
    c_pair->add_option("--N-grid", pair_grid, "levels for --expand-order");

    // moments
    CommonArgs a_moments;
    std::int64_t moments_n = 1;
    std::string moments_k, moments_m = "1,2,3";
    bool moments_laplace = false;
    auto* c_moments = app.add_subcommand("moments", toric::cli::subcommand_table()[7].summary);
    add_common(c_moments, a_moments);
    c_moments->add_option("--N", moments_n)->required();
    c_moments->add_option("--k", moments_k)->required();
    c_moments->add_option("--m-list", moments_m, "comma-separated moment orders");
    c_moments->add_flag("--laplace", moments_laplace, "include the c_N Laplace ratio");

    // distribution
    CommonArgs a_dist;
    std::int64_t dist_n = 1;
    std::string dist_k, dist_tgrid;
    int dist_tcount = 50;
    double dist_tmax = 0.0;
    auto* c_dist = app.add_subcommand("distribution", toric::cli::subcommand_table()[8].summary);
    add_common(c_dist, a_dist);
    c_dist->add_option("--N", dist_n)->required();
    c_dist->add_option("--k", dist_k)->required();
    c_dist->add_option("--t-grid", dist_tgrid, "explicit thresholds, comma-separated");
    c_dist->add_option("--t-count", dist_tcount);
    c_dist->add_option("--t-max", dist_tmax);

    // em-check
    CommonArgs a_em;
    std::string em_f;
    std::int64_t em_n = 4;
    int em_order = 2;
    std::string em_grid;
    auto* c_em = app.add_subcommand("em-check", toric::cli::subcommand_table()[9].summary);
    add_common(c_em, a_em);
    c_em->add_option("--f", em_f)->required();
    c_em->add_option("--N", em_n);
    c_em->add_option("--order", em_order);
    c_em->add_option("--N-grid", em_grid);

    // localize
    CommonArgs a_loc;
    std::string loc_x, loc_center, loc_grid;
    double loc_radius = 0.05;
    auto* c_loc = app.add_subcommand("localize", toric::cli::subcommand_table()[10].summary);
    add_common(c_loc, a_loc);
    c_loc->add_option("--x", loc_x)->required();
    c_loc->add_option("--g-center", loc_center, "bump center for the numerator")->required();
    c_loc->add_option("--g-radius", loc_radius);
    c_loc->add_option("--N-grid", loc_grid);

    // pinch
    CommonArgs a_pinch;
    std::string pinch_k, pinch_mults;
    std::int64_t pinch_base = 50;
    double pinch_delta = 0.25;
    auto* c_pinch = app.add_subcommand("pinch", toric::cli::subcommand_table()[11].summary);
    add_common(c_pinch, a_pinch);
    c_pinch->add_option("--k", pinch_k, "base weight at level N-base")->required();
    c_pinch->add_option("--N-base", pinch_base);
    c_pinch->add_option("--delta", pinch_delta);
    c_pinch->add_option("--multipliers", pinch_mults, "level multipliers, comma-separated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*c_validate) {
            apply_threads(a_validate);
            return run_validate(a_validate);
        }
        if (*c_lattice) {
            apply_threads(a_lattice);
            return run_lattice(a_lattice, lattice_n);
        }
        if (*c_kernel) {
            apply_threads(a_kernel);
            return run_kernel_eval(a_kernel, kernel_n, kernel_x, kernel_y, kernel_k, kernel_asym);
        }
        if (*c_transform) {
            apply_threads(a_transform);
            if (transform_orthant == 0 && a_transform.polytope_path.empty()) {
                std::cerr << "transform: need --polytope or --orthant\n";
                return kExitUsage;
            }
            return run_transform(a_transform, transform_n, transform_f, transform_x,
                                 transform_orthant);
        }
        if (*c_expand) {
            apply_threads(a_expand);
            if (expand_orthant == 0 && a_expand.polytope_path.empty()) {
                std::cerr << "expand: need --polytope or --orthant\n";
                return kExitUsage;
            }
            return run_expand(a_expand, expand_f, expand_x, expand_order, expand_grid,
                              expand_orthant);
        }
        if (*c_density) {
            apply_threads(a_density);
            return run_density(a_density, density_n, density_grid);
        }
        if (*c_pair) {
            apply_threads(a_pair);
            return run_pair(a_pair, pair_n, pair_f, pair_k, pair_expand, pair_grid);
        }
        if (*c_moments) {
            apply_threads(a_moments);
            return run_moments(a_moments, moments_n, moments_k, moments_m, moments_laplace);
        }
        if (*c_dist) {
            apply_threads(a_dist);
            if (dist_tgrid.empty() && dist_tmax <= 0.0) {
                std::cerr << "distribution: need --t-grid or --t-max\n";
                return kExitUsage;
            }
            return run_distribution(a_dist, dist_n, dist_k, dist_tgrid, dist_tcount, dist_tmax);
        }
        if (*c_em) {
            apply_threads(a_em);
            return run_em_check(a_em, em_f, em_n, em_order, em_grid);
        }
        if (*c_loc) {
            apply_threads(a_loc);
            return run_localize(a_loc, loc_x, loc_center, loc_radius, loc_grid);
        }
        if (*c_pinch) {
            apply_threads(a_pinch);
            return run_pinch(a_pinch, pinch_k, pinch_base, pinch_delta, pinch_mults);
        }
        std::cerr << "no subcommand selected\n";
        return kExitUsage;
    } catch (const PolytopeError& e) {
        std::cerr << "polytope validation failed: " << e.what() << "\n";
        return kExitValidation;
    } catch (const QuadratureError& e) {
        std::cerr << "numerical non-convergence: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const OptimizationError& e) {
        std::cerr << "numerical non-convergence: " << e.what() << "\n";
        return kExitNonConvergence;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid parameter: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitOther;
    }
}
