#pragma once

#include <string>
#include <vector>

namespace toric::cli {

/// Engine operations reachable from the command line; the coverage test
/// checks that every operation is wired to at least one subcommand.
inline const std::vector<std::string>& all_operations() {
    static const std::vector<std::string> ops = {
        // polytope
        "load_polytope", "lattice_distances", "lattice_points", "vertex_chart", "shift",
        "vertices", "faces", "contains", "active_set", "dilate",
        // quadrature
        "integrate", "integrate_log", "integrate_face", "superlevel_volume",
        // kernel
        "phi", "argmax_phi", "log_c", "kernel_eval", "transform", "section_norm",
        "localization_ratio",
        // asymptotics
        "hessian_det", "laplace_normalization", "pointwise_norm_asymptotic",
        "extract_expansion", "model_P1", "pinched_average",
        // euler_maclaurin
        "tau_coefficients", "riemann_sum", "em_sum", "em_error_report",
        // measures
        "spectral_density", "pair", "eigensection_average", "moment", "distribution_function",
        "asymptotic_pairing",
    };
    return ops;
}

struct SubcommandInfo {
    std::string name;
    std::string summary;
    std::vector<std::string> operations;
};

inline const std::vector<SubcommandInfo>& subcommand_table() {
    static const std::vector<SubcommandInfo> table = {
        {"validate", "validate a polytope file and report its structure",
         {"load_polytope", "vertices", "faces", "contains", "lattice_distances", "vertex_chart",
          "integrate_face"}},
        {"lattice", "enumerate lattice points of N*Delta",
         {"load_polytope", "lattice_points", "dilate"}},
        {"kernel-eval", "evaluate the phase, kernel, and section norms at points",
         {"load_polytope", "phi", "log_c", "kernel_eval", "argmax_phi", "active_set",
          "section_norm", "pointwise_norm_asymptotic"}},
        {"transform", "apply the kernel transform to a polynomial at a point",
         {"load_polytope", "transform", "integrate"}},
        {"expand", "Richardson-extract the transform expansion over a level grid",
         {"load_polytope", "extract_expansion", "model_P1"}},
        {"density", "tabulate the spectral density over a grid",
         {"load_polytope", "spectral_density", "lattice_points"}},
        {"pair", "pair the spectral measure with a polynomial",
         {"load_polytope", "pair", "eigensection_average", "asymptotic_pairing"}},
        {"moments", "norm-square moments with steepest-descent predictions",
         {"load_polytope", "moment", "hessian_det", "laplace_normalization"}},
        {"distribution", "distribution function of a section norm",
         {"load_polytope", "distribution_function", "superlevel_volume"}},
        {"em-check", "compare lattice Riemann sums with tau-corrected integrals",
         {"load_polytope", "tau_coefficients", "riemann_sum", "em_sum", "em_error_report",
          "shift", "integrate"}},
        {"localize", "exponential localization ratios over a level grid",
         {"load_polytope", "localization_ratio", "integrate_log"}},
        {"pinch", "delta-pinched averages over a level grid",
         {"load_polytope", "pinched_average"}},
    };
    return table;
}

}  // namespace toric::cli
