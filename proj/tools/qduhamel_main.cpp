#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "qduhamel/problem_spec.hpp"

namespace {

using namespace qduhamel;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFail = 1;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr double kInitialConditionTolerance = 1e-2;

std::vector<double> parse_q_list(const std::string& joined) {
    std::vector<double> out;
    std::stringstream ss(joined);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) {
            continue;
        }
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw ConfigError("--q entries must be numbers, got '" + item + "'");
        }
    }
    if (out.empty()) {
        throw ConfigError("--q list is empty");
    }
    return out;
}

DuhamelResult run_solver(const ProblemSpec& spec, int depth_override, double tol_override,
                         int threads) {
    QuadratureOptions opts = spec.quadrature_options();
    if (depth_override > 0) {
        opts.min_depth = depth_override;
    }
    opts.threads = threads;
    const double tolerance = tol_override > 0 ? tol_override : spec.tolerance();
    if (spec.is_block()) {
        CoupledProblem problem = spec.make_coupled();
        problem.tolerance = tolerance;
        return solve_coupled(problem, spec.coupled_order(),
                             spec.mode() == SolveMode::q_lattice ? SolveMode::q_lattice
                                                                 : SolveMode::classical,
                             opts, spec.step_h());
    }
    CauchyProblem problem = spec.make_cauchy();
    problem.tolerance = tolerance;
    if (spec.mode() == SolveMode::classical) {
        return solve_classical_korder(problem, spec.step_h());
    }
    return solve_q_korder(problem, opts);
}

int cmd_solve(const std::string& config, const std::string& out, int depth_override,
              double tol_override, int threads) {
    const ProblemSpec spec = ProblemSpec::load(config);
    const DuhamelResult result = run_solver(spec, depth_override, tol_override, threads);
    write_solution_csv(out, result.state);
    write_solution_meta(out + ".meta", result.state, spec, result.system);
    std::cout << "wrote " << out << " (" << result.state.lattice().size()
              << " lattice points x " << result.state.dim() << " components)\n";
    return kExitOk;
}

int cmd_verify(const std::string& config, const std::string& solution,
               const std::string& out, double tol_override) {
    const ProblemSpec spec = ProblemSpec::load(config);
    const auto meta = read_meta(solution + ".meta");
    char hash_hex[32];
    std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                  static_cast<unsigned long long>(spec.config_hash()));
    const auto stored = meta.find("spec_hash");
    if (stored == meta.end() || stored->second != hash_hex) {
        throw ConfigError("spec hash mismatch: solution was not produced from this config");
    }
    if (spec.mode() != SolveMode::q_lattice) {
        throw ConfigError("verify certifies q-mode solutions only");
    }

    const BlockOperator sys = spec.make_system();
    const TimeLattice lattice = spec.make_lattice();
    const LatticeSolution state = read_solution_csv(solution, lattice, sys.dim());
    const Forcing forcing = spec.make_state_forcing(sys);
    const double tol = tol_override > 0 ? tol_override : spec.tolerance();

    ResidualReport report =
        q_residual(state, sys.normalized_a(), forcing.eval, QParam(spec.q_value()), tol);
    report.provenance = meta.count("solver") ? meta.at("solver") : "unknown";
    if (meta.count("integral_depth_used")) {
        report.integral_depth = std::stoi(meta.at("integral_depth_used"));
    }
    if (meta.count("quad_tail_tol")) {
        report.quad_tail_tol = std::stod(meta.at("quad_tail_tol"));
    }

    const Eigen::VectorXd u0_state = spec.make_initial_state(sys);
    const Eigen::VectorXd& deepest = state.value(lattice.depth());
    std::vector<double> initial_errors;
    for (const auto& c : sys.layout.components) {
        initial_errors.push_back((deepest.segment(c.offset, c.size) -
                                  u0_state.segment(c.offset, c.size))
                                     .lpNorm<Eigen::Infinity>());
    }
    apply_initial_errors(report, std::move(initial_errors), kInitialConditionTolerance);

    write_residual_report(out, report);
    std::cout << "max_residual=" << format_double(report.max_residual)
              << " pass=" << (report.pass ? "true" : "false") << '\n';
    return report.pass ? kExitOk : kExitVerifyFail;
}

int cmd_limit_study(const std::string& config, const std::string& q_list_raw,
                    const std::string& out) {
    const ProblemSpec spec = ProblemSpec::load(config);
    if (!spec.scalar_affine()) {
        throw ConfigError(
            "limit-study requires a scalar operator with polynomial forcing and order 1");
    }
    std::vector<double> q_list =
        q_list_raw.empty() ? std::vector<double>{spec.q_value()} : parse_q_list(q_list_raw);
    QuadratureOptions opts = spec.quadrature_options();
    const LimitStudyResult result =
        limit_study(spec.scalar_lambda(), spec.forcing_poly(), spec.scalar_u0(), q_list,
                    spec.t_max(), spec.lattice_depth(), opts);
    write_limit_study_csv(out, result);
    for (const auto& row : result.rows) {
        std::cout << "q=" << format_double(row.q)
                  << " sup_error=" << format_double(row.sup_error) << '\n';
    }
    if (result.monotone_flag_valid) {
        std::cout << "strictly_decreasing="
                  << (result.strictly_decreasing ? "true" : "false") << '\n';
    }
    return kExitOk;
}

int cmd_identities(const std::string& q_list_raw, double tol, int depth, unsigned seed,
                   const std::string& out) {
    const std::vector<double> q_list =
        q_list_raw.empty() ? std::vector<double>{0.3, 0.5, 0.9} : parse_q_list(q_list_raw);
    const IdentityReport report = identity_suite(q_list, 6, seed, depth, tol, 100);
    std::ostringstream text;
    for (const auto& item : report.items) {
        text << "identity=" << item.name << " max_error=" << format_double(item.max_error)
             << " tolerance=" << format_double(item.tolerance)
             << " pass=" << (item.pass ? "true" : "false") << '\n';
    }
    for (const auto& probe : report.rubin_probes) {
        text << "rubin_probe q=" << format_double(probe.q)
             << " rubin=" << format_double(probe.rubin)
             << " jackson_sum=" << format_double(probe.jackson_sum)
             << " discrepancy=" << format_double(probe.discrepancy) << '\n';
    }
    std::cout << text.str();
    if (!out.empty()) {
        std::ofstream file(out, std::ios::binary);
        if (!file) {
            throw ConfigError("cannot write identities report " + out);
        }
        file << text.str();
    }
    return report.pass ? kExitOk : kExitVerifyFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"q-Duhamel solvers for nonhomogeneous q-evolution equations"};
    app.require_subcommand(1);

    std::string config;
    std::string out;
    std::string solution;
    std::string q_list;
    double tol = -1.0;
    int depth = -1;
    unsigned seed = qduhamel::kDefaultIdentitySeed;
    int threads = 1;

    auto* solve = app.add_subcommand("solve", "solve a problem spec, write solution CSV");
    solve->add_option("--config", config, "problem spec (JSON)")->required();
    solve->add_option("--out", out, "solution CSV path")->required();
    solve->add_option("--depth", depth, "quadrature minimum depth override");
    solve->add_option("--tol", tol, "tolerance override (drives the quadrature tail)");
    solve->add_option("--threads", threads, "quadrature worker threads");

    auto* verify = app.add_subcommand("verify", "certify a solution table by its residual");
    verify->add_option("--config", config, "problem spec (JSON)")->required();
    verify->add_option("--solution", solution, "solution CSV from solve")->required();
    verify->add_option("--out", out, "residual report path")->required();
    verify->add_option("--tol", tol, "residual tolerance override");

    auto* limit = app.add_subcommand("limit-study", "q -> 1 comparison vs classical");
    limit->add_option("--config", config, "scalar affine problem spec")->required();
    limit->add_option("--q", q_list, "comma-separated q values");
    limit->add_option("--out", out, "error table CSV path")->required();

    auto* identities = app.add_subcommand("identities", "run the q-calculus identity suite");
    identities->add_option("--q", q_list, "comma-separated q values");
    identities->add_option("--tol", tol, "identity tolerance (default 1e-9)");
    identities->add_option("--depth", depth, "integral depth (default 200)");
    identities->add_option("--seed", seed, "random polynomial seed");
    identities->add_option("--out", out, "optional report path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*solve) {
            return cmd_solve(config, out, depth, tol, threads);
        }
        if (*verify) {
            return cmd_verify(config, solution, out, tol);
        }
        if (*limit) {
            return cmd_limit_study(config, q_list, out);
        }
        if (*identities) {
            return cmd_identities(q_list, tol > 0 ? tol : 1e-9, depth > 0 ? depth : 200,
                                  seed, out);
        }
    } catch (const qduhamel::PoleError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const qduhamel::EvaluationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const qduhamel::RadiusError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return kExitInput;
}
