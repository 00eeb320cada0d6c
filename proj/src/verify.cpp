#include "qduhamel/verify.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace qduhamel {

ResidualReport q_residual(const LatticeSolution& solution, const Eigen::MatrixXd& a,
                          const std::function<Eigen::VectorXd(double)>& forcing,
                          QParam q, double tolerance) {
    const TimeLattice& lattice = solution.lattice();
    if (lattice.size() < 2) {
        throw ConfigError("residual check needs at least two stored lattice points");
    }
    if (solution.dim() != a.rows()) {
        throw ConfigError("solution dimension does not match the operator");
    }
    ResidualReport report;
    report.tolerance = tolerance;
    report.provenance = solution.meta.solver;
    report.lattice_depth = solution.meta.lattice_depth;
    report.integral_depth = solution.meta.integral_depth_used;
    report.quad_tail_tol = solution.meta.quad_tail_tol;

    constexpr double eps = 2.220446049250313e-16;
    bool all_within = true;
    for (int m = 0; m + 1 < lattice.size(); ++m) {
        const double t = lattice.point(m);
        const Eigen::VectorXd& ut = solution.value(m);
        const Eigen::VectorXd& uqt = solution.value(m + 1);
        const Eigen::VectorXd rhs = a * ut + forcing(t);
        const Eigen::VectorXd residual = (ut - uqt) / (t * q.one_minus()) - rhs;
        const double quotient_scale =
            std::max(ut.lpNorm<Eigen::Infinity>(), uqt.lpNorm<Eigen::Infinity>());
        const double floor = 4.0 * eps * (quotient_scale / (t * q.one_minus()) +
                                          rhs.lpNorm<Eigen::Infinity>());
        const double r = residual.lpNorm<Eigen::Infinity>();
        report.times.push_back(t);
        report.point_residuals.push_back(r);
        report.fp_floors.push_back(floor);
        report.max_residual_raw = std::max(report.max_residual_raw, r);
        if (floor <= tolerance) {
            report.max_residual = std::max(report.max_residual, r);
        } else {
            ++report.unresolved_points;
        }
        all_within = all_within && r <= std::max(tolerance, floor);
    }
    report.pass = all_within && report.max_residual <= tolerance;
    return report;
}

void apply_initial_errors(ResidualReport& report, std::vector<double> errors,
                          double initial_tolerance) {
    report.initial_errors = std::move(errors);
    report.initial_tolerance = initial_tolerance;
    bool ok = report.pass;
    for (double e : report.initial_errors) {
        ok = ok && e <= initial_tolerance;
    }
    report.pass = ok;
}

std::vector<double> initial_condition_check(const DuhamelResult& result,
                                            const CauchyProblem& problem) {
    const int deepest = result.state.lattice().depth();
    const auto& components = result.system.layout.components;
    if (components.size() != problem.initial.size()) {
        throw ConfigError("problem order does not match the stored state layout");
    }
    std::vector<double> errors;
    errors.reserve(problem.initial.size());
    const Eigen::VectorXd& state = result.state.value(deepest);
    for (std::size_t j = 0; j < problem.initial.size(); ++j) {
        const auto& c = components[j];
        errors.push_back(
            (state.segment(c.offset, c.size) - problem.initial[j]).lpNorm<Eigen::Infinity>());
    }
    return errors;
}

double oracle_q_integral(const ScalarField1D& f, double t, QParam q, int big_depth) {
    return jackson_integral(f, 0.0, t, q, big_depth,
                            std::numeric_limits<double>::infinity())
        .value;
}

LimitStudyResult limit_study(double lambda, const std::vector<double>& forcing_poly,
                             double u0, const std::vector<double>& q_list,
                             double t_max, int lattice_depth, QuadratureOptions opts) {
    if (q_list.empty()) {
        throw ConfigError("limit study needs a nonempty q list");
    }
    opts.reuse_chains = true;
    LimitStudyResult out;
    for (double qv : q_list) {
        const QParam q(qv);
        CauchyProblem problem{1,
                              LinearOperator::scalar(lambda),
                              Forcing::broadcast(
                                  [forcing_poly](double t) {
                                      double acc = 0.0;
                                      double power = 1.0;
                                      for (double c : forcing_poly) {
                                          acc += c * power;
                                          power *= t;
                                      }
                                      return acc;
                                  },
                                  1, forcing_poly.empty()),
                              {Eigen::VectorXd::Constant(1, u0)},
                              TimeLattice(t_max, q, lattice_depth),
                              1e-8};
        const DuhamelResult solved = solve_q_first(problem, opts);
        double sup = 0.0;
        for (int m = 0; m < problem.lattice.size(); ++m) {
            const double t = problem.lattice.point(m);
            const double exact = scalar_affine_closed_form(lambda, forcing_poly, u0, t);
            sup = std::max(sup, std::abs(solved.state.value(m)(0) - exact));
        }
        out.rows.push_back({qv, sup});
    }
    if (out.rows.size() >= 2) {
        out.monotone_flag_valid = true;
        out.strictly_decreasing = true;
        for (std::size_t i = 1; i < out.rows.size(); ++i) {
            if (!(out.rows[i].sup_error < out.rows[i - 1].sup_error)) {
                out.strictly_decreasing = false;
            }
        }
    }
    return out;
}

namespace {

// Deterministic uniform draw on [-1, 1] independent of library internals.
class CoeffStream {
public:
    explicit CoeffStream(unsigned seed) : rng_(seed) {}
    double next() {
        return 2.0 * (static_cast<double>(rng_()) / 4294967296.0) - 1.0;
    }
    /// Uniform on (lo, hi].
    double next_in(double lo, double hi) {
        return hi - (hi - lo) * (static_cast<double>(rng_()) / 4294967297.0);
    }

private:
    std::mt19937 rng_;
};

double eval_poly(const std::vector<double>& coeffs, double x) {
    double acc = 0.0;
    for (std::size_t i = coeffs.size(); i-- > 0;) {
        acc = acc * x + coeffs[i];
    }
    return acc;
}

std::vector<double> poly_product(const std::vector<double>& a,
                                 const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out[i + j] += a[i] * b[j];
        }
    }
    return out;
}

double scaled_gap(double lhs, double rhs) {
    return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

} // namespace

IdentityReport identity_suite(const std::vector<double>& q_list, int degree_bound,
                              unsigned seed, int integral_depth, double tolerance,
                              int num_polynomials) {
    if (degree_bound < 1) {
        throw ConfigError("identity suite needs degree bound >= 1");
    }
    if (q_list.empty()) {
        throw ConfigError("identity suite needs a nonempty q list");
    }
    IdentityReport report;
    double err_monomial = 0.0;
    double err_product = 0.0;
    double err_fundamental = 0.0;
    double err_leibniz = 0.0;

    for (double qv : q_list) {
        const QParam q(qv);
        CoeffStream stream(seed);

        // (i) monomial rule, deterministic
        for (int n = 1; n <= 8; ++n) {
            for (double x : {0.25, 1.0, 2.0}) {
                const ScalarField1D f([n](double y) { return std::pow(y, n); });
                const double expected = q_bracket(n, q) * std::pow(x, n - 1);
                const double got = jackson_derivative(f, x, q);
                err_monomial = std::max(err_monomial, scaled_gap(got, expected));
            }
        }

        for (int trial = 0; trial < num_polynomials; ++trial) {
            std::vector<double> fc(static_cast<std::size_t>(degree_bound) + 1);
            std::vector<double> gc(static_cast<std::size_t>(degree_bound) + 1);
            for (auto& c : fc) {
                c = stream.next();
            }
            for (auto& c : gc) {
                c = stream.next();
            }
            const ScalarField1D f([fc](double y) { return eval_poly(fc, y); });
            const ScalarField1D g([gc](double y) { return eval_poly(gc, y); });
            const std::vector<double> fg = poly_product(fc, gc);
            const ScalarField1D prod([fg](double y) { return eval_poly(fg, y); });

            // (ii) product rule D_q(fg)(x) = f(qx) D_q g(x) + D_q f(x) g(x)
            for (double x : {0.25, 0.7, 1.3, 2.0}) {
                const double lhs = jackson_derivative(prod, x, q);
                const double rhs = f(qv * x) * jackson_derivative(g, x, q) +
                                   jackson_derivative(f, x, q) * g(x);
                err_product = std::max(err_product, scaled_gap(lhs, rhs));
            }

            // (iii) fundamental theorem on (0, 1]
            {
                const double a = stream.next_in(0.0, 1.0);
                const double x = stream.next_in(0.0, 1.0);
                const ScalarField1D dqf([fc, qv](double y) {
                    return (eval_poly(fc, y) - eval_poly(fc, qv * y)) / (y * (1.0 - qv));
                });
                const double integral =
                    jackson_integral(dqf, a, x, q, integral_depth, tolerance).value;
                err_fundamental =
                    std::max(err_fundamental, std::abs(integral - (f(x) - f(a))));
            }

            // (iv) parametric rule, both forms, on bivariate polynomials
            {
                const int bi_deg = std::min(degree_bound, 3);
                std::vector<std::vector<double>> c(
                    static_cast<std::size_t>(bi_deg) + 1,
                    std::vector<double>(static_cast<std::size_t>(bi_deg) + 1));
                for (auto& row : c) {
                    for (auto& v : row) {
                        v = stream.next();
                    }
                }
                auto bi = [c](double x, double t) {
                    double acc = 0.0;
                    double xp = 1.0;
                    for (const auto& row : c) {
                        acc += xp * eval_poly(row, t);
                        xp *= x;
                    }
                    return acc;
                };
                for (double x : {0.3, 0.6, 1.0}) {
                    const LeibnizForms forms =
                        q_leibniz_parametric(bi, x, q, integral_depth, tolerance);
                    err_leibniz =
                        std::max(err_leibniz, std::abs(forms.form1 - forms.form2));
                }
            }
        }

        // (v) Rubin-relation probe on f(x) = x at x = 1: reported, not asserted.
        {
            const ScalarField1D ident([](double y) { return y; });
            const double rubin = rubin_derivative(ident, 1.0, q);
            const double sum = jackson_derivative(ident, 1.0, q) +
                               inverse_jackson_derivative(ident, 1.0, q);
            report.rubin_probes.push_back({qv, rubin, sum, std::abs(rubin - sum)});
        }
    }

    report.items = {
        {"monomial_rule", err_monomial, tolerance, err_monomial <= tolerance},
        {"product_rule", err_product, tolerance, err_product <= tolerance},
        {"fundamental_theorem", err_fundamental, tolerance, err_fundamental <= tolerance},
        {"parametric_integral_rule", err_leibniz, tolerance, err_leibniz <= tolerance},
    };
    report.pass = true;
    for (const auto& item : report.items) {
        report.pass = report.pass && item.pass;
    }
    return report;
}

} // namespace qduhamel
