#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qduhamel/duhamel.hpp"

namespace qduhamel {

/// Certificate for a stored lattice solution of D_t U = A U + F: pointwise
/// residuals from the Jackson quotient of the stored values only.
///
/// The quotient divides 1-ulp representation noise of the stored values by
/// t(1-q); once t(1-q) drops toward eps * |U| no stored-value certificate can
/// resolve residuals at the requested tolerance. Each point therefore carries
/// its resolution floor, and certification is against max(tolerance, floor).
struct ResidualReport {
    std::vector<double> times;           // checked points (those with qt stored)
    std::vector<double> point_residuals; // inf-norm residual per checked point
    std::vector<double> fp_floors;       // per-point resolution floor
    double max_residual = 0.0;           // over points with floor <= tolerance
    double max_residual_raw = 0.0;       // over all checked points
    int unresolved_points = 0;           // points with floor > tolerance
    std::vector<double> initial_errors;  // per datum; filled by the caller
    double tolerance = 0.0;
    double initial_tolerance = 0.0;
    bool pass = false;
    std::string provenance;
    int lattice_depth = 0;
    int integral_depth = 0;
    double quad_tail_tol = 0.0;
};

/// Evaluate residual(t) = (U(t) - U(qt)) / (t(1-q)) - A U(t) - F(t) at every
/// lattice point whose lower neighbour is stored. Never re-solves: the
/// certificate is a pure function of the stored values and the problem data.
ResidualReport q_residual(const LatticeSolution& solution, const Eigen::MatrixXd& a,
                          const std::function<Eigen::VectorXd(double)>& forcing,
                          QParam q, double tolerance);

/// Merge initial-condition errors into a report. The seed heuristic at the
/// deepest lattice point carries an O(t_min) error, so the gate uses its own
/// tolerance rather than the residual one.
void apply_initial_errors(ResidualReport& report, std::vector<double> errors,
                          double initial_tolerance);

/// Per-datum error |state component j at the deepest point - u_j|.
std::vector<double> initial_condition_check(const DuhamelResult& result,
                                            const CauchyProblem& problem);

/// Brute-force deep Jackson summation, ground truth for truncation studies.
double oracle_q_integral(const ScalarField1D& f, double t, QParam q,
                         int big_depth = 2000);

struct LimitStudyRow {
    double q;
    double sup_error; // sup over that q's lattice of |u_q - u_classical|
};

struct LimitStudyResult {
    std::vector<LimitStudyRow> rows;
    bool monotone_flag_valid = false; // needs at least two rows
    bool strictly_decreasing = false;
};

/// Scalar affine family u' = lambda u + f(t) (polynomial f): solve the
/// q-problem for each q and compare against the exact classical solution.
/// Shared auxiliary chains are enabled internally so q near 1 stays cheap.
LimitStudyResult limit_study(double lambda, const std::vector<double>& forcing_poly,
                             double u0, const std::vector<double>& q_list,
                             double t_max = 1.0, int lattice_depth = 60,
                             QuadratureOptions opts = {});

inline constexpr unsigned kDefaultIdentitySeed = 12345u;

struct IdentityReport {
    struct Item {
        std::string name;
        double max_error = 0.0;
        double tolerance = 0.0;
        bool pass = false;
    };
    struct RubinProbe {
        double q;
        double rubin;       // five-point operator value on f(x) = x at x = 1
        double jackson_sum; // D_q f + D_{1/q} f at the same point
        double discrepancy; // |rubin - jackson_sum|, reported not asserted
    };
    std::vector<Item> items; // monomial, product rule, fundamental theorem, parametric rule
    std::vector<RubinProbe> rubin_probes;
    bool pass = false; // all items; probes are informational
};

/// Randomized polynomial identity checks plus the Rubin-relation probe.
/// Coefficients are uniform on [-1,1] from a fixed seeded generator.
IdentityReport identity_suite(const std::vector<double>& q_list, int degree_bound,
                              unsigned seed = kDefaultIdentitySeed,
                              int integral_depth = 200, double tolerance = 1e-9,
                              int num_polynomials = 100);

} // namespace qduhamel
