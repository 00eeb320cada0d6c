#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "qduhamel/propagator.hpp"

namespace qduhamel {

/// Controls for the q-Duhamel quadrature u(t) = w(t) + (1-q) t sum q^m v(t; t q^m).
/// min_depth is the guaranteed number of retained terms; the sum keeps
/// extending past it until the geometric tail estimate of the dropped
/// remainder falls below tail_tol, so the certified lattice residual tracks
/// the requested tolerance at any q. One uniform depth is used for every
/// reported lattice point.
struct QuadratureOptions {
    int min_depth = 50;
    double tail_tol = 0.0; // <= 0: resolved to problem tolerance * 1e-3
    int max_depth = 400000;
    /// Reuse auxiliary chains across report points (identical arithmetic,
    /// one sweep instead of one chain per (t, s) pair).
    bool reuse_chains = false;
    /// Keep every auxiliary value v(t; s) for decomposition reports.
    bool retain_aux = false;
    /// Worker threads for the per-report-point quadrature loop. Summation
    /// order is fixed per point, so results do not depend on thread count.
    int threads = 1;

    double resolved_tail_tol(double tolerance) const {
        return tail_tol > 0.0 ? tail_tol : tolerance * 1e-3;
    }
};

struct ResidualSummary {
    double max_residual = 0.0;
    bool pass = false;
};

/// Output of a Duhamel composition: the full first-order state together with
/// its homogeneous and quadrature parts (state = homogeneous + quadrature at
/// every lattice point by construction).
struct DuhamelResult {
    BlockOperator system;   // normalized first-order system (layout + matrix)
    Eigen::MatrixXd a;      // normalized A actually stepped with
    Forcing state_forcing;  // forcing of the first-order state system
    LatticeSolution state;
    LatticeSolution homogeneous;
    LatticeSolution quadrature;
    /// retained_aux[j][m] = v(t_j; t_j q^m), filled when retain_aux is set.
    std::vector<std::vector<Eigen::VectorXd>> retained_aux;
    std::optional<ResidualSummary> residual_summary;

    /// Extract one layout component as its own lattice solution.
    LatticeSolution component(std::string_view name) const;
};

/// The first-order system a q-solver steps for this problem: the companion
/// reduction of D_t^{(k)} u - L u = f. Verification rebuilds the same system
/// without re-solving.
BlockOperator problem_system(const CauchyProblem& problem);

/// Lift a problem forcing onto the first-order state (slot k-1 of the
/// companion layout).
Forcing problem_state_forcing(const BlockOperator& sys, const Forcing& f);

/// Order-1 q-Duhamel: u(t) = w(t) + q-integral of auxiliary propagations
/// with datum v(qs) = f(s).
DuhamelResult solve_q_first(const CauchyProblem& problem,
                            const QuadratureOptions& opts = {});

/// Order-2 q-Duhamel via companion reduction; auxiliary state at qs is
/// (0, f(s)), homogeneous initial state (u0, u1).
DuhamelResult solve_q_second(const CauchyProblem& problem,
                             const QuadratureOptions& opts = {});

/// Order-k q-Duhamel, k >= 1; k = 1, 2 coincide with the specialized
/// solvers (same code path).
DuhamelResult solve_q_korder(const CauchyProblem& problem,
                             const QuadratureOptions& opts = {});

/// Classical Duhamel companion: homogeneous part and auxiliary problems by
/// fixed-step RK4 on the companion system (auxiliary data prescribed at s),
/// quadrature by the trapezoidal rule with step <= h.
DuhamelResult solve_classical_korder(const CauchyProblem& problem, double h = 1e-3);

/// Exact solution of u' = lambda u + f(t), u(0) = u0, for polynomial f
/// (coefficients in ascending powers of t). Oracle for limit studies.
double scalar_affine_closed_form(double lambda, const std::vector<double>& poly_coeffs,
                                 double u0, double t);

enum class CoupledOrder { first, second, mixed };
enum class SolveMode { q_lattice, classical };

/// Coupled system  d_t u + L1 u + L2 theta = f,  d_t theta + L3 theta + L4 u = g
/// (with d_t^2 rows for the second/mixed variants), solved through the
/// matching block reduction.
struct CoupledProblem {
    LinearOperator l1, l2, l3, l4;
    Forcing f, g;
    std::vector<Eigen::VectorXd> u_data;      // u0 [, u1]
    std::vector<Eigen::VectorXd> theta_data;  // theta0 [, theta1]
    TimeLattice lattice;
    double tolerance = 1e-8;
};

/// Block system and stacked state forcing for a coupled problem; same
/// assembly the coupled solver uses.
BlockOperator coupled_system(const CoupledProblem& problem, CoupledOrder order);
Forcing coupled_state_forcing(const BlockOperator& sys, const Forcing& f,
                              const Forcing& g);

DuhamelResult solve_coupled(const CoupledProblem& problem, CoupledOrder order,
                            SolveMode mode, const QuadratureOptions& opts = {},
                            double classical_h = 1e-3);

} // namespace qduhamel
