#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "qduhamel/operators.hpp"
#include "qduhamel/qcore.hpp"

namespace qduhamel {

/// Time-dependent forcing F(t) -> component vector. identically_zero lets
/// solvers skip the quadrature entirely.
struct Forcing {
    std::function<Eigen::VectorXd(double)> eval;
    bool identically_zero = false;

    static Forcing zero(Eigen::Index dim);
    static Forcing constant(Eigen::VectorXd value);
    /// Scalar rule broadcast across `dim` components.
    static Forcing broadcast(std::function<double(double)> rule, Eigen::Index dim,
                             bool is_zero = false);
};

/// Cauchy problem in the normal form  D_t^{(k)} u - L u = f  with data
/// u_j prescribed at the origin, reported on the given time lattice.
struct CauchyProblem {
    int order = 1;
    LinearOperator spatial_op;           // L, acting on N spatial dofs
    Forcing forcing;                     // f(t) -> N-vector
    std::vector<Eigen::VectorXd> initial; // u_0 .. u_{k-1}
    TimeLattice lattice;
    double tolerance = 1e-8;

    void validate() const;
};

struct SolutionMetadata {
    std::string solver;
    int lattice_depth = 0;
    int integral_depth_used = 0;   // quadrature depth actually summed
    double quad_tail_tol = 0.0;
    long step_count = 0;           // implicit solves performed
    std::vector<std::string> warnings;
    std::vector<std::string> component_names;
};

/// Solution values on a TimeLattice, one state vector per lattice point.
class LatticeSolution {
public:
    LatticeSolution(TimeLattice lattice, Eigen::Index dim);

    const TimeLattice& lattice() const { return lattice_; }
    Eigen::Index dim() const { return dim_; }
    const Eigen::VectorXd& value(int m) const;
    void set_value(int m, Eigen::VectorXd v); // rejects non-finite entries

    SolutionMetadata meta;

private:
    TimeLattice lattice_;
    Eigen::Index dim_;
    std::vector<Eigen::VectorXd> values_;
};

/// One implicit lattice step: solves (I - t(1-q)A) U(t) = U(qt).
/// Throws PoleError naming t and the eigenvalue estimate 1/(t(1-q)) when the
/// system is singular.
Eigen::VectorXd step_implicit(const Eigen::VectorXd& value_at_qt, double t,
                              const Eigen::MatrixXd& a, QParam q);

/// Homogeneous propagation D_t U = A U from the origin: seeds the deepest
/// lattice point with u0 and steps upward, i.e. a depth-M truncation of the
/// operator q-exponential product applied to u0.
LatticeSolution propagate_from_origin(const Eigen::VectorXd& u0,
                                      const Eigen::MatrixXd& a,
                                      const TimeLattice& lattice);

/// Homogeneous problem launched at a lattice point s with the datum given at
/// qs. Propagation to any lattice target above s is exact (finitely many
/// implicit steps, no truncation).
struct AuxiliaryProblem {
    TimeLattice lattice;
    int s_index = 0;            // s = lattice.point(s_index)
    Eigen::VectorXd data_at_qs;
    Eigen::MatrixXd a;

    void validate() const;
};

/// Value at lattice point target_index >= ... <= s_index (targets sit above s).
Eigen::VectorXd propagate_from_lattice_point(const AuxiliaryProblem& aux,
                                             int target_index);

/// Full chain of values at indices s_index down to target_index, in visiting
/// order (index s_index first). Used by exactness checks.
std::vector<Eigen::VectorXd> propagate_chain(const AuxiliaryProblem& aux,
                                             int target_index);

namespace detail {

/// Reusable implicit stepper; scalar systems take a division-only fast path.
class ImplicitStepper {
public:
    ImplicitStepper(const Eigen::MatrixXd& a, QParam q);
    Eigen::VectorXd step(const Eigen::VectorXd& value_at_qt, double t);
    void step_in_place(Eigen::VectorXd& value, double t);
    long steps_taken() const { return count_; }

private:
    const Eigen::MatrixXd& a_;
    double one_minus_q_;
    long count_ = 0;
    Eigen::MatrixXd system_;
};

} // namespace detail

} // namespace qduhamel
