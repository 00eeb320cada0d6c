#include "qduhamel/propagator.hpp"

#include <cmath>
#include <utility>

namespace qduhamel {

Forcing Forcing::zero(Eigen::Index dim) {
    Forcing f;
    f.eval = [dim](double) { return Eigen::VectorXd::Zero(dim).eval(); };
    f.identically_zero = true;
    return f;
}

Forcing Forcing::constant(Eigen::VectorXd value) {
    Forcing f;
    f.identically_zero = value.isZero(0.0);
    f.eval = [v = std::move(value)](double) { return v; };
    return f;
}

Forcing Forcing::broadcast(std::function<double(double)> rule, Eigen::Index dim,
                           bool is_zero) {
    Forcing f;
    f.identically_zero = is_zero;
    f.eval = [rule = std::move(rule), dim](double t) {
        return Eigen::VectorXd::Constant(dim, rule(t)).eval();
    };
    return f;
}

void CauchyProblem::validate() const {
    if (order < 1) {
        throw ConfigError("problem order must be >= 1");
    }
    if (static_cast<int>(initial.size()) != order) {
        throw ConfigError("initial data count must equal the order k");
    }
    const Eigen::Index n = spatial_op.dim();
    for (const auto& u : initial) {
        if (u.size() != n) {
            throw ConfigError("initial datum dimension does not match the operator");
        }
        if (!u.allFinite()) {
            throw ConfigError("initial data must be finite");
        }
    }
    if (!spatial_op.mat.allFinite()) {
        throw ConfigError("operator entries must be finite");
    }
    if (!(tolerance > 0.0)) {
        throw ConfigError("tolerance must be positive");
    }
    if (!forcing.eval) {
        throw ConfigError("forcing rule missing");
    }
}

LatticeSolution::LatticeSolution(TimeLattice lattice, Eigen::Index dim)
    : lattice_(std::move(lattice)), dim_(dim) {
    values_.assign(static_cast<std::size_t>(lattice_.size()),
                   Eigen::VectorXd::Zero(dim_));
    meta.lattice_depth = lattice_.depth();
}

const Eigen::VectorXd& LatticeSolution::value(int m) const {
    if (m < 0 || m >= lattice_.size()) {
        throw DomainError("lattice index out of range");
    }
    return values_[static_cast<std::size_t>(m)];
}

void LatticeSolution::set_value(int m, Eigen::VectorXd v) {
    if (m < 0 || m >= lattice_.size()) {
        throw DomainError("lattice index out of range");
    }
    if (v.size() != dim_) {
        throw ConfigError("stored value has wrong dimension");
    }
    if (!v.allFinite()) {
        throw EvaluationError("non-finite solution value at lattice index " +
                              std::to_string(m));
    }
    values_[static_cast<std::size_t>(m)] = std::move(v);
}

namespace detail {

ImplicitStepper::ImplicitStepper(const Eigen::MatrixXd& a, QParam q)
    : a_(a), one_minus_q_(q.one_minus()) {
    if (a_.rows() != a_.cols()) {
        throw ConfigError("operator matrix must be square");
    }
}

Eigen::VectorXd ImplicitStepper::step(const Eigen::VectorXd& value_at_qt, double t) {
    Eigen::VectorXd out = value_at_qt;
    step_in_place(out, t);
    return out;
}

void ImplicitStepper::step_in_place(Eigen::VectorXd& value, double t) {
    ++count_;
    const double c = t * one_minus_q_;
    const Eigen::Index n = a_.rows();
    if (n == 1) {
        const double denom = 1.0 - c * a_(0, 0);
        if (std::abs(denom) <= 1e-14 * (1.0 + std::abs(c * a_(0, 0)))) {
            throw PoleError(t, 1.0 / c);
        }
        value(0) /= denom;
        return;
    }
    system_ = -c * a_;
    system_.diagonal().array() += 1.0;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system_);
    const auto diag = lu.matrixLU().diagonal().cwiseAbs();
    if (diag.minCoeff() <= 1e-13 * std::max(diag.maxCoeff(), 1.0)) {
        throw PoleError(t, 1.0 / c);
    }
    value = lu.solve(value);
}

} // namespace detail

Eigen::VectorXd step_implicit(const Eigen::VectorXd& value_at_qt, double t,
                              const Eigen::MatrixXd& a, QParam q) {
    if (value_at_qt.size() != a.rows()) {
        throw ConfigError("state dimension does not match the operator");
    }
    detail::ImplicitStepper stepper(a, q);
    return stepper.step(value_at_qt, t);
}

LatticeSolution propagate_from_origin(const Eigen::VectorXd& u0,
                                      const Eigen::MatrixXd& a,
                                      const TimeLattice& lattice) {
    if (u0.size() != a.rows()) {
        throw ConfigError("initial datum dimension does not match the operator");
    }
    LatticeSolution out(lattice, u0.size());
    out.meta.solver = "propagate_from_origin";
    if (lattice.depth() < 10) {
        out.meta.warnings.push_back("lattice depth < 10: seeding error may dominate");
    }
    detail::ImplicitStepper stepper(a, lattice.q());
    Eigen::VectorXd v = u0;
    out.set_value(lattice.depth(), v);
    for (int m = lattice.depth() - 1; m >= 0; --m) {
        stepper.step_in_place(v, lattice.point(m));
        out.set_value(m, v);
    }
    out.meta.step_count = stepper.steps_taken();
    return out;
}

void AuxiliaryProblem::validate() const {
    if (s_index < 0 || s_index >= lattice.size()) {
        throw LatticeAlignmentError("auxiliary start s is not a lattice point");
    }
    if (data_at_qs.size() != a.rows() || a.rows() != a.cols()) {
        throw ConfigError("auxiliary datum dimension does not match the operator");
    }
}

Eigen::VectorXd propagate_from_lattice_point(const AuxiliaryProblem& aux,
                                             int target_index) {
    aux.validate();
    if (target_index < 0 || target_index > aux.s_index) {
        throw LatticeAlignmentError(
            "target is not reachable from s by upward lattice steps");
    }
    detail::ImplicitStepper stepper(aux.a, aux.lattice.q());
    Eigen::VectorXd v = aux.data_at_qs;
    for (int m = aux.s_index; m >= target_index; --m) {
        stepper.step_in_place(v, aux.lattice.point(m));
    }
    return v;
}

std::vector<Eigen::VectorXd> propagate_chain(const AuxiliaryProblem& aux,
                                             int target_index) {
    aux.validate();
    if (target_index < 0 || target_index > aux.s_index) {
        throw LatticeAlignmentError(
            "target is not reachable from s by upward lattice steps");
    }
    detail::ImplicitStepper stepper(aux.a, aux.lattice.q());
    std::vector<Eigen::VectorXd> chain;
    chain.reserve(static_cast<std::size_t>(aux.s_index - target_index) + 1);
    Eigen::VectorXd v = aux.data_at_qs;
    for (int m = aux.s_index; m >= target_index; --m) {
        stepper.step_in_place(v, aux.lattice.point(m));
        chain.push_back(v);
    }
    return chain;
}

} // namespace qduhamel
