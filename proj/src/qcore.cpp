#include "qduhamel/qcore.hpp"

#include <cmath>
#include <limits>

namespace qduhamel {

namespace detail {

bool nearly_equal(double a, double b, double rel_tol) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) <= rel_tol * scale;
}

} // namespace detail

QParam::QParam(double q) : q_(q) {
    if (!(q > 0.0) || !(q < 1.0)) {
        throw ConfigError("q must lie in (0,1)");
    }
}

double q_bracket(double alpha, QParam q) {
    return (1.0 - std::pow(q.value(), alpha)) / q.one_minus();
}

double q_factorial(int n, QParam q) {
    if (n < 0) {
        throw DomainError("q_factorial requires n >= 0");
    }
    double acc = 1.0;
    for (int j = 1; j <= n; ++j) {
        acc *= q_bracket(static_cast<double>(j), q);
    }
    return acc;
}

TimeLattice::TimeLattice(double t_max, QParam q, int depth) : q_(q) {
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw ConfigError("lattice t_max must be finite and > 0");
    }
    if (depth < 1) {
        throw ConfigError("lattice depth must be a positive integer");
    }
    points_.resize(static_cast<std::size_t>(depth) + 1);
    points_[0] = t_max;
    for (int m = 1; m <= depth; ++m) {
        points_[static_cast<std::size_t>(m)] = points_[static_cast<std::size_t>(m - 1)] * q.value();
    }
    if (points_.back() <= 0.0) {
        throw ConfigError("lattice depth underflows to zero; reduce depth");
    }
}

double TimeLattice::point(int m) const {
    if (m < 0 || m >= size()) {
        throw DomainError("lattice index out of range");
    }
    return points_[static_cast<std::size_t>(m)];
}

std::optional<int> TimeLattice::index_of(double t) const {
    for (int m = 0; m < size(); ++m) {
        if (detail::nearly_equal(points_[static_cast<std::size_t>(m)], t)) {
            return m;
        }
    }
    return std::nullopt;
}

ScalarField1D::ScalarField1D(std::function<double(double)> rule) : rule_(std::move(rule)) {}

ScalarField1D::ScalarField1D(const TimeLattice& lattice, std::vector<double> values)
    : lattice_points_(lattice.points()), table_(std::move(values)) {
    if (table_.size() != lattice_points_.size()) {
        throw ConfigError("tabulated field needs one value per lattice point");
    }
}

ScalarField1D::ScalarField1D(const TimeLattice& lattice, std::function<double(double)> rule)
    : rule_(std::move(rule)), lattice_points_(lattice.points()) {
    table_.reserve(lattice_points_.size());
    for (double p : lattice_points_) {
        table_.push_back(rule_(p));
    }
}

double ScalarField1D::operator()(double x) const {
    if (!table_.empty()) {
        for (std::size_t m = 0; m < lattice_points_.size(); ++m) {
            if (detail::nearly_equal(lattice_points_[m], x)) {
                return table_[m];
            }
        }
    }
    if (!rule_) {
        throw DomainError("tabulated field evaluated off its lattice");
    }
    return rule_(x);
}

namespace {

double require_nonzero(double x, const char* op) {
    if (x == 0.0) {
        throw DomainError(std::string(op) + " undefined at x = 0");
    }
    return x;
}

} // namespace

double jackson_derivative(const ScalarField1D& f, double x, QParam q) {
    require_nonzero(x, "jackson_derivative");
    return (f(x) - f(q.value() * x)) / (x * q.one_minus());
}

double inverse_jackson_derivative(const ScalarField1D& f, double x, QParam q) {
    require_nonzero(x, "inverse_jackson_derivative");
    const double inv_q = 1.0 / q.value();
    return (f(x) - f(x * inv_q)) / (x * (1.0 - inv_q));
}

double rubin_derivative(const ScalarField1D& f, double x, QParam q) {
    require_nonzero(x, "rubin_derivative");
    const double xq = x / q.value();
    const double numerator =
        f(xq) + f(-xq) - f(q.value() * x) + f(-q.value() * x) - 2.0 * f(-x);
    return numerator / (2.0 * x * q.one_minus());
}

namespace {

// One-sided sum (1-q) c sum_{m=0}^{depth} q^m f(c q^m) with a geometric
// bound on the dropped remainder.
QIntegral jackson_sum(const ScalarField1D& f, double c, QParam q, int depth) {
    QIntegral out;
    if (c == 0.0) {
        return out;
    }
    const double coef = q.one_minus() * c;
    double qpow = 1.0;
    double xm = c;
    double last = 0.0;
    for (int m = 0; m <= depth; ++m) {
        const double fe = f(xm);
        if (!std::isfinite(fe)) {
            throw EvaluationError("non-finite integrand in Jackson integral");
        }
        last = coef * qpow * fe;
        out.value += last;
        qpow *= q.value();
        xm *= q.value();
    }
    out.tail_estimate = std::abs(last) * q.value() / q.one_minus();
    return out;
}

} // namespace

QIntegral jackson_integral(const ScalarField1D& f, double a, double b, QParam q,
                           int depth, double tail_tol) {
    if (a < 0.0 || b < 0.0) {
        throw DomainError("jackson_integral endpoints must be >= 0");
    }
    if (depth < 1) {
        throw ConfigError("jackson_integral depth must be positive");
    }
    const QIntegral at_b = jackson_sum(f, b, q, depth);
    const QIntegral at_a = jackson_sum(f, a, q, depth);
    QIntegral out;
    out.value = at_b.value - at_a.value;
    out.tail_estimate = at_b.tail_estimate + at_a.tail_estimate;
    out.tail_warning = out.tail_estimate > tail_tol;
    return out;
}

LeibnizForms q_leibniz_parametric(const std::function<double(double, double)>& f,
                                  double x, QParam q, int depth, double tail_tol) {
    if (!(x > 0.0)) {
        throw DomainError("q_leibniz_parametric requires x > 0");
    }
    // D_{q,x} f(x,t), Jackson quotient in the first slot.
    ScalarField1D dqx_f([&f, x, q](double t) {
        return (f(x, t) - f(q.value() * x, t)) / (x * q.one_minus());
    });
    LeibnizForms out;
    out.form1 = f(q.value() * x, x) +
                jackson_integral(dqx_f, 0.0, x, q, depth, tail_tol).value;
    out.form2 = f(x, x) +
                jackson_integral(dqx_f, 0.0, q.value() * x, q, depth, tail_tol).value;
    return out;
}

double q_exponential(double z, QParam q, QExpMode mode, int terms) {
    if (terms < 1) {
        throw ConfigError("q_exponential needs at least one term");
    }
    if (z == 0.0) {
        return 1.0;
    }
    constexpr double eps = 1e-16;
    constexpr int hard_cap = 1000000;

    if (mode == QExpMode::series) {
        const double radius = 1.0 / q.one_minus();
        if (!(std::abs(z) < radius)) {
            throw RadiusError("q_exponential series diverges for |z| >= 1/(1-q); use product mode");
        }
        // Term ratio tends to z(1-q), so the tail past term n is bounded by
        // |term_n| r/(1-r) with r = |z|(1-q) < 1.
        const double r = std::abs(z) * q.one_minus();
        double sum = 1.0;
        double term = 1.0;
        for (int n = 1; n <= hard_cap; ++n) {
            term *= z / q_bracket(static_cast<double>(n), q);
            sum += term;
            if (n >= terms && std::abs(term) * r / (1.0 - r) <= eps * std::abs(sum)) {
                break;
            }
        }
        return sum;
    }

    double prod = 1.0;
    double qpow = 1.0; // q^k
    for (int k = 0; k <= hard_cap; ++k) {
        const double arg = q.one_minus() * qpow * z;
        const double factor = 1.0 - arg;
        if (std::abs(factor) <= 1e-14 * (1.0 + std::abs(arg))) {
            throw PoleError(qpow, z); // pole of the product at (1-q) q^k z = 1
        }
        prod /= factor;
        qpow *= q.value();
        // Remaining factors deviate from 1 by ~ (1-q) q^{k+1} |z| / (1-q).
        if (k + 1 >= terms && qpow * std::abs(z) <= eps) {
            break;
        }
    }
    if (!std::isfinite(prod)) {
        throw EvaluationError("q_exponential product overflowed");
    }
    return prod;
}

} // namespace qduhamel
