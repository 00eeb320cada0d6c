#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "qduhamel/errors.hpp"

namespace qduhamel {

/// Deformation parameter q, restricted to (0,1).
class QParam {
public:
    explicit QParam(double q);
    double value() const { return q_; }
    double one_minus() const { return 1.0 - q_; }

private:
    double q_;
};

/// q-real number [alpha]_q = (1 - q^alpha)/(1 - q).
double q_bracket(double alpha, QParam q);

/// [n]_q! = prod_{j=1..n} [j]_q, empty product = 1.
double q_factorial(int n, QParam q);

/// Finite truncation {t_max * q^m : m = 0..depth} of the q-time-lattice.
/// Points are built by repeated multiplication, so point(m+1) == q*point(m)
/// holds exactly in floating point.
class TimeLattice {
public:
    TimeLattice(double t_max, QParam q, int depth);

    double t_max() const { return points_.front(); }
    QParam q() const { return q_; }
    int depth() const { return static_cast<int>(points_.size()) - 1; }
    int size() const { return static_cast<int>(points_.size()); }
    double point(int m) const;
    const std::vector<double>& points() const { return points_; }

    /// Index of the lattice point equal to t (within relative tolerance),
    /// or nullopt if t is not on the truncated lattice.
    std::optional<int> index_of(double t) const;

private:
    QParam q_;
    std::vector<double> points_;
};

/// Real-valued field of one variable: an evaluation rule, optionally backed
/// by a table on a TimeLattice. Tabulated points are served from the table;
/// off-lattice evaluation falls back to the rule when one is present.
class ScalarField1D {
public:
    ScalarField1D(std::function<double(double)> rule);
    ScalarField1D(const TimeLattice& lattice, std::vector<double> values);
    ScalarField1D(const TimeLattice& lattice, std::function<double(double)> rule);

    double operator()(double x) const;
    bool tabulated() const { return !table_.empty(); }

private:
    std::function<double(double)> rule_;
    std::vector<double> lattice_points_;
    std::vector<double> table_;
};

/// D_q f(x) = (f(x) - f(qx)) / (x(1-q)). Undefined at x = 0.
double jackson_derivative(const ScalarField1D& f, double x, QParam q);

/// D_{1/q} f(x) = (f(x) - f(x/q)) / (x(1 - 1/q)). Undefined at x = 0.
double inverse_jackson_derivative(const ScalarField1D& f, double x, QParam q);

/// Five-point symmetric q-difference operator
///   [f(x/q) + f(-x/q) - f(qx) + f(-qx) - 2f(-x)] / (2x(1-q)).
double rubin_derivative(const ScalarField1D& f, double x, QParam q);

struct QIntegral {
    double value = 0.0;
    double tail_estimate = 0.0; // geometric extrapolation of the dropped remainder
    bool tail_warning = false;  // tail_estimate exceeded tail_tol
};

/// Jackson integral over [a,b] with a,b >= 0:
///   (1-q) b sum_{m=0}^{depth} q^m f(b q^m)  -  (same at a).
/// The sum is truncated at the given depth; the dropped remainder is bounded
/// by extrapolating the last retained term at ratio q.
QIntegral jackson_integral(const ScalarField1D& f, double a, double b, QParam q,
                           int depth, double tail_tol);

struct LeibnizForms {
    double form1; // f(qx, x) + int_0^x  D_{q,x} f(x,t) d_q t
    double form2; // f(x, x)  + int_0^qx D_{q,x} f(x,t) d_q t
};

/// q-differentiation of F(x) = int_0^x f(x,t) d_q t, both equivalent forms.
/// The first argument slot of f carries the differentiation variable.
LeibnizForms q_leibniz_parametric(const std::function<double(double, double)>& f,
                                  double x, QParam q, int depth, double tail_tol);

enum class QExpMode { series, product };

/// q-exponential e_q(z): power series sum z^n/[n]_q! inside |z| < 1/(1-q),
/// or the product form prod_k (1 - (1-q) q^k z)^{-1} (valid away from poles).
/// `terms` is a floor on the expansion length; both forms keep extending
/// until the truncation tail clears machine-level accuracy, so the two
/// representations agree wherever both are defined.
double q_exponential(double z, QParam q, QExpMode mode = QExpMode::product,
                     int terms = 60);

namespace detail {
/// Relative closeness test used for lattice/grid point matching.
bool nearly_equal(double a, double b, double rel_tol = 1e-9);
} // namespace detail

} // namespace qduhamel
