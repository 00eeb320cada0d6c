#include <doctest.h>

#include <cmath>

#include "qduhamel/qcore.hpp"

using namespace qduhamel;

TEST_CASE("QParam accepts (0,1) only") {
    CHECK_THROWS_AS(QParam(0.0), ConfigError);
    CHECK_THROWS_AS(QParam(1.0), ConfigError);
    CHECK_THROWS_AS(QParam(1.2), ConfigError);
    CHECK_THROWS_AS(QParam(-0.5), ConfigError);
    CHECK(QParam(0.5).value() == 0.5);
}

TEST_CASE("q_bracket basic values and monotonicity") {
    const QParam q(0.5);
    CHECK(q_bracket(1.0, q) == doctest::Approx(1.0));
    CHECK(q_bracket(0.0, q) == doctest::Approx(0.0));
    CHECK(q_bracket(2.0, q) == doctest::Approx(1.5));
    double prev = -1.0;
    for (double alpha = 0.0; alpha <= 5.0; alpha += 0.25) {
        const double b = q_bracket(alpha, q);
        CHECK(b > prev);
        prev = b;
    }
}

TEST_CASE("q_factorial") {
    const QParam q(0.5);
    CHECK(q_factorial(0, q) == doctest::Approx(1.0));
    CHECK(q_factorial(2, q) == doctest::Approx(1.5));
    CHECK(q_factorial(3, q) == doctest::Approx(2.625));
    CHECK_THROWS_AS(q_factorial(-1, q), DomainError);
}

TEST_CASE("TimeLattice is multiplicatively exact") {
    const QParam q(0.7);
    const TimeLattice lattice(2.0, q, 40);
    CHECK(lattice.size() == 41);
    CHECK(lattice.t_max() == 2.0);
    for (int m = 0; m + 1 < lattice.size(); ++m) {
        CHECK(lattice.point(m + 1) == lattice.point(m) * 0.7); // exact closure
        CHECK(lattice.point(m + 1) < lattice.point(m));
        CHECK(lattice.point(m + 1) > 0.0);
    }
    CHECK(lattice.index_of(lattice.point(17)).value() == 17);
    CHECK_FALSE(lattice.index_of(0.123456).has_value());
    CHECK_THROWS_AS(TimeLattice(-1.0, q, 10), ConfigError);
    CHECK_THROWS_AS(TimeLattice(1.0, q, 0), ConfigError);
}

TEST_CASE("ScalarField1D table and rule agree on lattice points") {
    const QParam q(0.5);
    const TimeLattice lattice(1.0, q, 20);
    const ScalarField1D hybrid(lattice, [](double x) { return x * x; });
    for (int m = 0; m < lattice.size(); ++m) {
        const double p = lattice.point(m);
        CHECK(hybrid(p) == p * p);
    }
    CHECK(hybrid(0.37) == doctest::Approx(0.37 * 0.37));

    const ScalarField1D table_only(lattice, std::vector<double>(21, 3.0));
    CHECK(table_only(lattice.point(5)) == 3.0);
    CHECK_THROWS_AS(table_only(0.123), DomainError);
}

TEST_CASE("jackson derivative examples") {
    const QParam q(0.5);
    const ScalarField1D constant([](double) { return 7.0; });
    CHECK(jackson_derivative(constant, 1.0, q) == doctest::Approx(0.0));

    const ScalarField1D square([](double x) { return x * x; });
    CHECK(jackson_derivative(square, 1.0, q) == doctest::Approx(1.5));

    const ScalarField1D cube([](double x) { return x * x * x; });
    CHECK(jackson_derivative(cube, 2.0, QParam(0.9)) ==
          doctest::Approx(10.84).epsilon(1e-9));

    CHECK_THROWS_AS(jackson_derivative(square, 0.0, q), DomainError);
}

TEST_CASE("inverse jackson derivative examples") {
    const QParam q(0.5);
    const ScalarField1D constant([](double) { return 4.0; });
    CHECK(inverse_jackson_derivative(constant, 1.0, q) == doctest::Approx(0.0));
    const ScalarField1D linear([](double x) { return x; });
    CHECK(inverse_jackson_derivative(linear, 1.0, q) == doctest::Approx(1.0));
    const ScalarField1D square([](double x) { return x * x; });
    CHECK(inverse_jackson_derivative(square, 1.0, q) == doctest::Approx(3.0));
    CHECK_THROWS_AS(inverse_jackson_derivative(square, 0.0, q), DomainError);
}

TEST_CASE("rubin derivative examples") {
    const QParam q(0.5);
    const ScalarField1D linear([](double x) { return x; });
    CHECK(rubin_derivative(linear, 1.0, q) == doctest::Approx(1.0));
    const ScalarField1D constant([](double) { return -2.0; });
    CHECK(rubin_derivative(constant, 1.0, q) == doctest::Approx(0.0));
    const ScalarField1D square([](double x) { return x * x; });
    CHECK(rubin_derivative(square, 1.0, q) == doctest::Approx(6.0));
    CHECK_THROWS_AS(rubin_derivative(square, 0.0, q), DomainError);
}

TEST_CASE("monomial rule to machine accuracy") {
    for (double qv : {0.3, 0.5, 0.9}) {
        const QParam q(qv);
        for (int n = 1; n <= 8; ++n) {
            const ScalarField1D mono([n](double x) { return std::pow(x, n); });
            for (double x : {0.25, 1.0, 2.0}) {
                const double expected = q_bracket(n, q) * std::pow(x, n - 1);
                const double got = jackson_derivative(mono, x, q);
                const double scale = std::max(1.0, std::abs(expected));
                CHECK(std::abs(got - expected) / scale <= 1e-12);
            }
        }
    }
}

TEST_CASE("q product rule is exact for polynomials") {
    for (double qv : {0.3, 0.5, 0.9}) {
        const QParam q(qv);
        const ScalarField1D f([](double x) { return 1.0 - 0.5 * x + x * x * x; });
        const ScalarField1D g([](double x) { return 0.25 + x * x; });
        const ScalarField1D fg([](double x) {
            return (1.0 - 0.5 * x + x * x * x) * (0.25 + x * x);
        });
        for (double x : {0.25, 0.7, 1.3, 2.0}) {
            const double lhs = jackson_derivative(fg, x, q);
            const double rhs = f(qv * x) * jackson_derivative(g, x, q) +
                               jackson_derivative(f, x, q) * g(x);
            CHECK(std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)) <= 1e-12);
        }
    }
}

TEST_CASE("derivatives approach the classical ones as q -> 1") {
    const ScalarField1D f([](double x) { return std::exp(x); });
    const double x = 0.7;
    const double exact = std::exp(x);
    double prev_jackson = 1e300;
    double prev_rubin = 1e300;
    for (double qv : {0.9, 0.99, 0.999}) {
        const QParam q(qv);
        const double ej = std::abs(jackson_derivative(f, x, q) - exact);
        const double er = std::abs(rubin_derivative(f, x, q) - exact);
        CHECK(ej < prev_jackson);
        CHECK(er < prev_rubin);
        prev_jackson = ej;
        prev_rubin = er;
    }
}

TEST_CASE("jackson integral closed forms") {
    const QParam q(0.5);
    const ScalarField1D one([](double) { return 1.0; });
    const ScalarField1D s([](double t) { return t; });
    const ScalarField1D s2([](double t) { return t * t; });
    CHECK(jackson_integral(one, 0.0, 1.0, q, 200, 1e-12).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(jackson_integral(s, 0.0, 1.0, q, 200, 1e-12).value ==
          doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(jackson_integral(s2, 0.0, 1.0, q, 200, 1e-12).value ==
          doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("jackson integral tail reporting and errors") {
    const QParam q(0.5);
    const ScalarField1D one([](double) { return 1.0; });
    const QIntegral shallow = jackson_integral(one, 0.0, 1.0, q, 5, 1e-12);
    CHECK(shallow.tail_estimate > 0.0);
    CHECK(shallow.tail_warning);
    // the f == 1 tail extrapolation is exact: value + tail telescopes to b
    CHECK(shallow.value + shallow.tail_estimate == doctest::Approx(1.0).epsilon(1e-14));

    const QIntegral deep = jackson_integral(one, 0.0, 1.0, q, 200, 1e-12);
    CHECK_FALSE(deep.tail_warning);

    const ScalarField1D bad([](double t) { return t < 0.01 ? std::nan("") : 1.0; });
    CHECK_THROWS_AS(jackson_integral(bad, 0.0, 1.0, q, 200, 1e-12), EvaluationError);
    CHECK_THROWS_AS(jackson_integral(one, -1.0, 1.0, q, 200, 1e-12), DomainError);
}

TEST_CASE("fundamental theorem for polynomials") {
    for (double qv : {0.3, 0.5, 0.9}) {
        const QParam q(qv);
        const ScalarField1D f([](double x) { return 0.3 - x + 0.8 * x * x + x * x * x * x; });
        const ScalarField1D dqf([qv](double x) {
            const auto poly = [](double y) { return 0.3 - y + 0.8 * y * y + y * y * y * y; };
            return (poly(x) - poly(qv * x)) / (x * (1.0 - qv));
        });
        for (double a : {0.2, 0.55}) {
            for (double x : {0.4, 1.0}) {
                const double integral = jackson_integral(dqf, a, x, q, 200, 1e-9).value;
                CHECK(std::abs(integral - (f(x) - f(a))) <= 1e-9);
            }
        }
    }
}

TEST_CASE("parametric integral rule examples") {
    const QParam q(0.5);
    const auto bilinear = [](double x, double t) { return x * t; };
    const LeibnizForms forms = q_leibniz_parametric(bilinear, 1.0, q, 200, 1e-10);
    CHECK(forms.form1 == doctest::Approx(7.0 / 6.0).epsilon(1e-10));
    CHECK(std::abs(forms.form1 - forms.form2) <= 1e-10);

    const auto t_only = [](double, double t) { return t; };
    const LeibnizForms forms2 = q_leibniz_parametric(t_only, 1.0, q, 200, 1e-10);
    CHECK(forms2.form1 == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(forms2.form2 == doctest::Approx(1.0).epsilon(1e-10));

    CHECK_THROWS_AS(q_leibniz_parametric(bilinear, 0.0, q, 200, 1e-10), DomainError);
    const ScalarField1D one([](double) { return 1.0; });
    CHECK_THROWS_AS(jackson_integral(one, 0.0, 1.0, q, 0, 1e-10), ConfigError);
}

TEST_CASE("parametric rule matches the direct quotient of F") {
    const QParam q(0.5);
    const auto f = [](double x, double t) { return (1.0 + x * x) * t - 0.5 * t * t * x; };
    const auto big_f = [&](double y) {
        const ScalarField1D integrand([&f, y](double t) { return f(y, t); });
        return jackson_integral(integrand, 0.0, y, q, 300, 1e-12).value;
    };
    for (double x : {0.4, 0.8, 1.0}) {
        const double direct = (big_f(x) - big_f(0.5 * x)) / (x * 0.5);
        const LeibnizForms forms = q_leibniz_parametric(f, x, q, 300, 1e-12);
        CHECK(std::abs(direct - forms.form1) <= 1e-10);
        CHECK(std::abs(direct - forms.form2) <= 1e-10);
    }
}

TEST_CASE("q-exponential values and cross-checks") {
    const QParam q(0.5);
    CHECK(q_exponential(0.0, q, QExpMode::series) == 1.0);
    CHECK(q_exponential(0.0, q, QExpMode::product) == 1.0);

    const double series = q_exponential(1.0, q, QExpMode::series, 60);
    const double product = q_exponential(1.0, q, QExpMode::product, 60);
    CHECK(series == doctest::Approx(3.4627).epsilon(1e-3));
    CHECK(std::abs(series - product) <= 1e-10);

    CHECK(q_exponential(-1.0, q, QExpMode::product, 60) ==
          doctest::Approx(0.4194).epsilon(1e-3));

    for (double qv : {0.5, 0.9}) {
        const QParam qq(qv);
        for (double z : {0.5, -0.5, 1.0, -1.0}) {
            const double s = q_exponential(z, qq, QExpMode::series, 60);
            const double p = q_exponential(z, qq, QExpMode::product, 60);
            CHECK(std::abs(s - p) <= 1e-10);
        }
    }
}

TEST_CASE("q-exponential error modes") {
    const QParam q(0.5);
    CHECK_THROWS_AS(q_exponential(2.5, q, QExpMode::series), RadiusError);
    CHECK_THROWS_AS(q_exponential(2.0, q, QExpMode::product), PoleError);
}

TEST_CASE("q-exponential is the D_q eigenfunction") {
    const QParam q(0.5);
    const double lambda = 0.7;
    const TimeLattice lattice(1.0, q, 20);
    const ScalarField1D eq([&](double t) {
        return q_exponential(lambda * t, q, QExpMode::product, 80);
    });
    for (int m = 0; m + 1 < lattice.size(); ++m) {
        const double t = lattice.point(m);
        const double lhs = jackson_derivative(eq, t, q);
        const double rhs = lambda * eq(t);
        CHECK(std::abs(lhs - rhs) <= 1e-9);
    }
}
