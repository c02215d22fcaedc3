#include "support.hpp"

#include "wolbdyn/errors.hpp"
#include "wolbdyn/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

#ifdef WOLBDYN_HAVE_EIGEN
#include <Eigen/Dense>
#endif

using namespace wolbdyn;
using num::Matrix;

TEST_SUITE("numerics") {

TEST_CASE("trapezoid is exact on linear data and second order on smooth data") {
    std::vector<double> lin{1.0, 3.0, 5.0, 7.0};  // y = 1 + 2x on [0, 3]
    CHECK(num::trapezoid(lin, 1.0) == doctest::Approx(12.0).epsilon(1e-15));

    auto err = [](int n) {
        std::vector<double> y(n + 1);
        const double h = std::numbers::pi / n;
        for (int j = 0; j <= n; ++j) y[j] = std::sin(j * h);
        return std::abs(num::trapezoid(y, h) - 2.0);
    };
    const double ratio = err(100) / err(200);
    CHECK(ratio == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("cumulative trapezoid starts at zero and ends at the full integral") {
    std::vector<double> y{0.0, 1.0, 4.0, 9.0, 16.0};
    const auto c = num::cumulative_trapezoid(y, 0.5);
    REQUIRE(c.size() == y.size());
    CHECK(c.front() == 0.0);
    CHECK(c.back() == doctest::Approx(num::trapezoid(y, 0.5)).epsilon(1e-15));
    for (std::size_t k = 1; k < c.size(); ++k) CHECK(c[k] >= c[k - 1]);
}

TEST_CASE("bisection and bracket expansion") {
    const auto f = [](double x) { return x * x - 2.0; };
    const auto r = num::bisect(f, 0.0, 2.0);
    CHECK(std::abs(r.root - std::sqrt(2.0)) < 1e-12);
    CHECK(r.iterations > 30);
    CHECK_THROWS_AS(num::bisect(f, 2.0, 3.0), DomainError);

    const auto g = [](double x) { return 1000.0 - x; };
    const double hi = num::expand_bracket(g, 0.0, 1.0);
    CHECK(hi == 1024.0);
    CHECK_THROWS_AS(num::expand_bracket([](double) { return 1.0; }, 0.0, 1.0, 20), DivergenceError);
}

TEST_CASE("bisection stops on interval exhaustion without looping") {
    const auto step = [](double x) { return x < 0.3 ? -1.0 : 1.0; };
    const auto r = num::bisect(step, 0.0, 1.0, {0.0, 200});
    CHECK(std::abs(r.root - 0.3) < 1e-15);
    CHECK(r.iterations < 200);
}

TEST_CASE("stable real quadratic roots") {
    const auto r = num::real_quadratic_roots(1.0, -1e8, 1.0);
    REQUIRE(r.size() == 2);
    CHECK(r[0] == doctest::Approx(1e-8).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(1e8).epsilon(1e-14));
    CHECK(num::real_quadratic_roots(1.0, 0.0, 1.0).empty());
    const auto lin = num::real_quadratic_roots(0.0, 2.0, -1.0);
    REQUIRE(lin.size() == 1);
    CHECK(lin[0] == 0.5);
    CHECK(num::real_quadratic_roots(1.0, -2.0, 1.0).size() == 1);
}

TEST_CASE("determinant and characteristic polynomial on fixed matrices") {
    const Matrix a{{2, -1, 0, 3}, {1, 4, -2, 0}, {0, 5, 1, -1}, {3, 0, 2, 2}};
    CHECK(num::determinant(a) == doctest::Approx(-74.0).epsilon(1e-14));
    const auto c = num::characteristic_polynomial(a);
    REQUIRE(c.size() == 5);
    CHECK(c[0] == 1.0);
    CHECK(c[1] == doctest::Approx(-9.0));  // -trace
    CHECK(c[4] == doctest::Approx(-74.0));  // det for even n
}

TEST_CASE("polynomial roots of a product of linear factors") {
    const std::vector<double> p{1.0, -10.0, 35.0, -50.0, 24.0};
    const auto r = num::polynomial_roots(p);
    REQUIRE(r.size() == 4);
    std::vector<double> re;
    for (const auto& z : r) {
        CHECK(std::abs(z.imag()) < 1e-12);
        re.push_back(z.real());
    }
    std::sort(re.begin(), re.end());
    for (int k = 0; k < 4; ++k) CHECK(std::abs(re[k] - (k + 1)) < 1e-12);
}

TEST_CASE("2x2 eigenvalues in closed form, sorted by real part") {
    const Matrix a{{0.0, 1.0}, {-2.0, -3.0}};
    const auto ev = num::eigenvalues(a);
    REQUIRE(ev.size() == 2);
    CHECK(ev[0].real() == doctest::Approx(-2.0));
    CHECK(ev[1].real() == doctest::Approx(-1.0));
    const Matrix rot{{0.0, -1.0}, {1.0, 0.0}};
    const auto ez = num::eigenvalues(rot);
    CHECK(ez[0].imag() == doctest::Approx(-1.0));
    CHECK(ez[1].imag() == doctest::Approx(1.0));
    const auto v = num::eigenvector_2x2(a, -1.0);
    CHECK(std::hypot(v[0], v[1]) == doctest::Approx(1.0));
    CHECK(std::abs(a(0, 0) * v[0] + a(0, 1) * v[1] + v[0]) < 1e-14);
}

TEST_CASE("property: eigenvalues of random 4x4 matrices reproduce trace and determinant") {
    testsupport::Rng rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        Matrix a(4);
        double trace = 0.0;
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) a(r, c) = rng.uniform(-2.0, 2.0);
            trace += a(r, r);
        }
        const auto ev = num::eigenvalues(a);
        std::complex<double> sum = 0.0;
        std::complex<double> prod = 1.0;
        for (const auto& z : ev) {
            sum += z;
            prod *= z;
        }
        CHECK(std::abs(sum - trace) < 1e-9);
        CHECK(std::abs(prod - num::determinant(a)) < 1e-8);
        for (std::size_t k = 1; k < ev.size(); ++k) CHECK(ev[k - 1].real() <= ev[k].real());
    }
}

#ifdef WOLBDYN_HAVE_EIGEN
TEST_CASE("property: 4x4 eigenvalues agree with an independent dense solver") {
    testsupport::Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        Matrix a(4);
        Eigen::Matrix4d e;
        for (int r = 0; r < 4; ++r) {
            for (int c = 0; c < 4; ++c) e(r, c) = a(r, c) = rng.uniform(-1.0, 1.0);
        }
        const auto ours = num::eigenvalues(a);
        const Eigen::Vector4cd ref = e.eigenvalues();
        for (int k = 0; k < 4; ++k) {
            double best = 1e300;
            for (const auto& z : ours) best = std::min(best, std::abs(z - ref(k)));
            CHECK(best < 1e-8);
        }
        CHECK(num::determinant(a) == doctest::Approx(e.determinant()).epsilon(1e-12));
    }
}
#endif

TEST_CASE("linear solve with pivoting; singular systems rejected") {
    const Matrix a{{0.0, 2.0, 1.0}, {1.0, 1.0, 0.0}, {2.0, 0.0, 3.0}};
    const auto x = num::solve(a, {7.0, 3.0, 11.0});
    CHECK(x[0] == doctest::Approx(1.0));
    CHECK(x[1] == doctest::Approx(2.0));
    CHECK(x[2] == doctest::Approx(3.0));
    const Matrix s{{1.0, 2.0}, {2.0, 4.0}};
    CHECK_THROWS_AS(num::solve(s, {1.0, 2.0}), SingularFormulaError);
}

}
