#pragma once

// Small numerical kernels shared by the model modules: uniform-grid
// quadrature, bracketed scalar root finding, and dense eigen/determinant
// routines for the tiny (2x2 .. 4x4) matrices that occur in stability
// analysis.

#include <complex>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

namespace wolbdyn::num {

// Composite trapezoid rule on a uniform grid with spacing h.
double trapezoid(std::span<const double> y, double h);

// Running trapezoid integral; out[0] = 0 and out.size() == y.size().
std::vector<double> cumulative_trapezoid(std::span<const double> y, double h);

struct RootResult {
    double root = 0.0;
    int iterations = 0;
};

struct BisectionOptions {
    double tol = 1e-12;
    int max_iter = 200;
};

// Bisection on [lo, hi]; f(lo) and f(hi) must have opposite signs (or one
// of them is zero). Throws DomainError if the bracket is invalid.
RootResult bisect(const std::function<double(double)>& f, double lo, double hi,
                  BisectionOptions opts = {});

// Doubles hi until f(hi) has the opposite sign of f(lo). Returns the final
// hi. Throws DivergenceError after max_doublings.
double expand_bracket(const std::function<double(double)>& f, double lo, double hi,
                      int max_doublings = 200);

// Dense row-major square matrix.
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {}
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    std::size_t size() const { return n_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
    std::span<const double> data() const { return data_; }

private:
    std::size_t n_ = 0;
    std::vector<double> data_;
};

// Determinant by cofactor (Laplace) expansion along the first row.
// Intended for n <= 4.
double determinant(const Matrix& m);

// Monic characteristic polynomial coefficients, highest degree first:
// det(xI - A) = x^n + c[1] x^{n-1} + ... + c[n]  (c[0] == 1).
std::vector<double> characteristic_polynomial(const Matrix& a);

// All complex roots of a real polynomial (highest degree first) by
// Laguerre iteration with deflation, then polished on the full polynomial.
std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs);

// Eigenvalues sorted by (real, imag) ascending. 2x2 uses the closed-form
// quadratic; larger sizes go through the characteristic polynomial.
std::vector<std::complex<double>> eigenvalues(const Matrix& a);

// Real eigenvector for a real eigenvalue (2x2 only), unit length.
std::vector<double> eigenvector_2x2(const Matrix& a, double lambda);

// Solves a x = b by Gaussian elimination with partial pivoting. Throws
// SingularFormulaError for a (numerically) singular matrix.
std::vector<double> solve(Matrix a, std::vector<double> b);

// Real roots of a x^2 + b x + c = 0 in ascending order. Uses the
// cancellation-free form; a == 0 falls back to the linear equation.
// An empty result means no real root (or the degenerate 0 = c case).
std::vector<double> real_quadratic_roots(double a, double b, double c);

}  // namespace wolbdyn::num
