#include "wolbdyn/numerics.hpp"

#include "wolbdyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wolbdyn::num {

double trapezoid(std::span<const double> y, double h) {
    if (y.size() < 2) return 0.0;
    double interior = 0.0;
    for (std::size_t j = 1; j + 1 < y.size(); ++j) interior += y[j];
    return h * (0.5 * (y.front() + y.back()) + interior);
}

std::vector<double> cumulative_trapezoid(std::span<const double> y, double h) {
    std::vector<double> out(y.size(), 0.0);
    for (std::size_t j = 1; j < y.size(); ++j) out[j] = out[j - 1] + 0.5 * h * (y[j - 1] + y[j]);
    return out;
}

RootResult bisect(const std::function<double(double)>& f, double lo, double hi,
                  BisectionOptions opts) {
    double flo = f(lo);
    double fhi = f(hi);
    if (flo == 0.0) return {lo, 0};
    if (fhi == 0.0) return {hi, 0};
    if (std::signbit(flo) == std::signbit(fhi) || !std::isfinite(flo) || !std::isfinite(fhi))
        throw DomainError("bisect: root is not bracketed");
    int it = 0;
    while (it < opts.max_iter) {
        ++it;
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double fmid = f(mid);
        if (fmid == 0.0) return {mid, it};
        if (std::signbit(fmid) == std::signbit(flo)) {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
        if (hi - lo <= opts.tol * std::max(1.0, std::abs(mid))) break;
    }
    return {0.5 * (lo + hi), it};
}

double expand_bracket(const std::function<double(double)>& f, double lo, double hi,
                      int max_doublings) {
    const bool lo_negative = std::signbit(f(lo));
    for (int k = 0; k < max_doublings; ++k) {
        const double fhi = f(hi);
        if (fhi == 0.0 || std::signbit(fhi) != lo_negative) return hi;
        hi *= 2.0;
    }
    throw DivergenceError("expand_bracket: no sign change found");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : n_(rows.size()), data_() {
    data_.reserve(n_ * n_);
    for (const auto& r : rows) {
        if (r.size() != n_) throw DomainError("Matrix: rows must form a square matrix");
        data_.insert(data_.end(), r.begin(), r.end());
    }
}

namespace {

Matrix minor_of(const Matrix& m, std::size_t col) {
    const std::size_t n = m.size();
    Matrix out(n - 1);
    for (std::size_t r = 1; r < n; ++r) {
        std::size_t cc = 0;
        for (std::size_t c = 0; c < n; ++c) {
            if (c == col) continue;
            out(r - 1, cc++) = m(r, c);
        }
    }
    return out;
}

using cplx = std::complex<double>;

// One root of p by Laguerre's method starting from x.
cplx laguerre(std::span<const cplx> p, cplx x) {
    const auto n = static_cast<double>(p.size() - 1);
    for (int it = 0; it < 500; ++it) {
        cplx b = p[0];
        cplx d = 0.0;
        cplx f = 0.0;
        for (std::size_t k = 1; k < p.size(); ++k) {
            f = x * f + d;
            d = x * d + b;
            b = x * b + p[k];
        }
        if (std::abs(b) == 0.0) return x;
        const cplx g = d / b;
        const cplx h = g * g - 2.0 * f / b;
        const cplx sq = std::sqrt((n - 1.0) * (n * h - g * g));
        cplx denom = g + sq;
        if (std::abs(g - sq) > std::abs(denom)) denom = g - sq;
        cplx step;
        if (std::abs(denom) > 0.0) {
            step = n / denom;
        } else {
            step = std::polar(1.0 + std::abs(x), static_cast<double>(it));
        }
        const cplx next = x - step;
        if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(next))) return next;
        // break rare limit cycles
        x = (it % 20 == 19) ? x - 0.5 * step : next;
    }
    return x;
}

}  // namespace

double determinant(const Matrix& m) {
    const std::size_t n = m.size();
    if (n == 0) return 1.0;
    if (n == 1) return m(0, 0);
    if (n == 2) return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    double det = 0.0;
    double sign = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        if (m(0, c) != 0.0) det += sign * m(0, c) * determinant(minor_of(m, c));
        sign = -sign;
    }
    return det;
}

std::vector<double> characteristic_polynomial(const Matrix& a) {
    // Faddeev-LeVerrier: M_k = A M_{k-1} + c_{k-1} I, c_k = -tr(A M_k)/k.
    const std::size_t n = a.size();
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Matrix mk(n);  // M_0 = 0
    for (std::size_t k = 1; k <= n; ++k) {
        Matrix next(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < n; ++l) s += a(i, l) * mk(l, j);
                next(i, j) = s + (i == j ? c[k - 1] : 0.0);
            }
        }
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l) tr += a(i, l) * next(l, i);
        c[k] = -tr / static_cast<double>(k);
        mk = std::move(next);
    }
    return c;
}

std::vector<std::complex<double>> polynomial_roots(std::span<const double> coeffs) {
    std::size_t lead = 0;
    while (lead < coeffs.size() && coeffs[lead] == 0.0) ++lead;
    if (lead + 1 >= coeffs.size()) return {};
    std::vector<cplx> full(coeffs.begin() + static_cast<std::ptrdiff_t>(lead), coeffs.end());
    std::vector<cplx> work = full;
    std::vector<cplx> roots;
    while (work.size() > 1) {
        cplx r = laguerre(work, cplx(0.0, 0.0));
        if (std::abs(r.imag()) <= 1e-14 * std::max(1.0, std::abs(r.real()))) r = {r.real(), 0.0};
        roots.push_back(r);
        // synthetic division by (x - r)
        std::vector<cplx> q(work.size() - 1);
        q[0] = work[0];
        for (std::size_t k = 1; k < q.size(); ++k) q[k] = work[k] + r * q[k - 1];
        work = std::move(q);
    }
    for (auto& r : roots) {
        r = laguerre(full, r);
        if (std::abs(r.imag()) <= 1e-12 * std::max(1.0, std::abs(r.real()))) r = {r.real(), 0.0};
    }
    return roots;
}

std::vector<std::complex<double>> eigenvalues(const Matrix& a) {
    std::vector<cplx> ev;
    const std::size_t n = a.size();
    if (n == 0) return ev;
    if (n == 1) {
        ev.emplace_back(a(0, 0), 0.0);
    } else if (n == 2) {
        const double tr = a(0, 0) + a(1, 1);
        const double half_diff = 0.5 * (a(0, 0) - a(1, 1));
        // discriminant written to avoid cancellation in tr^2 - 4 det
        const double disc = half_diff * half_diff + a(0, 1) * a(1, 0);
        const double mid = 0.5 * tr;
        if (disc >= 0.0) {
            const double s = std::sqrt(disc);
            ev.emplace_back(mid - s, 0.0);
            ev.emplace_back(mid + s, 0.0);
        } else {
            const double s = std::sqrt(-disc);
            ev.emplace_back(mid, -s);
            ev.emplace_back(mid, s);
        }
    } else {
        const auto poly = characteristic_polynomial(a);
        ev = polynomial_roots(poly);
    }
    std::sort(ev.begin(), ev.end(), [](const cplx& x, const cplx& y) {
        if (x.real() != y.real()) return x.real() < y.real();
        return x.imag() < y.imag();
    });
    return ev;
}

std::vector<double> eigenvector_2x2(const Matrix& a, double lambda) {
    if (a.size() != 2) throw DomainError("eigenvector_2x2: matrix must be 2x2");
    // (A - lambda I) v = 0; pick the better-conditioned row.
    const double r0a = a(0, 0) - lambda;
    const double r0b = a(0, 1);
    const double r1a = a(1, 0);
    const double r1b = a(1, 1) - lambda;
    double vx;
    double vy;
    if (std::hypot(r0a, r0b) >= std::hypot(r1a, r1b)) {
        vx = -r0b;
        vy = r0a;
    } else {
        vx = -r1b;
        vy = r1a;
    }
    double norm = std::hypot(vx, vy);
    if (norm == 0.0) {
        // A == lambda I: every direction is an eigenvector
        return {1.0, 0.0};
    }
    return {vx / norm, vy / norm};
}

std::vector<double> solve(Matrix a, std::vector<double> b) {
    const std::size_t n = a.size();
    if (b.size() != n) throw DomainError("solve: dimension mismatch");
    double scale = 0.0;
    for (double v : a.data()) scale = std::max(scale, std::abs(v));
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        for (std::size_t r = k + 1; r < n; ++r)
            if (std::abs(a(r, k)) > std::abs(a(piv, k))) piv = r;
        if (std::abs(a(piv, k)) <= 1e-14 * std::max(scale, 1e-300))
            throw SingularFormulaError("solve: singular matrix");
        if (piv != k) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(k, c), a(piv, c));
            std::swap(b[k], b[piv]);
        }
        for (std::size_t r = k + 1; r < n; ++r) {
            const double f = a(r, k) / a(k, k);
            for (std::size_t c = k; c < n; ++c) a(r, c) -= f * a(k, c);
            b[r] -= f * b[k];
        }
    }
    std::vector<double> x(n);
    for (std::size_t k = n; k-- > 0;) {
        double s = b[k];
        for (std::size_t c = k + 1; c < n; ++c) s -= a(k, c) * x[c];
        x[k] = s / a(k, k);
    }
    return x;
}

std::vector<double> real_quadratic_roots(double a, double b, double c) {
    if (a == 0.0) {
        if (b == 0.0) return {};
        return {-c / b};
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return {};
    if (disc == 0.0) return {-b / (2.0 * a)};
    const double s = std::sqrt(disc);
    const double qq = -0.5 * (b + std::copysign(s, b));
    double r1 = qq / a;
    double r2 = (qq != 0.0) ? c / qq : -r1;
    if (r1 > r2) std::swap(r1, r2);
    return {r1, r2};
}

}  // namespace wolbdyn::num
