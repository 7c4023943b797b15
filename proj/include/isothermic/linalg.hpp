#pragma once

#include <array>

#include "isothermic/core.hpp"

namespace isothermic::linalg {

// Small dense matrices; everything here runs on (n+2)-sized problems.
template <class S>
struct Mat {
    int rows = 0, cols = 0;
    std::vector<S> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(std::size_t(r) * c, S(0)) {}
    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = S(1);
        return m;
    }
    S& operator()(int i, int j) { return a[std::size_t(i) * cols + j]; }
    const S& operator()(int i, int j) const { return a[std::size_t(i) * cols + j]; }

    friend Mat operator*(const Mat& x, const Mat& y) {
        Mat r(x.rows, y.cols);
        for (int i = 0; i < x.rows; ++i)
            for (int k = 0; k < x.cols; ++k) {
                S xik = x(i, k);
                if (xik == S(0)) continue;
                for (int j = 0; j < y.cols; ++j) r(i, j) += xik * y(k, j);
            }
        return r;
    }
    friend Mat operator+(Mat x, const Mat& y) {
        for (std::size_t k = 0; k < x.a.size(); ++k) x.a[k] += y.a[k];
        return x;
    }
    friend Mat operator-(Mat x, const Mat& y) {
        for (std::size_t k = 0; k < x.a.size(); ++k) x.a[k] -= y.a[k];
        return x;
    }
    friend Mat operator*(Mat x, S s) {
        for (auto& v : x.a) v *= s;
        return x;
    }
    friend Mat operator*(S s, Mat x) { return x * s; }

    Mat transposed() const {
        Mat r(cols, rows);
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) r(j, i) = (*this)(i, j);
        return r;
    }

    double max_abs() const {
        double m = 0;
        for (const auto& v : a) m = std::max(m, scalar_traits<S>::abs(v));
        return m;
    }
    double frob_norm() const {
        double s = 0;
        for (const auto& v : a) {
            double x = scalar_traits<S>::abs(v);
            s += x * x;
        }
        return std::sqrt(s);
    }

    std::vector<S> apply(const std::vector<S>& v) const {
        std::vector<S> r(rows, S(0));
        for (int i = 0; i < rows; ++i)
            for (int j = 0; j < cols; ++j) r[i] += (*this)(i, j) * v[j];
        return r;
    }
};

using MatD = Mat<double>;
using MatC = Mat<cplx>;

template <class S>
Mat<S> inverse(const Mat<S>& m) {
    int n = m.rows;
    Mat<S> a = m;
    Mat<S> inv = Mat<S>::identity(n);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        double best = scalar_traits<S>::abs(a(col, col));
        for (int r = col + 1; r < n; ++r)
            if (scalar_traits<S>::abs(a(r, col)) > best) {
                best = scalar_traits<S>::abs(a(r, col));
                piv = r;
            }
        if (best < 1e-300) fail(errc::singular_element, "singular matrix in inverse");
        if (piv != col)
            for (int j = 0; j < n; ++j) {
                std::swap(a(piv, j), a(col, j));
                std::swap(inv(piv, j), inv(col, j));
            }
        S d = S(1) / a(col, col);
        for (int j = 0; j < n; ++j) {
            a(col, j) *= d;
            inv(col, j) *= d;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            S f = a(r, col);
            if (f == S(0)) continue;
            for (int j = 0; j < n; ++j) {
                a(r, j) -= f * a(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

template <class S>
Mat<S> mat_exp(const Mat<S>& m) {
    double norm = m.frob_norm();
    int scale_pow = 0;
    while (norm > 0.25 && scale_pow < 48) {
        norm *= 0.5;
        ++scale_pow;
    }
    Mat<S> x = m * S(1.0 / double(std::int64_t(1) << scale_pow));
    Mat<S> result = Mat<S>::identity(m.rows);
    Mat<S> term = Mat<S>::identity(m.rows);
    for (int k = 1; k <= 40; ++k) {
        term = term * x;
        term = term * S(1.0 / k);
        result = result + term;
        if (term.max_abs() <= 1e-18 * (1.0 + result.max_abs())) break;
    }
    for (int k = 0; k < scale_pow; ++k) result = result * result;
    return result;
}

// Cyclic Jacobi on a symmetric matrix; eigenvalues descending.
inline void symmetric_eigen(MatD s, std::vector<double>& eigs, MatD* vectors = nullptr) {
    int n = s.rows;
    MatD v = MatD::identity(n);
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += s(i, j) * s(i, j);
        if (off < 1e-30) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(s(p, q)) < 1e-300) continue;
                double theta = (s(q, q) - s(p, p)) / (2 * s(p, q));
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1));
                double c = 1.0 / std::sqrt(t * t + 1), sn = t * c;
                for (int k = 0; k < n; ++k) {
                    double skp = s(k, p), skq = s(k, q);
                    s(k, p) = c * skp - sn * skq;
                    s(k, q) = sn * skp + c * skq;
                }
                for (int k = 0; k < n; ++k) {
                    double spk = s(p, k), sqk = s(q, k);
                    s(p, k) = c * spk - sn * sqk;
                    s(q, k) = sn * spk + c * sqk;
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
    }
    eigs.resize(n);
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return s(a, a) > s(b, b); });
    MatD sorted(n, n);
    for (int i = 0; i < n; ++i) {
        eigs[i] = s(order[i], order[i]);
        for (int k = 0; k < n; ++k) sorted(k, i) = v(k, order[i]);
    }
    if (vectors) *vectors = sorted;
}

// Singular values (descending) via the Gram matrix.
inline std::vector<double> singular_values(const MatD& m) {
    MatD g = m.transposed() * m;
    std::vector<double> eigs;
    symmetric_eigen(g, eigs);
    for (auto& e : eigs) e = std::sqrt(std::max(0.0, e));
    return eigs;
}

// sin of the largest principal angle between two 2-dimensional spans in R^n.
inline double principal_angle_defect(const std::vector<std::vector<double>>& span_a,
                                     const std::vector<std::vector<double>>& span_b) {
    auto orthonormalize = [](std::vector<std::vector<double>> v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            for (std::size_t j = 0; j < i; ++j) {
                double d = 0;
                for (std::size_t k = 0; k < v[i].size(); ++k) d += v[i][k] * v[j][k];
                for (std::size_t k = 0; k < v[i].size(); ++k) v[i][k] -= d * v[j][k];
            }
            double n = 0;
            for (double x : v[i]) n += x * x;
            n = std::sqrt(n);
            if (n < 1e-14) fail(errc::degenerate_grid, "degenerate span in principal angles");
            for (double& x : v[i]) x /= n;
        }
        return v;
    };
    auto qa = orthonormalize(span_a);
    auto qb = orthonormalize(span_b);
    MatD m(2, 2);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
            double d = 0;
            for (std::size_t k = 0; k < qa[i].size(); ++k) d += qa[i][k] * qb[j][k];
            m(i, j) = d;
        }
    auto sv = singular_values(m);
    double smin = std::min(1.0, sv.back());
    return std::sqrt(std::max(0.0, 1.0 - smin * smin));
}

}  // namespace isothermic::linalg
