#pragma once

#include "isothermic/multivector.hpp"

namespace isothermic {

// 2x2 matrix over Cl(n,0); the model of Cl(n+1,1).  The Minkowski vectors sit
// inside as (x, l; m, -x) with x in R^n and l, m scalar; v0 = (0,0;1,0),
// vinf = (0,1;0,0), and x embeds in the light cone as (x, (x,x); 1, -x).
template <class S>
struct VahlenMatrix {
    Multivector<S> a, b, c, d;

    VahlenMatrix() = default;
    explicit VahlenMatrix(Signature sig)
        : a(sig), b(sig), c(sig), d(sig) {}
    VahlenMatrix(Multivector<S> a_, Multivector<S> b_, Multivector<S> c_, Multivector<S> d_)
        : a(std::move(a_)), b(std::move(b_)), c(std::move(c_)), d(std::move(d_)) {}

    Signature sig() const { return a.sig(); }

    static VahlenMatrix identity(Signature sig) {
        VahlenMatrix m(sig);
        m.a = Multivector<S>::scalar(sig, S(1));
        m.d = Multivector<S>::scalar(sig, S(1));
        return m;
    }

    static VahlenMatrix zero(Signature sig) { return VahlenMatrix(sig); }

    friend VahlenMatrix operator*(const VahlenMatrix& x, const VahlenMatrix& y) {
        return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
                x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
    }
    friend VahlenMatrix operator+(const VahlenMatrix& x, const VahlenMatrix& y) {
        return {x.a + y.a, x.b + y.b, x.c + y.c, x.d + y.d};
    }
    friend VahlenMatrix operator-(const VahlenMatrix& x, const VahlenMatrix& y) {
        return {x.a - y.a, x.b - y.b, x.c - y.c, x.d - y.d};
    }
    friend VahlenMatrix operator*(const VahlenMatrix& x, S s) {
        return {x.a * s, x.b * s, x.c * s, x.d * s};
    }
    friend VahlenMatrix operator*(S s, const VahlenMatrix& x) { return x * s; }
    friend VahlenMatrix operator-(const VahlenMatrix& x) { return {-x.a, -x.b, -x.c, -x.d}; }

    double max_abs() const {
        return std::max(std::max(a.max_abs(), b.max_abs()), std::max(c.max_abs(), d.max_abs()));
    }
    double frob_norm() const {
        double s = a.frob_norm(), t = b.frob_norm(), u = c.frob_norm(), v = d.frob_norm();
        return std::sqrt(s * s + t * t + u * u + v * v);
    }

    // Cl(n+1,1) involutions in the 2x2 model.
    VahlenMatrix conjugate_cl() const {
        return {d.transpose(), -b.transpose(), -c.transpose(), a.transpose()};
    }
    VahlenMatrix transpose_cl() const {
        return {d.conjugate(), b.conjugate(), c.conjugate(), a.conjugate()};
    }
    VahlenMatrix grade_cl() const {
        return {a.grade_involution(), -b.grade_involution(), -c.grade_involution(),
                d.grade_involution()};
    }

    Multivector<S> pseudo_determinant() const { return a * d.transpose() - b * c.transpose(); }

    // N(M) = M * conj(M); scalar times identity for group elements.
    S norm_scalar(double rel_tol = default_tols().scalar_rel_tol) const {
        VahlenMatrix n = *this * conjugate_cl();
        double scale = 1.0 + n.max_abs();
        if (!n.a.is_scalar(rel_tol) || !n.d.is_scalar(rel_tol) ||
            n.b.max_abs() > rel_tol * scale || n.c.max_abs() > rel_tol * scale ||
            scalar_traits<S>::abs(n.a.scalar_part() - n.d.scalar_part()) > rel_tol * scale)
            fail(errc::non_scalar_norm, "Vahlen norm is not scalar");
        return n.a.scalar_part();
    }

    VahlenMatrix inverse_group() const {
        S n = norm_scalar();
        if (scalar_traits<S>::abs(n) < default_tols().singular_abs_tol * (1.0 + max_abs() * max_abs()))
            fail(errc::singular_element, "Vahlen pseudo-norm below tolerance");
        return conjugate_cl() * (S(1) / n);
    }
};

using Vahlen = VahlenMatrix<double>;
using VahlenC = VahlenMatrix<cplx>;

inline VahlenC complexify(const Vahlen& m) {
    return {complexify(m.a), complexify(m.b), complexify(m.c), complexify(m.d)};
}

template <class S>
struct VahlenDiagnostics {
    bool entries_in_clifford_group = true;
    bool pseudo_det_nonzero_scalar = true;
    bool products_grade_one = true;
    double worst_defect = 0.0;

    bool ok() const {
        return entries_in_clifford_group && pseudo_det_nonzero_scalar && products_grade_one;
    }
};

namespace detail {

template <class S>
bool in_clifford_group_or_zero(const Multivector<S>& g, double rel_tol, double* defect) {
    double scale = g.max_abs();
    if (scale <= rel_tol) return true;  // zero entry
    Multivector<S> n = g * g.conjugate();
    double off = n.max_abs_off_grade(0);
    double rel = off / (1.0 + n.max_abs());
    *defect = std::max(*defect, rel);
    if (rel > rel_tol) return false;
    return scalar_traits<S>::abs(n.scalar_part()) > rel_tol * (1.0 + scale * scale);
}

template <class S>
bool grade_one_or_zero(const Multivector<S>& g, double rel_tol, double* defect) {
    double rel = g.max_abs_off_grade(1) / (1.0 + g.max_abs());
    *defect = std::max(*defect, rel);
    return rel <= rel_tol;
}

}  // namespace detail

// Vahlen's conditions: entries in Gamma_n or 0, pseudo-determinant a nonzero
// scalar, and ac^t, bd^t, a^t b, c^t d grade-1.
template <class S>
std::pair<bool, VahlenDiagnostics<S>> is_vahlen(const VahlenMatrix<S>& m,
                                                double rel_tol = 1e-7) {
    VahlenDiagnostics<S> diag;
    double defect = 0.0;
    diag.entries_in_clifford_group =
        detail::in_clifford_group_or_zero(m.a, rel_tol, &defect) &&
        detail::in_clifford_group_or_zero(m.b, rel_tol, &defect) &&
        detail::in_clifford_group_or_zero(m.c, rel_tol, &defect) &&
        detail::in_clifford_group_or_zero(m.d, rel_tol, &defect);

    Multivector<S> pd = m.pseudo_determinant();
    double scale = 1.0 + m.max_abs() * m.max_abs();
    diag.pseudo_det_nonzero_scalar = pd.is_scalar(rel_tol) &&
                                     scalar_traits<S>::abs(pd.scalar_part()) > rel_tol * scale;
    defect = std::max(defect, pd.max_abs_off_grade(0) / scale);

    diag.products_grade_one =
        detail::grade_one_or_zero(m.a * m.c.transpose(), rel_tol, &defect) &&
        detail::grade_one_or_zero(m.b * m.d.transpose(), rel_tol, &defect) &&
        detail::grade_one_or_zero(m.a.transpose() * m.b, rel_tol, &defect) &&
        detail::grade_one_or_zero(m.c.transpose() * m.d, rel_tol, &defect);

    diag.worst_defect = defect;
    return {diag.ok(), diag};
}

// Finite point of R^n (or C^n) or the point at infinity.
template <class S>
struct ConformalPoint {
    bool infinite = false;
    Multivector<S> x;  // grade-1 when finite

    static ConformalPoint infinity(Signature sig) { return {true, Multivector<S>(sig)}; }
    static ConformalPoint finite(Multivector<S> v) { return {false, std::move(v)}; }
};

// g . x = (ax + b)(cx + d)^{-1}, g . inf = a c^{-1}.
template <class S>
ConformalPoint<S> mobius_apply(const VahlenMatrix<S>& m, const ConformalPoint<S>& pt,
                               bool validate = false) {
    if (validate && !is_vahlen(m).first) fail(errc::invalid_vahlen, "matrix fails Vahlen conditions");
    Signature sig = m.sig();
    double scale = 1.0 + m.max_abs();
    if (pt.infinite) {
        if (m.c.max_abs() <= default_tols().scalar_rel_tol * scale)
            return ConformalPoint<S>::infinity(sig);
        return ConformalPoint<S>::finite(m.a * invert(m.c));
    }
    Multivector<S> den = m.c * pt.x + m.d;
    Multivector<S> den_n = den * den.conjugate();
    double den_scale = den.max_abs();
    if (scalar_traits<S>::abs(den_n.scalar_part()) <=
        default_tols().singular_abs_tol * (1.0 + den_scale * den_scale) * (1.0 + pt.x.max_abs()))
        return ConformalPoint<S>::infinity(sig);
    Multivector<S> num = m.a * pt.x + m.b;
    return ConformalPoint<S>::finite(num * invert(den));
}

// Null-cone embedding x -> (x, (x,x); 1, -x).
template <class S>
VahlenMatrix<S> lightcone_embed(const Multivector<S>& x) {
    Signature sig = x.sig();
    S xx = inner(x, x);
    return {x, Multivector<S>::scalar(sig, xx), Multivector<S>::scalar(sig, S(1)), -x};
}

template <class S>
ConformalPoint<S> stereo_project(const VahlenMatrix<S>& v,
                                 double rel_tol = default_tols().scalar_rel_tol) {
    double scale = 1.0 + v.max_abs();
    if (!v.c.is_scalar(rel_tol)) fail(errc::invalid_params, "not a light-cone matrix");
    S t = v.c.scalar_part();
    if (scalar_traits<S>::abs(t) <= rel_tol * scale)
        fail(errc::point_at_infinity, "vector lies on the line of v_infinity");
    return ConformalPoint<S>::finite(v.a * (S(1) / t));
}

template <class S>
VahlenMatrix<S> v_zero(Signature sig) {
    VahlenMatrix<S> m(sig);
    m.c = Multivector<S>::scalar(sig, S(1));
    return m;
}

template <class S>
VahlenMatrix<S> v_infinity(Signature sig) {
    VahlenMatrix<S> m(sig);
    m.b = Multivector<S>::scalar(sig, S(1));
    return m;
}

// (v1-v0)(v2-v1)^{-1}(v2-v3)(v3-v0)^{-1}; real iff the points are concircular.
template <class S>
std::pair<Multivector<S>, bool> cross_ratio(const Multivector<S>& v0, const Multivector<S>& v1,
                                            const Multivector<S>& v2, const Multivector<S>& v3,
                                            double rel_tol = default_tols().scalar_rel_tol) {
    auto separated = [&](const Multivector<S>& x, const Multivector<S>& y) {
        double sep = (x - y).max_abs();
        double sc = 1.0 + std::max(x.max_abs(), y.max_abs());
        return sep > default_tols().singular_abs_tol * sc;
    };
    if (!separated(v0, v1) || !separated(v1, v2) || !separated(v2, v3) || !separated(v3, v0) ||
        !separated(v0, v2) || !separated(v1, v3))
        fail(errc::coincident_points, "cross-ratio needs pairwise distinct points");
    Multivector<S> cr = (v1 - v0) * invert(v2 - v1) * (v2 - v3) * invert(v3 - v0);
    bool real = cr.is_scalar(rel_tol);
    if constexpr (scalar_traits<S>::is_complex) {
        real = real && std::abs(cr.scalar_part().imag()) <= rel_tol * (1.0 + cr.max_abs());
    }
    return {cr, real};
}

// tAd on the 2x2 model: for N(m) = 1, tAd(m) v = m v m^t.
template <class S>
VahlenMatrix<S> vahlen_twisted_adjoint(const VahlenMatrix<S>& m, const VahlenMatrix<S>& v) {
    return m * v * m.transpose_cl();
}

// exp of a general 2x2 Clifford matrix by scaling and squaring.
template <class S>
VahlenMatrix<S> vahlen_exp(const VahlenMatrix<S>& m) {
    double norm = m.frob_norm();
    int scale_pow = 0;
    while (norm > 0.25 && scale_pow < 48) {
        norm *= 0.5;
        ++scale_pow;
    }
    S inv_scale = S(1.0 / double(std::int64_t(1) << scale_pow));
    VahlenMatrix<S> x = m * inv_scale;
    VahlenMatrix<S> result = VahlenMatrix<S>::identity(m.sig());
    VahlenMatrix<S> term = VahlenMatrix<S>::identity(m.sig());
    for (int k = 1; k <= 40; ++k) {
        term = term * x;
        term = term * S(1.0 / k);
        result = result + term;
        if (term.max_abs() <= 1e-18 * (1.0 + result.max_abs())) break;
    }
    for (int k = 0; k < scale_pow; ++k) result = result * result;
    return result;
}

// log of a matrix near the identity (Mercator series).
template <class S>
VahlenMatrix<S> vahlen_log_near_identity(const VahlenMatrix<S>& m) {
    VahlenMatrix<S> y = m - VahlenMatrix<S>::identity(m.sig());
    if (y.frob_norm() > 0.5) fail(errc::invalid_params, "matrix too far from identity for log");
    VahlenMatrix<S> result = y;
    VahlenMatrix<S> pw = y;
    double sign = -1.0;
    for (int k = 2; k <= 48; ++k) {
        pw = pw * y;
        result = result + pw * S(sign / k);
        sign = -sign;
        if (pw.max_abs() <= 1e-18 * (1.0 + result.max_abs())) break;
    }
    return result;
}

// Rescale a near-group element back onto N(M) = 1 by the pseudo-norm root.
template <class S>
void vahlen_renormalize(VahlenMatrix<S>& m) {
    VahlenMatrix<S> n = m * m.conjugate_cl();
    S ns = S(0.5) * (n.a.scalar_part() + n.d.scalar_part());
    if (scalar_traits<S>::abs(ns) < 1e-300) return;
    S root;
    if constexpr (scalar_traits<S>::is_complex) {
        root = std::sqrt(ns);
    } else {
        if (ns <= 0) return;
        root = std::sqrt(ns);
    }
    m = m * (S(1) / root);
}

}  // namespace isothermic
