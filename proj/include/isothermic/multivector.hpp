#pragma once

#include <bit>
#include <cassert>
#include <span>

#include "isothermic/core.hpp"

namespace isothermic {

// Cl(p,q) generated by vectors with vw + wv = -2(v,w); the p directions have
// (e_i,e_i) = +1 and so square to -1, the q directions square to +1.
struct Signature {
    int p = 0;
    int q = 0;

    int dim() const { return p + q; }
    std::size_t blades() const { return std::size_t(1) << dim(); }
    bool operator==(const Signature&) const = default;
};

inline Signature make_signature(int p, int q) {
    if (p < 0 || q < 0 || p + q > 12) fail(errc::invalid_params, "signature out of range");
    return Signature{p, q};
}

namespace detail {

inline int reorder_sign(std::uint32_t a, std::uint32_t b) {
    int swaps = 0;
    a >>= 1;
    while (a) {
        swaps += std::popcount(a & b);
        a >>= 1;
    }
    return (swaps & 1) ? -1 : 1;
}

inline int metric_sign(std::uint32_t common, int p) {
    std::uint32_t plus_mask = (p >= 32) ? ~0u : ((1u << p) - 1u);
    int negs = std::popcount(common & plus_mask);
    return (negs & 1) ? -1 : 1;
}

inline int grade_sign(int k) { return (k & 1) ? -1 : 1; }
inline int reverse_sign(int k) { return ((k * (k - 1) / 2) & 1) ? -1 : 1; }
inline int conjugate_sign(int k) { return ((k * (k + 1) / 2) & 1) ? -1 : 1; }

}  // namespace detail

enum class Involution { grade, transpose, conjugate };

template <class S>
class Multivector {
public:
    Multivector() = default;
    explicit Multivector(Signature sig) : sig_(sig), c_(sig.blades(), S(0)) {}

    static Multivector scalar(Signature sig, S value) {
        Multivector m(sig);
        m.c_[0] = value;
        return m;
    }

    static Multivector blade(Signature sig, std::uint32_t mask, S value) {
        Multivector m(sig);
        assert(mask < sig.blades());
        m.c_[mask] = value;
        return m;
    }

    static Multivector basis_vector(Signature sig, int i) {
        assert(i >= 0 && i < sig.dim());
        return blade(sig, 1u << i, S(1));
    }

    static Multivector vector(Signature sig, std::span<const S> coords) {
        Multivector m(sig);
        assert(static_cast<int>(coords.size()) <= sig.dim());
        for (std::size_t i = 0; i < coords.size(); ++i) m.c_[std::size_t(1) << i] = coords[i];
        return m;
    }

    Signature sig() const { return sig_; }
    bool empty() const { return c_.empty(); }
    std::size_t size() const { return c_.size(); }
    S& operator[](std::uint32_t mask) { return c_[mask]; }
    const S& operator[](std::uint32_t mask) const { return c_[mask]; }
    const std::vector<S>& coeffs() const { return c_; }

    S scalar_part() const { return c_.empty() ? S(0) : c_[0]; }

    double max_abs() const {
        double m = 0;
        for (const S& x : c_) m = std::max(m, scalar_traits<S>::abs(x));
        return m;
    }

    double frob_norm() const {
        double s = 0;
        for (const S& x : c_) {
            double a = scalar_traits<S>::abs(x);
            s += a * a;
        }
        return std::sqrt(s);
    }

    double max_abs_off_grade(int k) const {
        double m = 0;
        for (std::size_t b = 0; b < c_.size(); ++b)
            if (std::popcount(static_cast<std::uint32_t>(b)) != k)
                m = std::max(m, scalar_traits<S>::abs(c_[b]));
        return m;
    }

    bool is_grade(int k, double rel_tol = default_tols().scalar_rel_tol) const {
        return max_abs_off_grade(k) <= rel_tol * (1.0 + max_abs());
    }

    bool is_scalar(double rel_tol = default_tols().scalar_rel_tol) const { return is_grade(0, rel_tol); }

    bool is_zero(double rel_tol = default_tols().scalar_rel_tol) const { return max_abs() <= rel_tol; }

    Multivector grade_part(int k) const {
        Multivector r(sig_);
        for (std::size_t b = 0; b < c_.size(); ++b)
            if (std::popcount(static_cast<std::uint32_t>(b)) == k) r.c_[b] = c_[b];
        return r;
    }

    std::vector<S> vector_coords() const {
        std::vector<S> v(sig_.dim());
        for (int i = 0; i < sig_.dim(); ++i) v[i] = c_[std::size_t(1) << i];
        return v;
    }

    Multivector& operator+=(const Multivector& o) {
        check_sig(o);
        for (std::size_t b = 0; b < c_.size(); ++b) c_[b] += o.c_[b];
        return *this;
    }
    Multivector& operator-=(const Multivector& o) {
        check_sig(o);
        for (std::size_t b = 0; b < c_.size(); ++b) c_[b] -= o.c_[b];
        return *this;
    }
    Multivector& operator*=(S s) {
        for (auto& x : c_) x *= s;
        return *this;
    }

    friend Multivector operator+(Multivector a, const Multivector& b) { return a += b; }
    friend Multivector operator-(Multivector a, const Multivector& b) { return a -= b; }
    friend Multivector operator*(Multivector a, S s) { return a *= s; }
    friend Multivector operator*(S s, Multivector a) { return a *= s; }
    friend Multivector operator-(Multivector a) {
        for (auto& x : a.c_) x = -x;
        return a;
    }

    friend Multivector operator*(const Multivector& a, const Multivector& b) {
        a.check_sig(b);
        Multivector r(a.sig_);
        const int p = a.sig_.p;
        const std::size_t n = a.c_.size();
        for (std::size_t ba = 0; ba < n; ++ba) {
            const S ca = a.c_[ba];
            if (ca == S(0)) continue;
            for (std::size_t bb = 0; bb < n; ++bb) {
                const S cb = b.c_[bb];
                if (cb == S(0)) continue;
                const auto ma = static_cast<std::uint32_t>(ba);
                const auto mb = static_cast<std::uint32_t>(bb);
                int sign = detail::reorder_sign(ma, mb) * detail::metric_sign(ma & mb, p);
                S prod = ca * cb;
                if (sign < 0) prod = -prod;
                r.c_[ba ^ bb] += prod;
            }
        }
        return r;
    }

    Multivector apply_involution(Involution kind) const {
        Multivector r(sig_);
        for (std::size_t b = 0; b < c_.size(); ++b) {
            int k = std::popcount(static_cast<std::uint32_t>(b));
            int s = kind == Involution::grade       ? detail::grade_sign(k)
                    : kind == Involution::transpose ? detail::reverse_sign(k)
                                                    : detail::conjugate_sign(k);
            r.c_[b] = (s < 0) ? -c_[b] : c_[b];
        }
        return r;
    }

    Multivector grade_involution() const { return apply_involution(Involution::grade); }
    Multivector transpose() const { return apply_involution(Involution::transpose); }
    Multivector conjugate() const { return apply_involution(Involution::conjugate); }

private:
    void check_sig(const Multivector& o) const {
        if (!(sig_ == o.sig_)) fail(errc::signature_mismatch, "operands from different Clifford algebras");
    }

    Signature sig_;
    std::vector<S> c_;
};

using Mv = Multivector<double>;
using MvC = Multivector<cplx>;

template <class S>
Multivector<S> involution(const Multivector<S>& a, Involution kind) {
    return a.apply_involution(kind);
}

// N(g) = g * conj(g); defined (scalar) on Clifford-group-like elements.
template <class S>
S clifford_norm(const Multivector<S>& g, double rel_tol = default_tols().scalar_rel_tol) {
    Multivector<S> n = g * g.conjugate();
    if (!n.is_scalar(rel_tol)) fail(errc::non_scalar_norm, "g * conj(g) is not a scalar");
    return n.scalar_part();
}

template <class S>
Multivector<S> invert(const Multivector<S>& g, double abs_tol = default_tols().singular_abs_tol) {
    S n = clifford_norm(g);
    if (scalar_traits<S>::abs(n) < abs_tol * (1.0 + g.max_abs() * g.max_abs()))
        fail(errc::singular_element, "Clifford norm below tolerance");
    return g.conjugate() * (S(1) / n);
}

// tAd(g) v = g v grade(g)^{-1}; reflection in the hyperplane orthogonal to g
// when g is a vector.
template <class S>
Multivector<S> twisted_adjoint(const Multivector<S>& g, const Multivector<S>& v) {
    return g * v * invert(g.grade_involution());
}

// (v,w) = -1/2 (vw + wv) on grade-1 elements.
template <class S>
S inner(const Multivector<S>& v, const Multivector<S>& w) {
    Multivector<S> s = v * w + w * v;
    return S(-0.5) * s.scalar_part();
}

template <class S>
Multivector<S> to_complex_like(const Multivector<double>& a, Signature sig) {
    Multivector<S> r(sig);
    for (std::size_t b = 0; b < sig.blades(); ++b) r[static_cast<std::uint32_t>(b)] = S(a[static_cast<std::uint32_t>(b)]);
    return r;
}

inline MvC complexify(const Mv& a) {
    MvC r(a.sig());
    for (std::size_t b = 0; b < a.size(); ++b) r[static_cast<std::uint32_t>(b)] = cplx(a[static_cast<std::uint32_t>(b)], 0.0);
    return r;
}

inline Mv real_part(const MvC& a, double* max_imag = nullptr) {
    Mv r(a.sig());
    double mi = 0;
    for (std::size_t b = 0; b < a.size(); ++b) {
        r[static_cast<std::uint32_t>(b)] = a[static_cast<std::uint32_t>(b)].real();
        mi = std::max(mi, std::abs(a[static_cast<std::uint32_t>(b)].imag()));
    }
    if (max_imag) *max_imag = mi;
    return r;
}

inline MvC conj_coeffs(const MvC& a) {
    MvC r(a.sig());
    for (std::size_t b = 0; b < a.size(); ++b) r[static_cast<std::uint32_t>(b)] = std::conj(a[static_cast<std::uint32_t>(b)]);
    return r;
}

}  // namespace isothermic
