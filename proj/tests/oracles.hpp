#pragma once

// Test-only reference implementations, kept independent of the library's
// popcount-based product path.

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "isothermic/multivector.hpp"

namespace oracle {

// Multiplies two basis blades by writing them out as generator sequences and
// bubble-sorting, counting swaps and eliminating squared generators one at a
// time.  O(k^2) and proud of it.
inline std::pair<int, std::uint32_t> blade_product(std::uint32_t a, std::uint32_t b, int p) {
    std::vector<int> gens;
    for (int i = 0; i < 32; ++i)
        if (a & (1u << i)) gens.push_back(i);
    for (int i = 0; i < 32; ++i)
        if (b & (1u << i)) gens.push_back(i);

    int sign = 1;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t i = 0; i + 1 < gens.size(); ++i) {
            if (gens[i] > gens[i + 1]) {
                std::swap(gens[i], gens[i + 1]);
                sign = -sign;
                changed = true;
            } else if (gens[i] == gens[i + 1]) {
                // e_i^2 = -1 in the positive directions, +1 in the negative ones
                if (gens[i] < p) sign = -sign;
                gens.erase(gens.begin() + i, gens.begin() + i + 2);
                changed = true;
                break;
            }
        }
    }
    std::uint32_t mask = 0;
    for (int g : gens) mask |= 1u << g;
    return {sign, mask};
}

template <class S>
isothermic::Multivector<S> slow_product(const isothermic::Multivector<S>& x,
                                        const isothermic::Multivector<S>& y) {
    isothermic::Multivector<S> r(x.sig());
    for (std::uint32_t a = 0; a < x.size(); ++a) {
        if (x[a] == S(0)) continue;
        for (std::uint32_t b = 0; b < y.size(); ++b) {
            if (y[b] == S(0)) continue;
            auto [sign, mask] = blade_product(a, b, x.sig().p);
            r[mask] += (sign < 0 ? -x[a] : x[a]) * y[b];
        }
    }
    return r;
}

// Blade reversal by explicit permutation-swap counting.
inline int reversal_sign(std::uint32_t mask) {
    std::vector<int> gens;
    for (int i = 0; i < 32; ++i)
        if (mask & (1u << i)) gens.push_back(i);
    std::vector<int> rev(gens.rbegin(), gens.rend());
    int sign = 1;
    for (std::size_t i = 0; i + 1 < rev.size(); ++i)
        for (std::size_t j = 0; j + 1 < rev.size() - i; ++j)
            if (rev[j] > rev[j + 1]) {
                std::swap(rev[j], rev[j + 1]);
                sign = -sign;
            }
    return sign;
}

inline std::complex<double> complex_cross_ratio(std::complex<double> z0, std::complex<double> z1,
                                                std::complex<double> z2, std::complex<double> z3) {
    return (z1 - z0) / (z2 - z1) * (z2 - z3) / (z3 - z0);
}

struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double uniform(double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(eng);
    }
    int integer(int lo, int hi) {
        std::uniform_int_distribution<int> d(lo, hi);
        return d(eng);
    }
};

template <class S>
isothermic::Multivector<S> random_multivector(Rng& rng, isothermic::Signature sig) {
    isothermic::Multivector<S> m(sig);
    for (std::uint32_t b = 0; b < m.size(); ++b) {
        double re = rng.uniform(-1.0, 1.0);
        if constexpr (isothermic::scalar_traits<S>::is_complex)
            m[b] = S(re, rng.uniform(-1.0, 1.0));
        else
            m[b] = S(re);
    }
    return m;
}

template <class S>
isothermic::Multivector<S> random_vector(Rng& rng, isothermic::Signature sig) {
    isothermic::Multivector<S> m(sig);
    for (int i = 0; i < sig.dim(); ++i) {
        double re = rng.uniform(-1.0, 1.0);
        if constexpr (isothermic::scalar_traits<S>::is_complex)
            m[1u << i] = S(re, rng.uniform(-1.0, 1.0));
        else
            m[1u << i] = S(re);
    }
    return m;
}

// Unit-norm Euclidean vector, bounded away from isotropy.
inline isothermic::Mv random_unit_vector(Rng& rng, isothermic::Signature sig) {
    while (true) {
        isothermic::Mv v = random_vector<double>(rng, sig);
        double n = std::sqrt(isothermic::inner(v, v));
        if (n > 0.3) return v * (1.0 / n);
    }
}

}  // namespace oracle
