#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace isothermic {

using cplx = std::complex<double>;

enum class errc {
    signature_mismatch,
    non_scalar_norm,
    singular_element,
    invalid_vahlen,
    point_at_infinity,
    coincident_points,
    degenerate_grid,
    not_conformal,
    not_closed,
    umbilic_zero,
    not_ccl,
    non_flat_normal_bundle,
    inconsistent_data,
    invalid_params,
    seed_singular,
    all_singular,
    degenerate_denominator,
    not_unit_normal,
    insufficient_samples,
    integration_diverged,
    invalid_alpha,
    null_seed,
    pole_evaluation,
    out_of_chart,
    missing_alpha_sample,
    omega_degenerate,
    equal_parameters,
    degenerate_line,
    spec_invalid,
    io_error,
    bad_axes,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::signature_mismatch: return "SignatureMismatch";
        case errc::non_scalar_norm: return "NonScalarNorm";
        case errc::singular_element: return "SingularElement";
        case errc::invalid_vahlen: return "InvalidVahlen";
        case errc::point_at_infinity: return "PointAtInfinity";
        case errc::coincident_points: return "CoincidentPoints";
        case errc::degenerate_grid: return "DegenerateGrid";
        case errc::not_conformal: return "NotConformal";
        case errc::not_closed: return "NotClosed";
        case errc::umbilic_zero: return "UmbilicZero";
        case errc::not_ccl: return "NotCCL";
        case errc::non_flat_normal_bundle: return "NonFlatNormalBundle";
        case errc::inconsistent_data: return "InconsistentData";
        case errc::invalid_params: return "InvalidParams";
        case errc::seed_singular: return "SeedSingular";
        case errc::all_singular: return "AllSingular";
        case errc::degenerate_denominator: return "DegenerateDenominator";
        case errc::not_unit_normal: return "NotUnitNormal";
        case errc::insufficient_samples: return "InsufficientSamples";
        case errc::integration_diverged: return "IntegrationDiverged";
        case errc::invalid_alpha: return "InvalidAlpha";
        case errc::null_seed: return "NullSeed";
        case errc::pole_evaluation: return "PoleEvaluation";
        case errc::out_of_chart: return "OutOfChart";
        case errc::missing_alpha_sample: return "MissingAlphaSample";
        case errc::omega_degenerate: return "OmegaDegenerate";
        case errc::equal_parameters: return "EqualParameters";
        case errc::degenerate_line: return "DegenerateLine";
        case errc::spec_invalid: return "SpecInvalid";
        case errc::io_error: return "IoError";
        case errc::bad_axes: return "BadAxes";
    }
    return "UnknownError";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
    errc code() const { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

// An element is treated as "scalar" (resp. grade-1 etc.) when the stray
// coefficients stay below scalar_rel_tol * (1 + max coefficient magnitude).
struct Tolerances {
    double scalar_rel_tol = 1e-9;
    double singular_abs_tol = 1e-12;
    double conformal_rel_tol = 5e-3;
    double closedness_tol = 5e-2;
    double umbilic_tol = 1e-10;
    double mask_lo = 1e-8;
    double mask_hi = 1e8;
};

inline const Tolerances& default_tols() {
    static Tolerances t;
    return t;
}

template <class S>
struct scalar_traits {
    static constexpr bool is_complex = false;
    static double abs(S x) { return std::abs(x); }
    static double real(S x) { return x; }
    static double imag(S) { return 0.0; }
    static S conj(S x) { return x; }
};

template <>
struct scalar_traits<cplx> {
    static constexpr bool is_complex = true;
    static double abs(cplx x) { return std::abs(x); }
    static double real(cplx x) { return x.real(); }
    static double imag(cplx x) { return x.imag(); }
    static cplx conj(cplx x) { return std::conj(x); }
};

inline int max_threads() {
    static int cached = [] {
        unsigned hw = std::thread::hardware_concurrency();
        int n = hw ? static_cast<int>(hw) : 1;
        if (const char* env = std::getenv("ISOTHERMIC_THREADS")) {
            int cap = std::atoi(env);
            if (cap >= 1) n = std::min(n, cap);
        }
        return n;
    }();
    return cached;
}

// Splits [0, count) into contiguous chunks, one worker thread per chunk.
// Workers write into disjoint slots only; callers reduce in index order,
// so results do not depend on the thread count.
template <class Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    int nt = std::min<std::size_t>(max_threads(), count);
    if (nt <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(nt);
    std::size_t chunk = (count + nt - 1) / nt;
    for (int t = 0; t < nt; ++t) {
        std::size_t lo = t * chunk, hi = std::min(count, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace isothermic
