// AVX2/FMA variants. Functions carry target attributes instead of the whole
// translation unit being built with -mavx2, so inline library code emitted
// here stays baseline and cannot leak AVX2 instructions into other callers.

#include "bessreg/simd/kernels.hpp"

#include <cstdint>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define BESSREG_X86 1
#else
#define BESSREG_X86 0
#endif

namespace bessreg::simd::avx2 {

#if BESSREG_X86

#define BESSREG_AVX2 __attribute__((target("avx2,fma")))

namespace {

// Cephes-style exp: x = k ln2 + r, exp(r) = 1 + 2 r P(r^2) / (Q(r^2) - r P(r^2)).
// Inputs below -708 flush to zero; the upper end is clamped so 2^k stays finite
// in the exponent-field construction.
BESSREG_AVX2 inline __m256d exp_pd(__m256d x) {
    const __m256d lo = _mm256_set1_pd(-708.0);
    const __m256d hi = _mm256_set1_pd(709.0);
    const __m256d underflow = _mm256_cmp_pd(x, lo, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, lo), hi);

    const __m256d fx = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                       _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(fx, _mm256_set1_pd(6.93145751953125E-1), x);
    r = _mm256_fnmadd_pd(fx, _mm256_set1_pd(1.42860682030941723212E-6), r);
    const __m256d xx = _mm256_mul_pd(r, r);

    __m256d p = _mm256_set1_pd(1.26177193074810590878E-4);
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(3.02994407707441961300E-2));
    p = _mm256_fmadd_pd(p, xx, _mm256_set1_pd(9.99999999999999999910E-1));
    p = _mm256_mul_pd(p, r);

    __m256d q = _mm256_set1_pd(3.00198505138664455042E-6);
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.52448340349684104192E-3));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.27265548208155028766E-1));
    q = _mm256_fmadd_pd(q, xx, _mm256_set1_pd(2.00000000000000000009E0));

    __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
    e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));

    // 2^k via the exponent field.
    const __m128i k32 = _mm256_cvtpd_epi32(fx);
    __m256i k64 = _mm256_cvtepi32_epi64(k32);
    k64 = _mm256_add_epi64(k64, _mm256_set1_epi64x(1023));
    k64 = _mm256_slli_epi64(k64, 52);
    e = _mm256_mul_pd(e, _mm256_castsi256_pd(k64));
    return _mm256_andnot_pd(underflow, e);
}

// log1p(t) for t in [0, 1]. w = 1 + t is reduced Cephes-style to
// x in [sqrt(1/2)-1, sqrt(2)-1] and a rational approximation; the rounding of
// 1 + t is compensated by (t - (w - 1)) / w.
BESSREG_AVX2 inline __m256d log1p_unit_pd(__m256d t) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d w = _mm256_add_pd(one, t);
    const __m256d corr = _mm256_div_pd(_mm256_sub_pd(t, _mm256_sub_pd(w, one)), w);

    const __m256d upper = _mm256_cmp_pd(w, _mm256_set1_pd(1.41421356237309504880), _CMP_GT_OQ);
    const __m256d x = _mm256_blendv_pd(_mm256_sub_pd(w, one),
                                       _mm256_fmsub_pd(w, _mm256_set1_pd(0.5), one), upper);
    const __m256d e = _mm256_and_pd(upper, one);

    const __m256d z = _mm256_mul_pd(x, x);
    __m256d p = _mm256_set1_pd(1.01875663804580931796E-4);
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(4.97494994976747001425E-1));
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(4.70579119878881725854E0));
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(1.44989225341610930846E1));
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(1.79368678507819816313E1));
    p = _mm256_fmadd_pd(p, x, _mm256_set1_pd(7.70838733755885391666E0));

    __m256d q = _mm256_add_pd(x, _mm256_set1_pd(1.12873587189167450590E1));
    q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(4.52279145837532221105E1));
    q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(8.29875266912776603211E1));
    q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(7.11544750618563894466E1));
    q = _mm256_fmadd_pd(q, x, _mm256_set1_pd(2.31251620126765340583E1));

    __m256d y = _mm256_mul_pd(x, _mm256_div_pd(_mm256_mul_pd(z, p), q));
    y = _mm256_fnmadd_pd(e, _mm256_set1_pd(2.121944400546905827679e-4), y);
    y = _mm256_fnmadd_pd(_mm256_set1_pd(0.5), z, y);
    __m256d res = _mm256_add_pd(x, y);
    res = _mm256_fmadd_pd(e, _mm256_set1_pd(0.693359375), res);
    return _mm256_add_pd(res, corr);
}

BESSREG_AVX2 inline __m256d abs_pd(__m256d x) {
    return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x);
}

BESSREG_AVX2 inline double hsum(__m256d v) {
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, v);
    return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

BESSREG_AVX2 void inverse_links(std::span<const double> eta, std::span<const double> log_phi,
                                std::span<double> mu, std::span<double> phi) {
    const std::size_t n = eta.size();
    const std::size_t nv = n - n % 4;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d zero = _mm256_setzero_pd();
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d e = _mm256_loadu_pd(eta.data() + i);
        const __m256d t = exp_pd(_mm256_sub_pd(zero, abs_pd(e)));
        const __m256d r = _mm256_div_pd(one, _mm256_add_pd(one, t));
        const __m256d neg = _mm256_cmp_pd(e, zero, _CMP_LT_OQ);
        _mm256_storeu_pd(mu.data() + i, _mm256_blendv_pd(r, _mm256_mul_pd(t, r), neg));
        _mm256_storeu_pd(phi.data() + i, exp_pd(_mm256_loadu_pd(log_phi.data() + i)));
    }
    scalar::inverse_links(eta.subspan(nv), log_phi.subspan(nv), mu.subspan(nv), phi.subspan(nv));
}

BESSREG_AVX2 double q_terms(std::span<const double> eta, std::span<const double> log_phi,
                            std::span<const double> z, std::span<const double> psi,
                            std::span<double> wk, std::span<double> wl) {
    const std::size_t n = eta.size();
    const std::size_t nv = n - n % 4;
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d zero = _mm256_setzero_pd();
    __m256d acc = zero;
    for (std::size_t i = 0; i < nv; i += 4) {
        const __m256d e = _mm256_loadu_pd(eta.data() + i);
        const __m256d ae = abs_pd(e);
        const __m256d t = exp_pd(_mm256_sub_pd(zero, ae));
        const __m256d r = _mm256_div_pd(one, _mm256_add_pd(one, t));
        const __m256d tr = _mm256_mul_pd(t, r);
        const __m256d neg = _mm256_cmp_pd(e, zero, _CMP_LT_OQ);
        const __m256d mu = _mm256_blendv_pd(r, tr, neg);
        const __m256d omu = _mm256_blendv_pd(tr, r, neg);
        const __m256d log_m = _mm256_fnmadd_pd(two, log1p_unit_pd(t), _mm256_sub_pd(zero, ae));

        const __m256d lp = _mm256_loadu_pd(log_phi.data() + i);
        const __m256d phi = exp_pd(lp);
        const __m256d zi = _mm256_loadu_pd(z.data() + i);
        const __m256d zz = _mm256_mul_pd(zi, _mm256_sub_pd(one, zi));
        const __m256d dz = _mm256_sub_pd(zi, mu);
        const __m256d a = _mm256_add_pd(one, _mm256_div_pd(_mm256_mul_pd(dz, dz), zz));
        const __m256d pp = _mm256_mul_pd(_mm256_loadu_pd(psi.data() + i), _mm256_mul_pd(phi, phi));

        __m256d q = _mm256_fmadd_pd(two, lp, log_m);
        q = _mm256_add_pd(q, phi);
        q = _mm256_fnmadd_pd(_mm256_mul_pd(half, pp), a, q);
        acc = _mm256_add_pd(acc, q);

        const __m256d m = _mm256_mul_pd(mu, omu);
        const __m256d wki = _mm256_fmadd_pd(_mm256_mul_pd(pp, m), _mm256_div_pd(dz, zz),
                                            _mm256_sub_pd(omu, mu));
        const __m256d wli = _mm256_fnmadd_pd(pp, a, _mm256_add_pd(two, phi));
        _mm256_storeu_pd(wk.data() + i, wki);
        _mm256_storeu_pd(wl.data() + i, wli);
    }
    double sum = hsum(acc);
    sum += scalar::q_terms(eta.subspan(nv), log_phi.subspan(nv), z.subspan(nv), psi.subspan(nv),
                           wk.subspan(nv), wl.subspan(nv));
    return sum;
}

#else  // no x86: the avx2 entry points forward to the scalar reference.

void inverse_links(std::span<const double> eta, std::span<const double> log_phi,
                   std::span<double> mu, std::span<double> phi) {
    scalar::inverse_links(eta, log_phi, mu, phi);
}

double q_terms(std::span<const double> eta, std::span<const double> log_phi,
               std::span<const double> z, std::span<const double> psi,
               std::span<double> wk, std::span<double> wl) {
    return scalar::q_terms(eta, log_phi, z, psi, wk, wl);
}

#endif

}  // namespace bessreg::simd::avx2
