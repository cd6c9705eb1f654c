#include <immintrin.h>

#include <cmath>

#include "inag/simd/kernels.hpp"

namespace inag::simd::avx2 {

namespace {

inline double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    // lanes (0+2), (1+3) then add: matches the scalar reference association.
    const __m128d pair = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(pair) + _mm_cvtsd_f64(_mm_unpackhi_pd(pair, pair));
}

}  // namespace

double dot(const double* x, const double* y, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
    }
    double sum = hsum(acc);
    for (; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

double max_abs(const double* x, std::size_t n) {
    const __m256d sign = _mm256_set1_pd(-0.0);
    __m256d m = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        m = _mm256_max_pd(m, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, m);
    double r = 0.0;
    for (double l : lanes) r = l > r ? l : r;
    for (; i < n; ++i) {
        const double a = std::fabs(x[i]);
        if (a > r) r = a;
    }
    return r;
}

void fake_quant(const double* x, double* out, double* clipped, std::size_t n, double scale, double qmin,
                double qmax) {
    const __m256d vs = _mm256_set1_pd(scale);
    const __m256d vlo = _mm256_set1_pd(qmin);
    const __m256d vhi = _mm256_set1_pd(qmax);
    const __m256d one = _mm256_set1_pd(1.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d q = _mm256_round_pd(_mm256_div_pd(_mm256_loadu_pd(x + i), vs),
                                          _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
        const __m256d c = _mm256_min_pd(_mm256_max_pd(q, vlo), vhi);
        if (clipped != nullptr) {
            _mm256_storeu_pd(clipped + i, _mm256_and_pd(_mm256_cmp_pd(c, q, _CMP_NEQ_UQ), one));
        }
        _mm256_storeu_pd(out + i, _mm256_mul_pd(vs, c));
    }
    for (; i < n; ++i) {
        const double q = std::nearbyint(x[i] / scale);
        const double c = q < qmin ? qmin : (q > qmax ? qmax : q);
        if (clipped != nullptr) clipped[i] = (c != q) ? 1.0 : 0.0;
        out[i] = scale * c;
    }
}

void adam_step(double* p, double* m, double* v, const double* g, std::size_t n, const AdamCoeffs& c) {
    const __m256d b1 = _mm256_set1_pd(c.beta1);
    const __m256d b2 = _mm256_set1_pd(c.beta2);
    const __m256d omb1 = _mm256_set1_pd(1.0 - c.beta1);
    const __m256d omb2 = _mm256_set1_pd(1.0 - c.beta2);
    const __m256d bias1 = _mm256_set1_pd(c.bias1);
    const __m256d bias2 = _mm256_set1_pd(c.bias2);
    const __m256d lr = _mm256_set1_pd(c.lr);
    const __m256d eps = _mm256_set1_pd(c.epsilon);
    std::size_t i = 0;
    // Explicit mul/add (no FMA) so results match the reference bit for bit.
    for (; i + 4 <= n; i += 4) {
        const __m256d gi = _mm256_loadu_pd(g + i);
        const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(omb1, gi));
        const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                         _mm256_mul_pd(omb2, _mm256_mul_pd(gi, gi)));
        _mm256_storeu_pd(m + i, mi);
        _mm256_storeu_pd(v + i, vi);
        const __m256d mhat = _mm256_div_pd(mi, bias1);
        const __m256d vhat = _mm256_div_pd(vi, bias2);
        const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, mhat), _mm256_add_pd(_mm256_sqrt_pd(vhat), eps));
        _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
    }
    const double one_minus_b1 = 1.0 - c.beta1;
    const double one_minus_b2 = 1.0 - c.beta2;
    for (; i < n; ++i) {
        m[i] = c.beta1 * m[i] + one_minus_b1 * g[i];
        v[i] = c.beta2 * v[i] + one_minus_b2 * (g[i] * g[i]);
        const double mhat = m[i] / c.bias1;
        const double vhat = v[i] / c.bias2;
        p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
}

}  // namespace inag::simd::avx2
