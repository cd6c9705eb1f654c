#include <cmath>

#include "inag/simd/kernels.hpp"

namespace inag::simd::scalar {

double dot(const double* x, const double* y, std::size_t n) {
    // Four partial sums, same association as the vector path's lanes.
    double acc[4] = {0.0, 0.0, 0.0, 0.0};
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc[0] += x[i] * y[i];
        acc[1] += x[i + 1] * y[i + 1];
        acc[2] += x[i + 2] * y[i + 2];
        acc[3] += x[i + 3] * y[i + 3];
    }
    double sum = (acc[0] + acc[2]) + (acc[1] + acc[3]);
    for (; i < n; ++i) sum += x[i] * y[i];
    return sum;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double max_abs(const double* x, std::size_t n) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::fabs(x[i]);
        if (a > m) m = a;
    }
    return m;
}

void fake_quant(const double* x, double* out, double* clipped, std::size_t n, double scale, double qmin,
                double qmax) {
    for (std::size_t i = 0; i < n; ++i) {
        const double q = std::nearbyint(x[i] / scale);
        const double c = q < qmin ? qmin : (q > qmax ? qmax : q);
        if (clipped != nullptr) clipped[i] = (c != q) ? 1.0 : 0.0;
        out[i] = scale * c;
    }
}

void adam_step(double* p, double* m, double* v, const double* g, std::size_t n, const AdamCoeffs& c) {
    const double one_minus_b1 = 1.0 - c.beta1;
    const double one_minus_b2 = 1.0 - c.beta2;
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = c.beta1 * m[i] + one_minus_b1 * g[i];
        v[i] = c.beta2 * v[i] + one_minus_b2 * (g[i] * g[i]);
        const double mhat = m[i] / c.bias1;
        const double vhat = v[i] / c.bias2;
        p[i] -= c.lr * mhat / (std::sqrt(vhat) + c.epsilon);
    }
}

}  // namespace inag::simd::scalar
