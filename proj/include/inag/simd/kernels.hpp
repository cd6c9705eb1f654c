#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops used by the dense-network engine and by the
// quantizer. Every kernel has a portable scalar reference implementation;
// an AVX2/FMA variant is compiled separately and chosen at runtime when the
// CPU supports it. Setting INAG_SIMD=scalar in the environment forces the
// reference path.

namespace inag::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

struct AdamCoeffs {
    double lr;
    double beta1;
    double beta2;
    double epsilon;
    double bias1;  // 1 - beta1^t
    double bias2;  // 1 - beta2^t
};

struct KernelTable {
    Isa isa;
    /// sum_i x[i] * y[i]
    double (*dot)(const double* x, const double* y, std::size_t n);
    /// y += a * x
    void (*axpy)(double a, const double* x, double* y, std::size_t n);
    /// max_i |x[i]|, 0 for n == 0
    double (*max_abs)(const double* x, std::size_t n);
    /// out = scale * clamp(nearbyint(x / scale), qmin, qmax); scale > 0.
    /// `clipped`, if non-null, receives 1.0 where the clamp was active.
    void (*fake_quant)(const double* x, double* out, double* clipped, std::size_t n, double scale,
                       double qmin, double qmax);
    /// One Adam step over a parameter block (descent on g).
    void (*adam_step)(double* p, double* m, double* v, const double* g, std::size_t n,
                      const AdamCoeffs& c);
};

const KernelTable& scalar_kernels();
/// nullptr when the AVX2 variant was not built or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();
/// Table selected at first use; honors INAG_SIMD=scalar.
const KernelTable& active();

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
void fake_quant(const double* x, double* out, double* clipped, std::size_t n, double scale, double qmin,
                double qmax);
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n, const AdamCoeffs& c);
}  // namespace scalar

#if defined(INAG_HAVE_AVX2)
namespace avx2 {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
double max_abs(const double* x, std::size_t n);
void fake_quant(const double* x, double* out, double* clipped, std::size_t n, double scale, double qmin,
                double qmax);
void adam_step(double* p, double* m, double* v, const double* g, std::size_t n, const AdamCoeffs& c);
}  // namespace avx2
#endif

}  // namespace inag::simd
