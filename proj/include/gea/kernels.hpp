#pragma once

// Dense inner-loop kernels used by the dynamic-programming oracle and the
// linear value model. Every kernel has a scalar reference implementation and
// optional vectorized variants; the active backend is chosen once at startup
// from what the CPU reports and can be overridden for reproducibility checks.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace gea::kernels {

enum class Backend { scalar, avx2 };

struct KernelTable {
    double (*dot)(const double* a, const double* b, std::size_t n);
    // y[i] += alpha * x[i]; a separate multiply and add (no FMA) so every
    // backend rounds identically.
    void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
    double (*max_abs_diff)(const double* a, const double* b, std::size_t n);
};

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double max_abs_diff(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

bool backend_supported(Backend b);
Backend best_backend();
Backend active_backend();
// Throws std::invalid_argument if the CPU cannot run `b`.
void set_backend(Backend b);
const KernelTable& table(Backend b);
std::string_view backend_name(Backend b);
Backend parse_backend(std::string_view name);  // "scalar", "avx2", "auto"

// Convenience wrappers over the active backend.
double dot(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
double max_abs_diff(std::span<const double> a, std::span<const double> b);

// out[r] = dot(row r of a row-major rows x cols matrix, x)
void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out);

}  // namespace gea::kernels
