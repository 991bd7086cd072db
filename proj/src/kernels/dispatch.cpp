#include "gea/kernels.hpp"

#include <atomic>
#include <stdexcept>
#include <string>

namespace gea::kernels {

namespace {

constexpr KernelTable kScalar{&scalar::dot, &scalar::axpy, &scalar::max_abs_diff};
#if defined(GEA_HAVE_AVX2)
constexpr KernelTable kAvx2{&avx2::dot, &avx2::axpy, &avx2::max_abs_diff};
#endif

bool cpu_has_avx2() {
#if defined(GEA_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{&table(best_backend())};
    return slot;
}

std::atomic<Backend>& active_kind() {
    static std::atomic<Backend> kind{best_backend()};
    return kind;
}

const KernelTable& current() { return *active_slot().load(std::memory_order_acquire); }

}  // namespace

bool backend_supported(Backend b) {
    switch (b) {
        case Backend::scalar: return true;
        case Backend::avx2: return cpu_has_avx2();
    }
    return false;
}

Backend best_backend() {
    static const Backend best = cpu_has_avx2() ? Backend::avx2 : Backend::scalar;
    return best;
}

Backend active_backend() { return active_kind().load(std::memory_order_acquire); }

const KernelTable& table(Backend b) {
#if defined(GEA_HAVE_AVX2)
    if (b == Backend::avx2) {
        if (!backend_supported(b)) throw std::invalid_argument("avx2 kernels not supported on this CPU");
        return kAvx2;
    }
#else
    if (b == Backend::avx2) throw std::invalid_argument("avx2 kernels not compiled in");
#endif
    return kScalar;
}

void set_backend(Backend b) {
    const KernelTable& t = table(b);
    active_slot().store(&t, std::memory_order_release);
    active_kind().store(b, std::memory_order_release);
}

std::string_view backend_name(Backend b) { return b == Backend::avx2 ? "avx2" : "scalar"; }

Backend parse_backend(std::string_view name) {
    if (name == "auto") return best_backend();
    if (name == "scalar") return Backend::scalar;
    if (name == "avx2") return Backend::avx2;
    throw std::invalid_argument("unknown kernel backend: " + std::string(name));
}

double dot(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
    return current().dot(a.data(), b.data(), a.size());
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("axpy: length mismatch");
    current().axpy(alpha, x.data(), y.data(), x.size());
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: length mismatch");
    return current().max_abs_diff(a.data(), b.data(), a.size());
}

void matvec(std::span<const double> matrix, std::size_t rows, std::size_t cols,
            std::span<const double> x, std::span<double> out) {
    if (matrix.size() != rows * cols || x.size() != cols || out.size() != rows)
        throw std::invalid_argument("matvec: shape mismatch");
    const KernelTable& t = current();
    for (std::size_t r = 0; r < rows; ++r) out[r] = t.dot(matrix.data() + r * cols, x.data(), cols);
}

}  // namespace gea::kernels
