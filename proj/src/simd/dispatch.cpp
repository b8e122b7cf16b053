#include "bessreg/simd/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace bessreg::simd {
namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Isa detect() {
    if (const char* env = std::getenv("BESSREG_SIMD")) {
        const std::string v(env);
        if (v == "scalar") return Isa::scalar;
        if (v == "avx2" && cpu_has_avx2()) return Isa::avx2;
    }
    return cpu_has_avx2() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

std::string_view isa_name(Isa isa) {
    switch (isa) {
        case Isa::scalar: return "scalar";
        case Isa::avx2: return "avx2";
    }
    return "unknown";
}

bool isa_available(Isa isa) { return isa == Isa::scalar || cpu_has_avx2(); }

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (!isa_available(isa)) {
        throw std::runtime_error("SIMD variant not supported on this CPU: " + std::string(isa_name(isa)));
    }
    current().store(isa, std::memory_order_relaxed);
}

void inverse_links(std::span<const double> eta, std::span<const double> log_phi,
                   std::span<double> mu, std::span<double> phi) {
    if (active_isa() == Isa::avx2) return avx2::inverse_links(eta, log_phi, mu, phi);
    scalar::inverse_links(eta, log_phi, mu, phi);
}

double q_terms(std::span<const double> eta, std::span<const double> log_phi,
               std::span<const double> z, std::span<const double> psi,
               std::span<double> wk, std::span<double> wl) {
    if (active_isa() == Isa::avx2) return avx2::q_terms(eta, log_phi, z, psi, wk, wl);
    return scalar::q_terms(eta, log_phi, z, psi, wk, wl);
}

}  // namespace bessreg::simd
