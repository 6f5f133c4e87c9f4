#include <atomic>
#include <cstdlib>
#include <string_view>

#include "ctlopt/errors.hpp"
#include "ctlopt/kernels.hpp"

namespace ctlopt::kernels {

namespace {

Isa detect() noexcept {
  if (const char* env = std::getenv("CTLOPT_SIMD"); env && std::string_view(env) == "scalar")
    return Isa::scalar;
  return avx2_available() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() noexcept {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

bool avx2_available() noexcept {
#if defined(CTLOPT_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Isa active_isa() noexcept { return current().load(std::memory_order_relaxed); }

void set_isa(Isa isa) noexcept {
  if (isa == Isa::avx2 && !avx2_available()) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

std::string_view isa_name(Isa isa) noexcept { return isa == Isa::avx2 ? "avx2" : "scalar"; }

TridiagonalLU factor_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                 std::span<const double> sup) {
  const std::size_t n = diag.size();
  if (sub.size() != n || sup.size() != n || n == 0)
    throw ParameterError("tridiagonal bands must have equal, nonzero length");
  TridiagonalLU lu;
  lu.sub.assign(sub.begin(), sub.end());
  lu.inv_pivot.resize(n);
  lu.sup.resize(n);
  double prev_sup = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double pivot = diag[i] - (i > 0 ? sub[i] * prev_sup : 0.0);
    if (pivot == 0.0) throw NumericalError(0, "singular tridiagonal pivot");
    lu.inv_pivot[i] = 1.0 / pivot;
    lu.sup[i] = (i + 1 < n) ? sup[i] / pivot : 0.0;
    prev_sup = lu.sup[i];
  }
  return lu;
}

void solve_lines(const TridiagonalLU& lu, double* data, std::size_t n_lines) {
  if (active_isa() == Isa::avx2)
    avx2::solve_lines(lu, data, n_lines);
  else
    scalar::solve_lines(lu, data, n_lines);
}

void candidate_max(double* out, const double* row0, const double* row1, std::size_t n,
                   const RowStencil& st, bool init) {
  if (active_isa() == Isa::avx2)
    avx2::candidate_max(out, row0, row1, n, st, init);
  else
    scalar::candidate_max(out, row0, row1, n, st, init);
}

void candidate_max_add(double* out, const double* row, const double* add, std::size_t n,
                       std::size_t shift, double w, bool init) {
  if (active_isa() == Isa::avx2)
    avx2::candidate_max_add(out, row, add, n, shift, w, init);
  else
    scalar::candidate_max_add(out, row, add, n, shift, w, init);
}

}  // namespace ctlopt::kernels
