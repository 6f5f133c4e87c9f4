#pragma once

// Data-parallel inner loops of the backward sweep. Each kernel has a scalar
// reference implementation and an AVX2/FMA variant; the variant is selected
// once at runtime from the CPU features (override with CTLOPT_SIMD=scalar).
// The variants agree to rounding (FMA contraction), not bit for bit.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace ctlopt::kernels {

/// LU factors of a tridiagonal matrix, stored for repeated forward/back
/// substitution (Thomas algorithm without pivoting; the matrices used here
/// are strictly diagonally dominant M-matrices).
struct TridiagonalLU {
  std::vector<double> sub;        ///< a_i, coefficient of x_{i-1}
  std::vector<double> inv_pivot;  ///< 1 / (b_i - a_i c'_{i-1})
  std::vector<double> sup;        ///< c'_i = c_i / pivot_i

  std::size_t size() const noexcept { return inv_pivot.size(); }
};

TridiagonalLU factor_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                 std::span<const double> sup);

/// Interpolation stencil of one semi-Lagrangian candidate along a row:
/// value(i) = (1-wy) lerp(row0, i+shift, wx) + wy lerp(row1, i+shift, wx) + add,
/// where indices past the row end clamp to the last node.
struct RowStencil {
  std::size_t shift = 0;
  double wx = 0.0;
  double wy = 0.0;
  double add = 0.0;
};

enum class Isa { scalar, avx2 };

bool avx2_available() noexcept;
Isa active_isa() noexcept;
/// Forces a variant (tests, benchmarks). Requesting avx2 on a CPU without it
/// falls back to scalar.
void set_isa(Isa isa) noexcept;
std::string_view isa_name(Isa isa) noexcept;

/// Solves the factored system for n_lines right-hand sides in place.
/// data is row-major over the system index: data[row * n_lines + line].
void solve_lines(const TridiagonalLU& lu, double* data, std::size_t n_lines);

/// out[i] = candidate (init) or max(out[i], candidate) for i < n.
void candidate_max(double* out, const double* row0, const double* row1, std::size_t n,
                   const RowStencil& st, bool init);

/// One-dimensional candidate with a per-node additive term:
/// value(i) = lerp(row, i+shift, w) + add[i], clamped past the row end.
void candidate_max_add(double* out, const double* row, const double* add, std::size_t n,
                       std::size_t shift, double w, bool init);

namespace scalar {
void solve_lines(const TridiagonalLU& lu, double* data, std::size_t n_lines);
void candidate_max(double* out, const double* row0, const double* row1, std::size_t n,
                   const RowStencil& st, bool init);
void candidate_max_add(double* out, const double* row, const double* add, std::size_t n,
                       std::size_t shift, double w, bool init);
}  // namespace scalar

namespace avx2 {
void solve_lines(const TridiagonalLU& lu, double* data, std::size_t n_lines);
void candidate_max(double* out, const double* row0, const double* row1, std::size_t n,
                   const RowStencil& st, bool init);
void candidate_max_add(double* out, const double* row, const double* add, std::size_t n,
                       std::size_t shift, double w, bool init);
}  // namespace avx2

}  // namespace ctlopt::kernels
