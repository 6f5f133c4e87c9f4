// Compiled with -mavx2 -mfma. Only reached when the CPU reports AVX2 and FMA.

#include <algorithm>

#include "ctlopt/kernels.hpp"

#if defined(__AVX2__) && defined(__FMA__)
#include <immintrin.h>

namespace ctlopt::kernels::avx2 {

void solve_lines(const TridiagonalLU& lu, double* data, std::size_t n_lines) {
  const std::size_t n = lu.size();
  if (n == 0) return;
  const std::size_t vec_end = n_lines - n_lines % 4;
  {
    const __m256d inv = _mm256_set1_pd(lu.inv_pivot[0]);
    std::size_t l = 0;
    for (; l < vec_end; l += 4) _mm256_storeu_pd(data + l, _mm256_mul_pd(_mm256_loadu_pd(data + l), inv));
    for (; l < n_lines; ++l) data[l] *= lu.inv_pivot[0];
  }
  for (std::size_t i = 1; i < n; ++i) {
    double* cur = data + i * n_lines;
    const double* prev = cur - n_lines;
    const __m256d a = _mm256_set1_pd(lu.sub[i]);
    const __m256d inv = _mm256_set1_pd(lu.inv_pivot[i]);
    std::size_t l = 0;
    for (; l < vec_end; l += 4) {
      // (cur - a * prev) * inv
      const __m256d t = _mm256_fnmadd_pd(a, _mm256_loadu_pd(prev + l), _mm256_loadu_pd(cur + l));
      _mm256_storeu_pd(cur + l, _mm256_mul_pd(t, inv));
    }
    for (; l < n_lines; ++l) cur[l] = (cur[l] - lu.sub[i] * prev[l]) * lu.inv_pivot[i];
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    double* cur = data + i * n_lines;
    const double* next = cur + n_lines;
    const __m256d c = _mm256_set1_pd(lu.sup[i]);
    std::size_t l = 0;
    for (; l < vec_end; l += 4)
      _mm256_storeu_pd(cur + l, _mm256_fnmadd_pd(c, _mm256_loadu_pd(next + l), _mm256_loadu_pd(cur + l)));
    for (; l < n_lines; ++l) cur[l] -= lu.sup[i] * next[l];
  }
}

void candidate_max(double* out, const double* row0, const double* row1, std::size_t n,
                   const RowStencil& st, bool init) {
  if (n == 0) return;
  const double wx0 = 1.0 - st.wx;
  const double wy0 = 1.0 - st.wy;
  const std::size_t full = (n - 1 > st.shift) ? n - 1 - st.shift : 0;
  const std::size_t vec_end = full - full % 4;

  const __m256d vwx = _mm256_set1_pd(st.wx);
  const __m256d vwx0 = _mm256_set1_pd(wx0);
  const __m256d vwy = _mm256_set1_pd(st.wy);
  const __m256d vwy0 = _mm256_set1_pd(wy0);
  const __m256d vadd = _mm256_set1_pd(st.add);
  const double* a = row0 + st.shift;
  const double* b = row1 + st.shift;
  std::size_t i = 0;
  for (; i < vec_end; i += 4) {
    const __m256d v0 = _mm256_fmadd_pd(vwx, _mm256_loadu_pd(a + i + 1), _mm256_mul_pd(vwx0, _mm256_loadu_pd(a + i)));
    const __m256d v1 = _mm256_fmadd_pd(vwx, _mm256_loadu_pd(b + i + 1), _mm256_mul_pd(vwx0, _mm256_loadu_pd(b + i)));
    __m256d c = _mm256_fmadd_pd(vwy, v1, _mm256_fmadd_pd(vwy0, v0, vadd));
    if (!init) c = _mm256_max_pd(_mm256_loadu_pd(out + i), c);
    _mm256_storeu_pd(out + i, c);
  }
  for (; i < full; ++i) {
    const std::size_t j = i + st.shift;
    const double v0 = wx0 * row0[j] + st.wx * row0[j + 1];
    const double v1 = wx0 * row1[j] + st.wx * row1[j + 1];
    const double c = wy0 * v0 + st.wy * v1 + st.add;
    out[i] = init ? c : std::max(out[i], c);
  }
  const double edge = wy0 * row0[n - 1] + st.wy * row1[n - 1] + st.add;
  for (i = full; i < n; ++i) out[i] = init ? edge : std::max(out[i], edge);
}

void candidate_max_add(double* out, const double* row, const double* add, std::size_t n,
                       std::size_t shift, double w, bool init) {
  if (n == 0) return;
  const double w0 = 1.0 - w;
  const std::size_t full = (n - 1 > shift) ? n - 1 - shift : 0;
  const std::size_t vec_end = full - full % 4;
  const __m256d vw = _mm256_set1_pd(w);
  const __m256d vw0 = _mm256_set1_pd(w0);
  const double* a = row + shift;
  std::size_t i = 0;
  for (; i < vec_end; i += 4) {
    const __m256d lerp = _mm256_fmadd_pd(vw, _mm256_loadu_pd(a + i + 1), _mm256_mul_pd(vw0, _mm256_loadu_pd(a + i)));
    __m256d c = _mm256_add_pd(lerp, _mm256_loadu_pd(add + i));
    if (!init) c = _mm256_max_pd(_mm256_loadu_pd(out + i), c);
    _mm256_storeu_pd(out + i, c);
  }
  for (; i < full; ++i) {
    const double c = w0 * row[i + shift] + w * row[i + shift + 1] + add[i];
    out[i] = init ? c : std::max(out[i], c);
  }
  for (i = full; i < n; ++i) {
    const double c = row[n - 1] + add[i];
    out[i] = init ? c : std::max(out[i], c);
  }
}

}  // namespace ctlopt::kernels::avx2

#else

namespace ctlopt::kernels::avx2 {

void solve_lines(const TridiagonalLU& lu, double* data, std::size_t n_lines) {
  scalar::solve_lines(lu, data, n_lines);
}

void candidate_max(double* out, const double* row0, const double* row1, std::size_t n,
                   const RowStencil& st, bool init) {
  scalar::candidate_max(out, row0, row1, n, st, init);
}

void candidate_max_add(double* out, const double* row, const double* add, std::size_t n,
                       std::size_t shift, double w, bool init) {
  scalar::candidate_max_add(out, row, add, n, shift, w, init);
}

}  // namespace ctlopt::kernels::avx2

#endif
