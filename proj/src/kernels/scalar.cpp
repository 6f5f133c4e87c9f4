#include <algorithm>

#include "ctlopt/kernels.hpp"

namespace ctlopt::kernels::scalar {

void solve_lines(const TridiagonalLU& lu, double* data, std::size_t n_lines) {
  const std::size_t n = lu.size();
  if (n == 0) return;
  {
    const double inv = lu.inv_pivot[0];
    for (std::size_t l = 0; l < n_lines; ++l) data[l] *= inv;
  }
  for (std::size_t i = 1; i < n; ++i) {
    double* cur = data + i * n_lines;
    const double* prev = cur - n_lines;
    const double a = lu.sub[i];
    const double inv = lu.inv_pivot[i];
    for (std::size_t l = 0; l < n_lines; ++l) cur[l] = (cur[l] - a * prev[l]) * inv;
  }
  for (std::size_t i = n - 1; i-- > 0;) {
    double* cur = data + i * n_lines;
    const double* next = cur + n_lines;
    const double c = lu.sup[i];
    for (std::size_t l = 0; l < n_lines; ++l) cur[l] -= c * next[l];
  }
}

void candidate_max(double* out, const double* row0, const double* row1, std::size_t n,
                   const RowStencil& st, bool init) {
  if (n == 0) return;
  const double wx0 = 1.0 - st.wx;
  const double wy0 = 1.0 - st.wy;
  const std::size_t full = (n - 1 > st.shift) ? n - 1 - st.shift : 0;
  for (std::size_t i = 0; i < full; ++i) {
    const std::size_t j = i + st.shift;
    const double v0 = wx0 * row0[j] + st.wx * row0[j + 1];
    const double v1 = wx0 * row1[j] + st.wx * row1[j + 1];
    const double c = wy0 * v0 + st.wy * v1 + st.add;
    out[i] = init ? c : std::max(out[i], c);
  }
  const double edge = wy0 * row0[n - 1] + st.wy * row1[n - 1] + st.add;
  for (std::size_t i = full; i < n; ++i) out[i] = init ? edge : std::max(out[i], edge);
}

void candidate_max_add(double* out, const double* row, const double* add, std::size_t n,
                       std::size_t shift, double w, bool init) {
  if (n == 0) return;
  const double w0 = 1.0 - w;
  const std::size_t full = (n - 1 > shift) ? n - 1 - shift : 0;
  for (std::size_t i = 0; i < full; ++i) {
    const double c = w0 * row[i + shift] + w * row[i + shift + 1] + add[i];
    out[i] = init ? c : std::max(out[i], c);
  }
  for (std::size_t i = full; i < n; ++i) {
    const double c = row[n - 1] + add[i];
    out[i] = init ? c : std::max(out[i], c);
  }
}

}  // namespace ctlopt::kernels::scalar
