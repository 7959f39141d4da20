#include <algorithm>
#include <cstdint>
#include <limits>

#include "cohortlens/kernels.hpp"

namespace cohortlens::kernels {

void count_support_omp(std::span<const std::uint32_t> transactions,
                       std::span<const std::uint32_t> candidates,
                       std::span<std::uint32_t> counts) {
  const auto nc = static_cast<std::int64_t>(candidates.size());
  const std::uint32_t* tx = transactions.data();
  const std::size_t nt = transactions.size();
#pragma omp parallel for schedule(static) if (nc * static_cast<std::int64_t>(nt) > 50000)
  for (std::int64_t c = 0; c < nc; ++c) {
    const std::uint32_t mask = candidates[c];
    std::uint32_t n = 0;
    for (std::size_t t = 0; t < nt; ++t) n += (tx[t] & mask) == mask;
    counts[c] = n;
  }
}

void ward_init_omp(std::span<const double> data, std::size_t rows, std::size_t cols,
                   std::span<double> out) {
  const auto n = static_cast<std::int64_t>(rows);
  // Each iteration owns row i of the output; both halves are computed directly.
#pragma omp parallel for schedule(dynamic, 16) if (n > 64)
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < n; ++j) {
      if (j == i) {
        out[i * rows + i] = 0.0;
        continue;
      }
      // Same operand order as the serial kernel: row min(i,j) minus row max(i,j).
      const double* a = data.data() + std::min(i, j) * cols;
      const double* b = data.data() + std::max(i, j) * cols;
      double sq = 0.0;
      for (std::size_t k = 0; k < cols; ++k) {
        const double d = a[k] - b[k];
        sq += d * d;
      }
      out[i * rows + j] = 0.5 * sq;
    }
  }
}

PairCost min_active_pair_omp(std::span<const double> dist, std::size_t n,
                             std::span<const std::uint8_t> active) {
  PairCost best{std::numeric_limits<double>::infinity(), n, n};
  const auto ni = static_cast<std::int64_t>(n);
#pragma omp parallel if (n > 128)
  {
    PairCost local{std::numeric_limits<double>::infinity(), n, n};
#pragma omp for schedule(static) nowait
    for (std::int64_t i = 0; i < ni; ++i) {
      if (!active[i]) continue;
      const double* row = dist.data() + i * n;
      for (std::size_t j = i + 1; j < n; ++j) {
        if (active[j] && row[j] < local.cost) local = {row[j], static_cast<std::size_t>(i), j};
      }
    }
#pragma omp critical
    {
      // Combine on (cost, i, j) so the result does not depend on thread count.
      if (local.cost < best.cost ||
          (local.cost == best.cost && (local.i < best.i || (local.i == best.i && local.j < best.j)))) {
        best = local;
      }
    }
  }
  return best;
}

void rating_histogram_omp(std::span<const std::uint8_t> cells, std::size_t rows,
                          std::size_t cols, std::span<std::uint32_t> out) {
  const auto nc = static_cast<std::int64_t>(cols);
#pragma omp parallel for schedule(static) if (rows * cols > 20000)
  for (std::int64_t c = 0; c < nc; ++c) {
    std::uint32_t* hist = out.data() + c * 11;
    std::fill(hist, hist + 11, 0u);
    for (std::size_t r = 0; r < rows; ++r) {
      const std::uint8_t v = cells[r * cols + c];
      if (v <= 10) ++hist[v];
    }
  }
}

}  // namespace cohortlens::kernels
