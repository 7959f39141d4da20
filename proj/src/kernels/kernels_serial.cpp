#include <algorithm>
#include <atomic>
#include <limits>

#include "cohortlens/kernels.hpp"

namespace cohortlens::kernels {

namespace {
std::atomic<Backend> g_backend{Backend::OpenMP};
}

Backend default_backend() { return g_backend.load(std::memory_order_relaxed); }
void set_default_backend(Backend backend) { g_backend.store(backend, std::memory_order_relaxed); }

void count_support_serial(std::span<const std::uint32_t> transactions,
                          std::span<const std::uint32_t> candidates,
                          std::span<std::uint32_t> counts) {
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const std::uint32_t mask = candidates[c];
    std::uint32_t n = 0;
    for (std::uint32_t t : transactions) n += (t & mask) == mask;
    counts[c] = n;
  }
}

void ward_init_serial(std::span<const double> data, std::size_t rows, std::size_t cols,
                      std::span<double> out) {
  for (std::size_t i = 0; i < rows; ++i) {
    out[i * rows + i] = 0.0;
    for (std::size_t j = i + 1; j < rows; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < cols; ++k) {
        const double d = data[i * cols + k] - data[j * cols + k];
        sq += d * d;
      }
      out[i * rows + j] = out[j * rows + i] = 0.5 * sq;
    }
  }
}

PairCost min_active_pair_serial(std::span<const double> dist, std::size_t n,
                                std::span<const std::uint8_t> active) {
  PairCost best{std::numeric_limits<double>::infinity(), n, n};
  for (std::size_t i = 0; i < n; ++i) {
    if (!active[i]) continue;
    const double* row = dist.data() + i * n;
    for (std::size_t j = i + 1; j < n; ++j) {
      if (active[j] && row[j] < best.cost) best = {row[j], i, j};
    }
  }
  return best;
}

void rating_histogram_serial(std::span<const std::uint8_t> cells, std::size_t rows,
                             std::size_t cols, std::span<std::uint32_t> out) {
  std::fill(out.begin(), out.end(), 0u);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const std::uint8_t v = cells[r * cols + c];
      if (v <= 10) ++out[c * 11 + v];
    }
  }
}

void count_support(std::span<const std::uint32_t> transactions,
                   std::span<const std::uint32_t> candidates, std::span<std::uint32_t> counts,
                   Backend backend) {
  if (backend == Backend::OpenMP) {
    count_support_omp(transactions, candidates, counts);
  } else {
    count_support_serial(transactions, candidates, counts);
  }
}

void ward_init(std::span<const double> data, std::size_t rows, std::size_t cols,
               std::span<double> out, Backend backend) {
  if (backend == Backend::OpenMP) {
    ward_init_omp(data, rows, cols, out);
  } else {
    ward_init_serial(data, rows, cols, out);
  }
}

PairCost min_active_pair(std::span<const double> dist, std::size_t n,
                         std::span<const std::uint8_t> active, Backend backend) {
  return backend == Backend::OpenMP ? min_active_pair_omp(dist, n, active)
                                    : min_active_pair_serial(dist, n, active);
}

void rating_histogram(std::span<const std::uint8_t> cells, std::size_t rows, std::size_t cols,
                      std::span<std::uint32_t> out, Backend backend) {
  if (backend == Backend::OpenMP) {
    rating_histogram_omp(cells, rows, cols, out);
  } else {
    rating_histogram_serial(cells, rows, cols, out);
  }
}

}  // namespace cohortlens::kernels
