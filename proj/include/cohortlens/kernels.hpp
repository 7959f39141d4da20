#pragma once

// Data-parallel inner loops. Every kernel has a plain serial reference and an
// OpenMP version; both must produce bit-identical results; the serial one is
// what the tests and benchmarks compare against.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cohortlens::kernels {

enum class Backend { Serial, OpenMP };

/// Default backend used by the analytics modules.
Backend default_backend();
void set_default_backend(Backend backend);

// Itemset support counting over bitmask transactions.
// counts[c] = #{t : (transactions[t] & candidates[c]) == candidates[c]}.
void count_support_serial(std::span<const std::uint32_t> transactions,
                          std::span<const std::uint32_t> candidates,
                          std::span<std::uint32_t> counts);
void count_support_omp(std::span<const std::uint32_t> transactions,
                       std::span<const std::uint32_t> candidates,
                       std::span<std::uint32_t> counts);
void count_support(std::span<const std::uint32_t> transactions,
                   std::span<const std::uint32_t> candidates, std::span<std::uint32_t> counts,
                   Backend backend = default_backend());

// Half squared Euclidean distances between rows of a row-major matrix; this
// is the Ward merge cost of two singletons. Output is a dense n*n matrix.
void ward_init_serial(std::span<const double> data, std::size_t rows, std::size_t cols,
                      std::span<double> out);
void ward_init_omp(std::span<const double> data, std::size_t rows, std::size_t cols,
                   std::span<double> out);
void ward_init(std::span<const double> data, std::size_t rows, std::size_t cols,
               std::span<double> out, Backend backend = default_backend());

struct PairCost {
  double cost;
  std::size_t i;
  std::size_t j;
};

// Cheapest active pair (i < j) in a dense n*n cost matrix. Ties resolve to
// the lexicographically smallest (i, j).
PairCost min_active_pair_serial(std::span<const double> dist, std::size_t n,
                                std::span<const std::uint8_t> active);
PairCost min_active_pair_omp(std::span<const double> dist, std::size_t n,
                             std::span<const std::uint8_t> active);
PairCost min_active_pair(std::span<const double> dist, std::size_t n,
                         std::span<const std::uint8_t> active,
                         Backend backend = default_backend());

// Histogram of ratings 0..10 per column for a row-major matrix of cells where
// 255 marks "not reported". Output is cols*11 counts.
inline constexpr std::uint8_t kNotReported = 255;
void rating_histogram_serial(std::span<const std::uint8_t> cells, std::size_t rows,
                             std::size_t cols, std::span<std::uint32_t> out);
void rating_histogram_omp(std::span<const std::uint8_t> cells, std::size_t rows,
                          std::size_t cols, std::span<std::uint32_t> out);
void rating_histogram(std::span<const std::uint8_t> cells, std::size_t rows, std::size_t cols,
                      std::span<std::uint32_t> out, Backend backend = default_backend());

}  // namespace cohortlens::kernels
