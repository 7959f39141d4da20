#include "cohortlens/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cohortlens/error.hpp"
#include "cohortlens/kernels.hpp"

namespace cohortlens::stats {

RatingBin bin_of(int rating) {
  if (rating <= 0) return RatingBin::Zero;
  if (rating <= 5) return RatingBin::OneToFive;
  if (rating <= 9) return RatingBin::SixToNine;
  return RatingBin::Ten;
}

std::vector<HeatmapCell> heatmap(const CohortDataset& dataset) {
  // Flatten reported cells as rows=patients, cols=(symptom, timepoint).
  constexpr std::size_t cols = kSymptomCount * kTimepointCount;
  const std::size_t rows = dataset.size();
  std::vector<std::uint8_t> cells(rows * cols, kernels::kNotReported);
  for (std::size_t p = 0; p < rows; ++p) {
    for (std::size_t s = 0; s < kSymptomCount; ++s) {
      const auto& series = dataset.series(p, s);
      for (std::size_t t = 0; t < kTimepointCount; ++t) {
        if (series.reported[t]) cells[p * cols + s * kTimepointCount + t] = *series.values[t];
      }
    }
  }
  std::vector<std::uint32_t> hist(cols * 11);
  kernels::rating_histogram(cells, rows, cols, hist);

  std::vector<HeatmapCell> out;
  out.reserve(cols);
  for (std::size_t s = 0; s < kSymptomCount; ++s) {
    for (std::size_t t = 0; t < kTimepointCount; ++t) {
      const std::uint32_t* h = hist.data() + (s * kTimepointCount + t) * 11;
      HeatmapCell cell;
      cell.symptom = s;
      cell.timepoint = t;
      std::array<std::uint32_t, 4> bins{};
      for (int r = 0; r <= 10; ++r) bins[static_cast<std::size_t>(bin_of(r))] += h[r];
      cell.reporters = bins[0] + bins[1] + bins[2] + bins[3];
      if (cell.reporters > 0) {
        for (std::size_t b = 0; b < 4; ++b) {
          cell.bin_fractions[b] = static_cast<double>(bins[b]) / static_cast<double>(cell.reporters);
        }
      }
      cell.reporting_fraction =
          rows == 0 ? 0.0 : static_cast<double>(cell.reporters) / static_cast<double>(rows);
      out.push_back(cell);
    }
  }
  return out;
}

std::vector<double> average_ranks(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
    // Positions i..j (0-based) share rank mean((i+1)..(j+1)).
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  if (n != b.size()) throw Error(ErrorCode::InvalidArgument, "length mismatch");
  if (n < 2) return std::nullopt;
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

std::vector<CorrelationEntry> spearman_matrix(const CohortDataset& dataset, std::size_t timepoint) {
  if (timepoint >= kTimepointCount) {
    throw Error(ErrorCode::UnknownTimepointLabel, "timepoint index out of range");
  }
  std::vector<std::size_t> reporters;
  for (std::size_t p = 0; p < dataset.size(); ++p) {
    if (dataset.questionnaire_reported(p, timepoint)) reporters.push_back(p);
  }
  if (reporters.size() < 2) {
    throw Error(ErrorCode::TooFewReporters,
                "need at least 2 reporters at " + std::string(time_grid()[timepoint].label));
  }

  std::vector<CorrelationEntry> out(kSymptomCount * kSymptomCount);
  const auto n_pairs = static_cast<std::int64_t>(kSymptomCount * kSymptomCount);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t idx = 0; idx < n_pairs; ++idx) {
    const std::size_t a = static_cast<std::size_t>(idx) / kSymptomCount;
    const std::size_t b = static_cast<std::size_t>(idx) % kSymptomCount;
    if (b < a) continue;
    std::vector<double> xa, xb;
    for (auto p : reporters) {
      const auto& sa = dataset.series(p, a);
      const auto& sb = dataset.series(p, b);
      if (sa.reported[timepoint] && sb.reported[timepoint]) {
        xa.push_back(*sa.values[timepoint]);
        xb.push_back(*sb.values[timepoint]);
      }
    }
    auto rho = spearman(xa, xb);
    // The diagonal is exactly 1 whenever it is defined.
    if (a == b && rho) rho = 1.0;
    out[a * kSymptomCount + b] = {a, b, rho, xa.size()};
    out[b * kSymptomCount + a] = {b, a, rho, xa.size()};
  }
  return out;
}

double prevalence(const CohortDataset& dataset, std::size_t symptom, std::size_t timepoint,
                  int presence_threshold) {
  if (symptom >= kSymptomCount) throw Error(ErrorCode::UnknownSymptom, "symptom index out of range");
  if (timepoint >= kTimepointCount) {
    throw Error(ErrorCode::UnknownTimepointLabel, "timepoint index out of range");
  }
  std::size_t reporters = 0;
  std::size_t present = 0;
  for (std::size_t p = 0; p < dataset.size(); ++p) {
    const auto& s = dataset.series(p, symptom);
    if (!s.reported[timepoint]) continue;
    ++reporters;
    present += *s.values[timepoint] >= presence_threshold;
  }
  if (reporters == 0) throw Error(ErrorCode::NoReporters, "no reporters at this timepoint");
  return static_cast<double>(present) / static_cast<double>(reporters);
}

}  // namespace cohortlens::stats
