#include "cohortlens/cluster.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "cohortlens/error.hpp"
#include "cohortlens/kernels.hpp"

namespace cohortlens::cluster {

PatientSymptomMatrix build_matrix(const CohortDataset& dataset, std::size_t timepoint,
                                  const std::vector<std::size_t>& symptom_subset) {
  if (!dataset.imputed()) {
    throw Error(ErrorCode::UnimputedSeries, "clustering requires an imputed dataset");
  }
  if (timepoint >= kTimepointCount) {
    throw Error(ErrorCode::UnknownTimepointLabel, "timepoint index out of range");
  }
  if (symptom_subset.empty()) throw Error(ErrorCode::EmptySymptomSubset, "no symptoms selected");

  PatientSymptomMatrix m;
  m.timepoint = timepoint;
  m.symptoms = symptom_subset;
  std::sort(m.symptoms.begin(), m.symptoms.end());
  m.symptoms.erase(std::unique(m.symptoms.begin(), m.symptoms.end()), m.symptoms.end());
  for (auto s : m.symptoms) {
    if (s >= kSymptomCount) throw Error(ErrorCode::UnknownSymptom, "symptom index out of range");
  }

  m.patient_rows = eligible_patients(dataset, phase_of(timepoint));
  if (m.patient_rows.empty()) {
    throw Error(ErrorCode::NoEligiblePatients,
                "no patients eligible at " + std::string(time_grid()[timepoint].label));
  }
  m.values.reserve(m.rows() * m.cols());
  for (auto p : m.patient_rows) {
    for (auto s : m.symptoms) m.values.push_back(*dataset.series(p, s).values[timepoint]);
  }
  return m;
}

PatientSymptomMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows) {
  PatientSymptomMatrix m;
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  m.symptoms.resize(cols);
  std::iota(m.symptoms.begin(), m.symptoms.end(), 0);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw Error(ErrorCode::InvalidArgument, "ragged matrix");
    m.patient_rows.push_back(r);
    m.values.insert(m.values.end(), rows[r].begin(), rows[r].end());
  }
  return m;
}

WardResult ward_cluster(const PatientSymptomMatrix& m, std::size_t k) {
  const std::size_t n = m.rows();
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  if (n < k || n < 1) {
    throw Error(ErrorCode::TooFewPatients,
                "need at least " + std::to_string(k) + " patients, have " + std::to_string(n));
  }

  std::vector<double> dist(n * n);
  kernels::ward_init(m.values, n, m.cols(), dist);
  std::vector<std::uint8_t> active(n, 1);
  std::vector<std::size_t> size(n, 1);
  // Union-find style parent links so the cut can be read back.
  std::vector<std::size_t> owner(n);
  std::iota(owner.begin(), owner.end(), 0);

  WardResult result;
  result.merges.reserve(n > 0 ? n - 1 : 0);
  std::vector<std::size_t> owner_at_cut;
  if (n == k) owner_at_cut = owner;

  for (std::size_t step = 0; step + 1 < n; ++step) {
    const auto best = kernels::min_active_pair(dist, n, active);
    const std::size_t i = best.i;
    const std::size_t j = best.j;
    const double dij = dist[i * n + j];
    const double ni = static_cast<double>(size[i]);
    const double nj = static_cast<double>(size[j]);
    for (std::size_t h = 0; h < n; ++h) {
      if (!active[h] || h == i || h == j) continue;
      const double nh = static_cast<double>(size[h]);
      const double updated =
          ((ni + nh) * dist[h * n + i] + (nj + nh) * dist[h * n + j] - nh * dij) / (ni + nj + nh);
      dist[h * n + i] = dist[i * n + h] = updated;
    }
    active[j] = 0;
    size[i] += size[j];
    for (auto& o : owner) {
      if (o == j) o = i;
    }
    result.merges.push_back({i, j, best.cost, size[i]});
    if (n - (step + 1) == k) owner_at_cut = owner;
  }

  // Rank the k clusters by mean row-sum, highest first; ties by slot index.
  std::vector<std::size_t> slots;
  for (std::size_t r = 0; r < n; ++r) {
    if (owner_at_cut[r] == r) slots.push_back(r);
  }
  std::vector<double> mean_sum(n, 0.0);
  std::vector<std::size_t> members(n, 0);
  for (std::size_t r = 0; r < n; ++r) {
    double row_sum = 0.0;
    for (std::size_t c = 0; c < m.cols(); ++c) row_sum += m.at(r, c);
    mean_sum[owner_at_cut[r]] += row_sum;
    ++members[owner_at_cut[r]];
  }
  for (auto s : slots) mean_sum[s] /= static_cast<double>(members[s]);
  std::stable_sort(slots.begin(), slots.end(),
                   [&](std::size_t a, std::size_t b) { return mean_sum[a] > mean_sum[b]; });
  std::vector<int> rank_of(n, -1);
  for (std::size_t r = 0; r < slots.size(); ++r) rank_of[slots[r]] = static_cast<int>(r);
  result.labels.resize(n);
  for (std::size_t r = 0; r < n; ++r) result.labels[r] = rank_of[owner_at_cut[r]];
  return result;
}

double within_cluster_ss(const PatientSymptomMatrix& m, const std::vector<int>& labels) {
  const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> centroid(static_cast<std::size_t>(k) * m.cols(), 0.0);
  std::vector<std::size_t> count(static_cast<std::size_t>(k), 0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    ++count[labels[r]];
    for (std::size_t c = 0; c < m.cols(); ++c) centroid[labels[r] * m.cols() + c] += m.at(r, c);
  }
  for (int g = 0; g < k; ++g) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (count[g]) centroid[g * m.cols() + c] /= static_cast<double>(count[g]);
    }
  }
  double ss = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      const double d = m.at(r, c) - centroid[labels[r] * m.cols() + c];
      ss += d * d;
    }
  }
  return ss;
}

PcaResult pca_project(const PatientSymptomMatrix& m) {
  const std::size_t n = m.rows();
  const std::size_t d = m.cols();
  if (n < 2) throw Error(ErrorCode::TooFewPatients, "PCA needs at least 2 rows");
  if (d < 1) throw Error(ErrorCode::EmptySymptomSubset, "PCA needs at least 1 column");

  Eigen::MatrixXd x(n, d);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < d; ++c) x(r, c) = m.at(r, c);
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  x.rowwise() -= mean;

  PcaResult out;
  out.coords.assign(n, {0.0, 0.0});
  out.components[0].assign(d, 0.0);
  out.components[1].assign(d, 0.0);
  if (x.cwiseAbs().maxCoeff() == 0.0) {
    out.degenerate = true;
    return out;
  }

  const Eigen::MatrixXd cov = (x.transpose() * x) / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::InvalidArgument, "covariance eigendecomposition failed");
  }
  // Eigen returns ascending eigenvalues.
  const auto& values = solver.eigenvalues();
  const auto& vectors = solver.eigenvectors();
  const std::size_t used = std::min<std::size_t>(2, d);
  for (std::size_t comp = 0; comp < used; ++comp) {
    const Eigen::Index col = static_cast<Eigen::Index>(d - 1 - comp);
    Eigen::VectorXd v = vectors.col(col);
    Eigen::Index arg = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i) {
      if (std::abs(v(i)) > std::abs(v(arg)) + 1e-12) arg = i;
    }
    if (v(arg) < 0) v = -v;
    out.variances[comp] = std::max(0.0, values(col));
    for (std::size_t c = 0; c < d; ++c) out.components[comp][c] = v(static_cast<Eigen::Index>(c));
    const Eigen::VectorXd scores = x * v;
    for (std::size_t r = 0; r < n; ++r) out.coords[r][comp] = scores(static_cast<Eigen::Index>(r));
  }
  return out;
}

std::string burden_label(int cluster, std::size_t k) {
  if (k == 2) return cluster == 0 ? "high" : "low";
  return "c" + std::to_string(cluster);
}

ClusterView recluster(const CohortDataset& dataset, std::size_t timepoint,
                      const std::vector<std::size_t>& symptom_subset, std::size_t k) {
  const auto m = build_matrix(dataset, timepoint, symptom_subset);
  const auto ward = ward_cluster(m, k);

  ClusterView view;
  view.timepoint = timepoint;
  view.symptoms = m.symptoms;
  view.k = k;

  PcaResult pca;
  if (m.rows() >= 2) {
    pca = pca_project(m);
  } else {
    pca.coords.assign(m.rows(), {0.0, 0.0});
    pca.degenerate = true;
  }
  if (pca.degenerate) view.warnings.emplace_back("DegenerateInput: all rows identical");
  view.variances = pca.variances;

  view.points.reserve(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto& p = dataset.patients()[m.patient_rows[r]];
    view.points.push_back({p.patient_id, pca.coords[r][0], pca.coords[r][1], ward.labels[r],
                           p.therapy, p.gender, p.t_category});
  }
  return view;
}

}  // namespace cohortlens::cluster
