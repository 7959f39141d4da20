#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "cohortlens/model.hpp"

namespace cohortlens::cluster {

/// Ratings of the selected symptoms at one timepoint, one row per eligible
/// patient. Rows follow dataset order (sorted patient ids), columns follow
/// manifest order.
struct PatientSymptomMatrix {
  std::size_t timepoint = 0;
  std::vector<std::size_t> patient_rows;  // dataset row of each matrix row
  std::vector<std::size_t> symptoms;      // manifest indices
  std::vector<double> values;             // row-major rows() x cols()

  std::size_t rows() const { return patient_rows.size(); }
  std::size_t cols() const { return symptoms.size(); }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
};

/// Requires an imputed dataset. Patients are those eligible for the
/// timepoint's phase.
PatientSymptomMatrix build_matrix(const CohortDataset& dataset, std::size_t timepoint,
                                  const std::vector<std::size_t>& symptom_subset);

/// Wraps a raw row-major matrix (tests, tools).
PatientSymptomMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows);

struct Merge {
  std::size_t left;   // smallest row index in the first cluster
  std::size_t right;  // smallest row index in the second cluster
  double cost;        // increase in within-cluster sum of squares
  std::size_t size;   // size of the merged cluster
};

struct WardResult {
  /// Cluster rank per row; 0 is the highest mean row-sum ("high burden").
  std::vector<int> labels;
  /// Full dendrogram, n-1 merges in order.
  std::vector<Merge> merges;
};

/// Agglomerative Ward clustering on Euclidean distance, naive O(n^3) with
/// the Lance-Williams update. Equal costs merge the smallest (i, j) first.
WardResult ward_cluster(const PatientSymptomMatrix& m, std::size_t k = 2);

/// Within-cluster sum of squared distances to cluster centroids.
double within_cluster_ss(const PatientSymptomMatrix& m, const std::vector<int>& labels);

struct PcaResult {
  std::vector<std::array<double, 2>> coords;
  std::array<std::vector<double>, 2> components;  // unit loadings, length cols()
  std::array<double, 2> variances{};              // eigenvalues of the covariance
  bool degenerate = false;                        // every row identical
};

/// Centered covariance eigendecomposition, projections on the top two
/// eigenvectors. Each component's largest-magnitude loading is positive.
PcaResult pca_project(const PatientSymptomMatrix& m);

struct ClusterPoint {
  std::string patient_id;
  double pc1 = 0.0;
  double pc2 = 0.0;
  int cluster = 0;
  Therapy therapy = Therapy::Radiation;
  Gender gender = Gender::M;
  TCategory t_category = TCategory::T0;
};

struct ClusterView {
  std::size_t timepoint = 0;
  std::vector<std::size_t> symptoms;
  std::size_t k = 2;
  std::vector<ClusterPoint> points;
  std::array<double, 2> variances{};
  std::vector<std::string> warnings;
};

/// "high"/"low" for two clusters, otherwise "c<rank>".
std::string burden_label(int cluster, std::size_t k);

ClusterView recluster(const CohortDataset& dataset, std::size_t timepoint,
                      const std::vector<std::size_t>& symptom_subset, std::size_t k = 2);

}  // namespace cohortlens::cluster
