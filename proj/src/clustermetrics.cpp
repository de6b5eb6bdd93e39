#include "semlabels/clustermetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "semlabels/error.hpp"

namespace semlabels {
namespace {

double Distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Matrix Centroids(const LabeledPointSet& data, int k, std::vector<int>& counts) {
  const std::size_t d = data.points.cols();
  Matrix c(k, d);
  counts.assign(k, 0);
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    auto row = c.row(data.labels[i]);
    const auto p = data.points.row(i);
    for (std::size_t j = 0; j < d; ++j) row[j] += p[j];
    ++counts[data.labels[i]];
  }
  for (int cl = 0; cl < k; ++cl) {
    for (double& v : c.row(cl)) v /= counts[cl];
  }
  return c;
}

// Norm of the per-dimension population variance vector of the selected rows.
double VarianceNorm(const Matrix& points, const std::vector<std::size_t>& rows) {
  const std::size_t d = points.cols();
  std::vector<double> mean(d, 0.0);
  for (std::size_t r : rows) {
    const auto p = points.row(r);
    for (std::size_t j = 0; j < d; ++j) mean[j] += p[j];
  }
  for (double& m : mean) m /= static_cast<double>(rows.size());
  std::vector<double> var(d, 0.0);
  for (std::size_t r : rows) {
    const auto p = points.row(r);
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = p[j] - mean[j];
      var[j] += diff * diff;
    }
  }
  for (double& v : var) v /= static_cast<double>(rows.size());
  return Norm2(var);
}

}  // namespace

int ValidateClusters(const LabeledPointSet& data) {
  if (data.points.rows() != data.labels.size()) {
    throw Error(ErrorCode::kDimMismatch, "point and label counts differ");
  }
  int k = 0;
  for (int label : data.labels) {
    if (label < 0) throw Error(ErrorCode::kBadClusterLabels, "negative cluster id");
    k = std::max(k, label + 1);
  }
  std::vector<int> counts(k, 0);
  for (int label : data.labels) ++counts[label];
  for (int c = 0; c < k; ++c) {
    if (counts[c] == 0) {
      throw Error(ErrorCode::kBadClusterLabels,
                  "cluster ids must be contiguous; cluster " + std::to_string(c) + " is empty");
    }
  }
  if (k < 2) throw Error(ErrorCode::kSingleCluster, "need at least two clusters");
  return k;
}

double Silhouette(const LabeledPointSet& data) {
  const int k = ValidateClusters(data);
  const std::size_t n = data.labels.size();
  std::vector<int> counts(k, 0);
  for (int label : data.labels) ++counts[label];

  std::vector<double> sums(k);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const int own = data.labels[i];
    if (counts[own] == 1) continue;
    std::fill(sums.begin(), sums.end(), 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[data.labels[j]] += Distance(data.points.row(i), data.points.row(j));
    }
    const double a = sums[own] / (counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) {
      if (c != own) b = std::min(b, sums[c] / counts[c]);
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

double CalinskiHarabasz(const LabeledPointSet& data) {
  const int k = ValidateClusters(data);
  const std::size_t n = data.labels.size();
  if (static_cast<int>(n) <= k) {
    throw Error(ErrorCode::kBadClusterLabels, "need more points than clusters");
  }
  std::vector<int> counts;
  const Matrix centroids = Centroids(data, k, counts);
  const std::size_t d = data.points.cols();
  std::vector<double> grand(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto p = data.points.row(i);
    for (std::size_t j = 0; j < d; ++j) grand[j] += p[j];
  }
  for (double& g : grand) g /= static_cast<double>(n);

  double between = 0.0;
  for (int c = 0; c < k; ++c) {
    const double dist = Distance(centroids.row(c), grand);
    between += counts[c] * dist * dist;
  }
  double within = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dist = Distance(data.points.row(i), centroids.row(data.labels[i]));
    within += dist * dist;
  }
  if (within == 0.0) {
    return between == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return (between / (k - 1)) / (within / static_cast<double>(n - k));
}

double SDbw(const LabeledPointSet& data) {
  const int k = ValidateClusters(data);
  const std::size_t n = data.labels.size();
  if (static_cast<int>(n) <= k) {
    throw Error(ErrorCode::kBadClusterLabels, "need more points than clusters");
  }
  std::vector<int> counts;
  const Matrix centroids = Centroids(data, k, counts);

  std::vector<std::vector<std::size_t>> members(k);
  for (std::size_t i = 0; i < n; ++i) members[data.labels[i]].push_back(i);
  std::vector<std::size_t> everyone(n);
  for (std::size_t i = 0; i < n; ++i) everyone[i] = i;

  const double total_sigma = VarianceNorm(data.points, everyone);
  std::vector<double> sigma(k);
  double sigma_sum = 0.0;
  for (int c = 0; c < k; ++c) {
    sigma[c] = VarianceNorm(data.points, members[c]);
    sigma_sum += sigma[c];
  }
  double scat = 0.0;
  if (total_sigma > 0.0) {
    for (int c = 0; c < k; ++c) scat += sigma[c] / total_sigma;
    scat /= k;
  }
  const double stdev = std::sqrt(sigma_sum) / k;

  auto density = [&](int ci, int cj, std::span<const double> u) {
    int count = 0;
    for (int c : {ci, cj}) {
      for (std::size_t r : members[c]) {
        if (Distance(data.points.row(r), u) <= stdev) ++count;
      }
      if (ci == cj) break;
    }
    return count;
  };

  const std::size_t d = data.points.cols();
  double dens = 0.0;
  std::vector<double> mid(d);
  for (int i = 0; i < k; ++i) {
    for (int j = i + 1; j < k; ++j) {
      for (std::size_t t = 0; t < d; ++t) mid[t] = 0.5 * (centroids(i, t) + centroids(j, t));
      const int at_mid = density(i, j, mid);
      const int at_i = density(i, j, centroids.row(i));
      const int at_j = density(i, j, centroids.row(j));
      const int denom = std::max(at_i, at_j);
      // The ratio is symmetric in (i, j), so each unordered pair counts twice.
      if (denom > 0) dens += 2.0 * at_mid / denom;
    }
  }
  dens /= static_cast<double>(k) * (k - 1);
  return scat + dens;
}

}  // namespace semlabels
