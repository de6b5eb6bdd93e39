#pragma once

#include <vector>

#include "semlabels/matrix.hpp"

namespace semlabels {

/// Points partitioned into clusters 0..k-1; every cluster must be non-empty.
struct LabeledPointSet {
  Matrix points;            // n x d
  std::vector<int> labels;  // n cluster ids
};

/// Number of clusters after validation (labels contiguous from 0, each
/// cluster populated, k >= 2).
int ValidateClusters(const LabeledPointSet& data);

/// Mean silhouette over points with Euclidean distances. A point alone in
/// its cluster scores 0, as does a point with a = b = 0.
double Silhouette(const LabeledPointSet& data);

/// (tr B / (k - 1)) / (tr W / (n - k)). Returns +infinity when the
/// within-cluster scatter is zero and the between-cluster scatter is not;
/// 0 when both are zero.
double CalinskiHarabasz(const LabeledPointSet& data);

/// S_Dbw = Scat + Dens_bw (Halkidi & Vazirgiannis, 2001).
///
///   sigma(X)  per-dimension population variance of a point set
///   Scat      = (1/k) sum_i ||sigma(C_i)|| / ||sigma(all points)||
///   stdev     = (1/k) sqrt(sum_i ||sigma(C_i)||)
///   density(u) over clusters i, j = #{x in C_i or C_j : ||x - u|| <= stdev}
///   Dens_bw   = 1/(k(k-1)) sum_{i != j} density(u_ij) /
///               max(density(c_i), density(c_j))
///
/// with c_i the centroid of C_i and u_ij the midpoint of c_i and c_j. A
/// ratio whose denominator is zero counts as 0, and Scat is 0 when the whole
/// set has zero variance.
double SDbw(const LabeledPointSet& data);

}  // namespace semlabels
