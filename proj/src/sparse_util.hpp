#pragma once

#include <Eigen/SparseCore>

#include <vector>

namespace delam::detail {

/// Principal submatrix of A picked by `local`: local[i] >= 0 keeps row/col i
/// at position local[i]. n_local is the submatrix dimension.
inline Eigen::SparseMatrix<double> principal_submatrix(const Eigen::SparseMatrix<double>& A,
                                                       const std::vector<int>& local,
                                                       int n_local) {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(A.nonZeros());
  for (int c = 0; c < A.outerSize(); ++c) {
    if (local[c] < 0) continue;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) {
      if (local[it.row()] < 0) continue;
      triplets.emplace_back(local[it.row()], local[c], it.value());
    }
  }
  Eigen::SparseMatrix<double> sub(n_local, n_local);
  sub.setFromTriplets(triplets.begin(), triplets.end());
  return sub;
}

}  // namespace delam::detail
