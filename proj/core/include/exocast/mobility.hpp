#pragma once

#include "exocast/dataset.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace exocast {

/// Time-averaged region-to-region population flows; row = origin,
/// column = destination, order matching `regions`.
struct FlowMatrix {
    std::vector<std::string> regions;
    Eigen::MatrixXd mean_flow;
};

/// 0/1 adjacency before full-rank correction; real-valued orthonormal rows
/// after. `rank` is the numerical rank at threshold 1e-10.
struct BinaryAdjacency {
    Eigen::MatrixXd matrix;
    int rank = 0;
};

struct GcnWeights {
    Eigen::MatrixXd W0;
    Eigen::MatrixXd W1;
};

enum class FinalActivation { identity, sigmoid };

/// Cell (i,j) = sum of pop_flows from region i to j divided by the number of
/// distinct dates in `records` (absent origin/destination/date triples count
/// as zero flow). Records naming regions outside `regions` are skipped.
FlowMatrix aggregate_flows(const std::vector<FlowRecord>& records,
                           const std::vector<std::string>& regions);

/// Marks the ceil(fraction * cell count) largest cells with 1. Ties at the
/// cutoff break by (origin, destination) index order. With
/// exclude_self_loops the diagonal is left out of both the ranking and the
/// cell count.
BinaryAdjacency binarize_top_fraction(const FlowMatrix& flows, double fraction = 0.2,
                                      bool exclude_self_loops = false);

/// Modified Gram-Schmidt over the rows in order; a row numerically inside
/// the span of its predecessors (tolerance 1e-10) is replaced by the first
/// standard-basis vector that is not. Output rows are orthonormal, so the
/// rank is always N.
BinaryAdjacency full_rank_correct(const BinaryAdjacency& adj);

/// A_hat = D^{-1/2} (S + I) D^{-1/2} with S = (A + A')/2 and D the degree
/// matrix of S + I. Assumes non-negative A (0/1 adjacency), where the added
/// self-loops keep every degree positive.
Eigen::MatrixXd normalize_adjacency(const BinaryAdjacency& adj);

/// Two-layer graph convolution sigma(A_hat ReLU(A_hat X W0) W1). Throws
/// std::invalid_argument on dimension mismatch.
Eigen::MatrixXd gcn_forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A_hat,
                            const GcnWeights& w, FinalActivation activation);

/// CSV dump: header row of region codes, then one row per origin.
std::string adjacency_to_csv(const Eigen::MatrixXd& matrix,
                             const std::vector<std::string>& regions);

} // namespace exocast
