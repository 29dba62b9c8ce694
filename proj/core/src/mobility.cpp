#include "exocast/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace exocast {

namespace {

int numerical_rank(const Eigen::MatrixXd& m) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    return static_cast<int>(qr.rank());
}

} // namespace

FlowMatrix aggregate_flows(const std::vector<FlowRecord>& records,
                           const std::vector<std::string>& regions) {
    const int n = static_cast<int>(regions.size());
    std::unordered_map<std::string, int> index;
    for (int i = 0; i < n; ++i) index[regions[i]] = i;

    FlowMatrix out;
    out.regions = regions;
    out.mean_flow = Eigen::MatrixXd::Zero(n, n);

    std::set<Date> dates;
    for (const auto& rec : records) {
        dates.insert(rec.date);
        const auto oi = index.find(rec.origin);
        const auto di = index.find(rec.destination);
        if (oi == index.end() || di == index.end()) continue;
        out.mean_flow(oi->second, di->second) += rec.pop_flows;
    }
    if (!dates.empty()) out.mean_flow /= static_cast<double>(dates.size());
    return out;
}

BinaryAdjacency binarize_top_fraction(const FlowMatrix& flows, double fraction,
                                      bool exclude_self_loops) {
    if (!(fraction > 0.0) || fraction > 1.0) {
        throw std::invalid_argument("fraction must lie in (0, 1]");
    }
    const int n = static_cast<int>(flows.mean_flow.rows());
    if (flows.mean_flow.cols() != n) throw std::invalid_argument("flow matrix must be square");

    struct Cell {
        double value;
        int i, j;
    };
    std::vector<Cell> cells;
    cells.reserve(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (exclude_self_loops && i == j) continue;
            cells.push_back({flows.mean_flow(i, j), i, j});
        }
    }
    const auto count = static_cast<std::size_t>(
        std::ceil(fraction * static_cast<double>(cells.size())));
    std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    BinaryAdjacency adj;
    adj.matrix = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t c = 0; c < count && c < cells.size(); ++c) {
        adj.matrix(cells[c].i, cells[c].j) = 1.0;
    }
    adj.rank = numerical_rank(adj.matrix);
    return adj;
}

BinaryAdjacency full_rank_correct(const BinaryAdjacency& adj) {
    const int n = static_cast<int>(adj.matrix.rows());
    if (adj.matrix.cols() != n) throw std::invalid_argument("adjacency must be square");
    constexpr double kTol = 1e-10;

    Eigen::MatrixXd out(n, n);
    auto orthogonalize = [&](Eigen::VectorXd v, int rows_done) {
        // Two projection passes: plain MGS leaves O(eps) residue that matters
        // near the tolerance.
        for (int pass = 0; pass < 2; ++pass) {
            for (int i = 0; i < rows_done; ++i) {
                v -= out.row(i).dot(v) * out.row(i).transpose();
            }
        }
        return v;
    };

    int next_basis = 0;
    for (int r = 0; r < n; ++r) {
        Eigen::VectorXd v = orthogonalize(adj.matrix.row(r).transpose(), r);
        if (v.norm() <= kTol) {
            // Row is in the span of its predecessors; substitute the first
            // standard-basis vector with a component outside that span.
            for (; next_basis < n; ++next_basis) {
                Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
                e[next_basis] = 1.0;
                Eigen::VectorXd candidate = orthogonalize(e, r);
                if (candidate.norm() > kTol) {
                    v = candidate;
                    ++next_basis;
                    break;
                }
            }
            if (v.norm() <= kTol) {
                throw std::logic_error("no completion vector found; spans cannot be full");
            }
        }
        out.row(r) = v.transpose() / v.norm();
    }

    BinaryAdjacency corrected;
    corrected.matrix = out;
    corrected.rank = numerical_rank(out);
    return corrected;
}

Eigen::MatrixXd normalize_adjacency(const BinaryAdjacency& adj) {
    const int n = static_cast<int>(adj.matrix.rows());
    if (adj.matrix.cols() != n) throw std::invalid_argument("adjacency must be square");
    const Eigen::MatrixXd sym = 0.5 * (adj.matrix + adj.matrix.transpose());
    const Eigen::MatrixXd with_loops = sym + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd inv_sqrt_degree(n);
    for (int i = 0; i < n; ++i) {
        inv_sqrt_degree[i] = 1.0 / std::sqrt(with_loops.row(i).sum());
    }
    return inv_sqrt_degree.asDiagonal() * with_loops * inv_sqrt_degree.asDiagonal();
}

Eigen::MatrixXd gcn_forward(const Eigen::MatrixXd& X, const Eigen::MatrixXd& A_hat,
                            const GcnWeights& w, FinalActivation activation) {
    if (A_hat.rows() != A_hat.cols() || A_hat.rows() != X.rows()) {
        throw std::invalid_argument("A_hat must be square and match the feature row count");
    }
    if (w.W0.rows() != X.cols() || w.W1.rows() != w.W0.cols()) {
        throw std::invalid_argument("weight dimensions do not chain: need cols(X) = rows(W0) "
                                    "and cols(W0) = rows(W1)");
    }
    const Eigen::MatrixXd hidden = (A_hat * X * w.W0).cwiseMax(0.0);
    Eigen::MatrixXd out = A_hat * hidden * w.W1;
    if (activation == FinalActivation::sigmoid) {
        out = out.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
    }
    return out;
}

std::string adjacency_to_csv(const Eigen::MatrixXd& matrix,
                             const std::vector<std::string>& regions) {
    const int n = static_cast<int>(matrix.rows());
    if (static_cast<int>(regions.size()) != n || matrix.cols() != n) {
        throw std::invalid_argument("region list must match the matrix dimension");
    }
    std::ostringstream out;
    for (int j = 0; j < n; ++j) {
        if (j > 0) out << ',';
        out << regions[j];
    }
    out << '\n';
    char buf[64];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", matrix(i, j));
            if (j > 0) out << ',';
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

} // namespace exocast
