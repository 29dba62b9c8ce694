#include "exocast/mobility.hpp"

#include "exocast/errors.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace exocast;

namespace {

FlowRecord rec(const std::string& o, const std::string& d, const std::string& date, double v) {
    // aggregation reads pop_flows; visitor_flows rides along unused
    return {o, d, Date::parse(date), v / 2.0, v};
}

Eigen::MatrixXd random_matrix(int r, int c, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = noise(rng);
    return m;
}

} // namespace

TEST_CASE("flow aggregation averages over distinct dates") {
    const std::vector<std::string> regions = {"AK", "AL", "AZ"};
    std::vector<FlowRecord> records = {
        rec("AK", "AL", "2020-03-01", 10.0),
        rec("AK", "AL", "2020-03-02", 20.0),
        rec("AL", "AZ", "2020-03-01", 6.0),
        // second record for the same cell and date accumulates
        rec("AL", "AZ", "2020-03-01", 3.0),
    };
    const FlowMatrix f = aggregate_flows(records, regions);
    REQUIRE(f.mean_flow.rows() == 3);
    // two distinct dates, so every cell divides by 2
    CHECK_THAT(f.mean_flow(0, 1), Catch::Matchers::WithinAbs(15.0, 1e-12));
    CHECK_THAT(f.mean_flow(1, 2), Catch::Matchers::WithinAbs(4.5, 1e-12));
    CHECK(f.mean_flow(0, 0) == 0.0);
    CHECK(f.mean_flow(2, 0) == 0.0);

    SECTION("records outside the region list are ignored entirely") {
        records.push_back(rec("ZZ", "AL", "2020-03-03", 100.0));
        const FlowMatrix g = aggregate_flows(records, regions);
        // ZZ contributes no cell, but 03-03 is still a distinct date
        CHECK_THAT(g.mean_flow(0, 1), Catch::Matchers::WithinAbs(10.0, 1e-12));
    }
    SECTION("no records yields a zero matrix") {
        const FlowMatrix g = aggregate_flows({}, regions);
        CHECK(g.mean_flow.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("binarization keeps the top fraction of cells") {
    FlowMatrix f;
    f.regions = {"a", "b", "c"};
    f.mean_flow.resize(3, 3);
    f.mean_flow << 10, 2, 1, //
        3, 8, 1,             //
        1, 1, 9;

    SECTION("fraction 0.2 of 9 cells keeps ceil(1.8) = 2") {
        const BinaryAdjacency adj = binarize_top_fraction(f, 0.2);
        CHECK(adj.matrix.sum() == 2.0);
        CHECK(adj.matrix(0, 0) == 1.0);
        CHECK(adj.matrix(2, 2) == 1.0);
    }
    SECTION("ties at the cutoff break by row-major index") {
        FlowMatrix t;
        t.regions = {"a", "b"};
        t.mean_flow.resize(2, 2);
        t.mean_flow << 5, 5, 5, 5;
        const BinaryAdjacency adj = binarize_top_fraction(t, 0.25);
        CHECK(adj.matrix.sum() == 1.0);
        CHECK(adj.matrix(0, 0) == 1.0);
    }
    SECTION("excluding self loops ranks only off-diagonal cells") {
        const BinaryAdjacency adj = binarize_top_fraction(f, 0.2, true);
        // 6 off-diagonal cells, ceil(1.2) = 2: values 3 and 2 win
        CHECK(adj.matrix.sum() == 2.0);
        CHECK(adj.matrix(1, 0) == 1.0);
        CHECK(adj.matrix(0, 1) == 1.0);
        CHECK(adj.matrix.diagonal().cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("51 regions keep exactly ceil(0.2 * 51^2) = 521 ones") {
        FlowMatrix big;
        big.regions.resize(51, "r");
        big.mean_flow = random_matrix(51, 51, 3).cwiseAbs();
        const BinaryAdjacency adj = binarize_top_fraction(big, 0.2);
        CHECK(adj.matrix.sum() == 521.0);
    }
    SECTION("invalid fraction") {
        CHECK_THROWS_AS(binarize_top_fraction(f, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(binarize_top_fraction(f, 1.5), std::invalid_argument);
    }
}

TEST_CASE("full-rank correction") {
    SECTION("duplicate rows are replaced and the result has full rank") {
        BinaryAdjacency adj;
        adj.matrix.resize(4, 4);
        adj.matrix << 1, 1, 0, 0, //
            1, 1, 0, 0,           //
            0, 0, 1, 0,           //
            1, 1, 1, 0;
        const BinaryAdjacency fixed = full_rank_correct(adj);
        CHECK(fixed.rank == 4);
        // rows orthonormal: R R' = I
        const Eigen::MatrixXd gram = fixed.matrix * fixed.matrix.transpose();
        CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-10);
    }
    SECTION("independent rows keep their span") {
        BinaryAdjacency adj;
        adj.matrix.resize(3, 3);
        adj.matrix << 1, 0, 0, //
            1, 1, 0,           //
            0, 1, 1;
        const BinaryAdjacency fixed = full_rank_correct(adj);
        CHECK(fixed.rank == 3);
        // leading principal rows span the same subspaces as the input
        for (int i = 0; i < 3; ++i) {
            Eigen::MatrixXd orig = adj.matrix.topRows(i + 1);
            Eigen::MatrixXd corr = fixed.matrix.topRows(i + 1);
            Eigen::MatrixXd both(2 * (i + 1), 3);
            both << orig, corr;
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(both.transpose());
            qr.setThreshold(1e-10);
            CHECK(qr.rank() == i + 1);
        }
    }
    SECTION("zero row is replaced by a basis vector") {
        BinaryAdjacency adj;
        adj.matrix = Eigen::MatrixXd::Zero(2, 2);
        adj.matrix(1, 1) = 1.0;
        const BinaryAdjacency fixed = full_rank_correct(adj);
        CHECK(fixed.rank == 2);
        CHECK_THAT(std::abs(fixed.matrix(0, 0)), Catch::Matchers::WithinAbs(1.0, 1e-12));
    }
}

TEST_CASE("adjacency normalization") {
    SECTION("a single edge plus self-loops gives constant 0.5") {
        BinaryAdjacency adj;
        adj.matrix.resize(2, 2);
        adj.matrix << 0, 1, 1, 0;
        const Eigen::MatrixXd ahat = normalize_adjacency(adj);
        CHECK((ahat - Eigen::MatrixXd::Constant(2, 2, 0.5)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("empty graph reduces to the identity") {
        BinaryAdjacency adj;
        adj.matrix = Eigen::MatrixXd::Zero(3, 3);
        const Eigen::MatrixXd ahat = normalize_adjacency(adj);
        CHECK((ahat - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("result is symmetric with unit spectral radius") {
        FlowMatrix f;
        f.regions.resize(10, "r");
        f.mean_flow = random_matrix(10, 10, 17).cwiseAbs();
        const BinaryAdjacency adj = binarize_top_fraction(f, 0.3);
        const Eigen::MatrixXd ahat = normalize_adjacency(adj);
        CHECK((ahat - ahat.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ahat);
        CHECK(es.eigenvalues().maxCoeff() <= 1.0 + 1e-10);
        CHECK(es.eigenvalues().minCoeff() >= -1.0 - 1e-10);
    }
}

TEST_CASE("graph convolution forward pass") {
    const int n = 8, fin = 5, hid = 4, fout = 3;
    const Eigen::MatrixXd X = random_matrix(n, fin, 31);
    GcnWeights w{random_matrix(fin, hid, 37), random_matrix(hid, fout, 41)};

    // symmetric normalized adjacency over a random graph
    FlowMatrix f;
    f.regions.resize(n, "r");
    f.mean_flow = random_matrix(n, n, 43).cwiseAbs();
    const Eigen::MatrixXd ahat = normalize_adjacency(binarize_top_fraction(f, 0.3));

    SECTION("identity adjacency with identity weights applies the activations only") {
        GcnWeights id{Eigen::MatrixXd::Identity(fin, fin), Eigen::MatrixXd::Identity(fin, fin)};
        const Eigen::MatrixXd out =
            gcn_forward(X, Eigen::MatrixXd::Identity(n, n), id, FinalActivation::identity);
        CHECK((out - X.cwiseMax(0.0)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("sigmoid output lies strictly inside (0, 1)") {
        const Eigen::MatrixXd out = gcn_forward(X, ahat, w, FinalActivation::sigmoid);
        CHECK(out.minCoeff() > 0.0);
        CHECK(out.maxCoeff() < 1.0);
        CHECK(out.rows() == n);
        CHECK(out.cols() == fout);
    }
    SECTION("node permutation equivariance") {
        std::vector<int> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        std::mt19937_64 rng(47);
        std::shuffle(perm.begin(), perm.end(), rng);
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < n; ++i) P(i, perm[static_cast<std::size_t>(i)]) = 1.0;

        const Eigen::MatrixXd base = gcn_forward(X, ahat, w, FinalActivation::sigmoid);
        const Eigen::MatrixXd permuted =
            gcn_forward(P * X, P * ahat * P.transpose(), w, FinalActivation::sigmoid);
        CHECK((permuted - P * base).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("dimension mismatches are rejected") {
        CHECK_THROWS_AS(gcn_forward(X, Eigen::MatrixXd::Identity(n + 1, n + 1), w,
                                    FinalActivation::identity),
                        std::invalid_argument);
        GcnWeights bad{random_matrix(fin + 1, hid, 53), w.W1};
        CHECK_THROWS_AS(gcn_forward(X, ahat, bad, FinalActivation::identity),
                        std::invalid_argument);
        GcnWeights bad2{w.W0, random_matrix(hid + 2, fout, 59)};
        CHECK_THROWS_AS(gcn_forward(X, ahat, bad2, FinalActivation::identity),
                        std::invalid_argument);
    }
}

TEST_CASE("adjacency CSV rendering") {
    BinaryAdjacency adj;
    adj.matrix.resize(2, 2);
    adj.matrix << 1, 0, 0, 1;
    const std::string csv = adjacency_to_csv(adj.matrix, {"AK", "AL"});
    CHECK(csv == "AK,AL\n1,0\n0,1\n");
    CHECK_THROWS_AS(adjacency_to_csv(adj.matrix, {"AK"}), std::invalid_argument);
}
