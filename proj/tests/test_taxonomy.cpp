#include "atypia/taxonomy.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <doctest.h>

#include "atypia/errors.hpp"
#include "oracles.hpp"

using namespace atypia;

namespace {

std::vector<std::vector<double>> random_vectors(std::mt19937_64& rng, std::size_t n,
                                                std::size_t dim) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<std::vector<double>> out(n, std::vector<double>(dim));
    for (auto& v : out) {
        for (auto& x : v) x = unit(rng);
    }
    return out;
}

// Planted 60 x 21 annotation matrix with three image blocks, each active on
// one of the standard reason groups (15 / 4 / 2 columns).
AnnotationMatrix planted_matrix(std::mt19937_64& rng) {
    AnnotationMatrix matrix;
    const auto grouping = default_reason_grouping();
    for (std::size_t i = 0; i < kNumFineReasons; ++i) {
        matrix.reason_names.push_back("reason_" + std::to_string(i + 1));
    }
    std::uniform_real_distribution<double> noise(0.0, 0.05);
    std::uniform_real_distribution<double> active(0.7, 0.95);
    for (int block = 0; block < 3; ++block) {
        for (int row = 0; row < 20; ++row) {
            matrix.image_ids.push_back("img_" + std::to_string(block * 20 + row));
            std::vector<double> values(kNumFineReasons);
            for (std::size_t i = 0; i < kNumFineReasons; ++i) {
                const bool on = static_cast<int>(grouping[i]) == block;
                values[i] = on ? active(rng) : noise(rng);
            }
            matrix.values.push_back(std::move(values));
        }
    }
    return matrix;
}

}  // namespace

TEST_CASE("two identical points merge at height zero") {
    const std::vector<std::vector<double>> points{{1.0, 2.0}, {1.0, 2.0}};
    const auto dg = ward_linkage(points);
    REQUIRE(dg.merges.size() == 1);
    CHECK(dg.merges[0].height == 0.0);
    CHECK(dg.merges[0].left == 0);
    CHECK(dg.merges[0].right == 1);
    CHECK(dg.merges[0].size == 2);
}

TEST_CASE("singleton pair merges at the euclidean distance") {
    const std::vector<std::vector<double>> points{{0.0, 0.0}, {3.0, 0.0}};
    const auto dg = ward_linkage(points);
    CHECK(dg.merges[0].height == doctest::Approx(3.0));
}

TEST_CASE("input validation") {
    CHECK_THROWS_WITH_AS(ward_linkage({{1.0}}), doctest::Contains("TooFewVectors"), Error);
    CHECK_THROWS_WITH_AS(ward_linkage({{1.0, 2.0}, {1.0}}),
                         doctest::Contains("DimensionMismatch"), Error);
}

TEST_CASE("matches the exhaustive recompute-from-scratch oracle") {
    std::mt19937_64 rng(31337);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 4 + trial % 5;  // up to 8
        const std::size_t dim = 2 + trial % 3;  // up to 4
        const auto vectors = random_vectors(rng, n, dim);
        const auto dg = ward_linkage(vectors);
        const auto oracle = oracles::brute_force_ward(vectors);
        REQUIRE(dg.merges.size() == oracle.size());
        for (std::size_t t = 0; t < oracle.size(); ++t) {
            CHECK(dg.merges[t].left == oracle[t].left);
            CHECK(dg.merges[t].right == oracle[t].right);
            CHECK(dg.merges[t].height == doctest::Approx(oracle[t].height).epsilon(1e-9));
        }
    }
}

TEST_CASE("heights are nondecreasing in merge order") {
    std::mt19937_64 rng(7);
    const auto vectors = random_vectors(rng, 24, 5);
    const auto dg = ward_linkage(vectors);
    for (std::size_t t = 1; t < dg.merges.size(); ++t) {
        CHECK(dg.merges[t].height >= dg.merges[t - 1].height - 1e-12);
    }
    std::size_t total = 0;
    for (const auto& m : dg.merges) total = std::max(total, m.size);
    CHECK(total == vectors.size());
}

TEST_CASE("cut_k boundary cases and canonical ids") {
    std::mt19937_64 rng(99);
    const auto vectors = random_vectors(rng, 9, 3);
    const auto dg = ward_linkage(vectors);

    const auto singletons = cut_k(dg, 9);
    for (std::size_t i = 0; i < 9; ++i) CHECK(singletons[i] == static_cast<int>(i));

    const auto one = cut_k(dg, 1);
    for (int c : one) CHECK(c == 0);

    CHECK_THROWS_WITH_AS(cut_k(dg, 0), doctest::Contains("InvalidK"), Error);
    CHECK_THROWS_WITH_AS(cut_k(dg, 10), doctest::Contains("InvalidK"), Error);

    // Canonicalization: cluster ids appear in order of the smallest member.
    const auto cut = cut_k(dg, 3);
    CHECK(cut[0] == 0);
    int seen = 0;
    for (int c : cut) {
        CHECK(c <= seen + 1);
        seen = std::max(seen, c);
    }
    CHECK(seen == 2);
}

TEST_CASE("permuting the input only relabels the clusters") {
    std::mt19937_64 rng(2);
    const auto vectors = random_vectors(rng, 12, 4);
    const auto base_cut = cut_k(ward_linkage(vectors), 3);

    std::vector<std::size_t> order(vectors.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::vector<double>> permuted(vectors.size());
    for (std::size_t i = 0; i < order.size(); ++i) permuted[i] = vectors[order[i]];
    const auto permuted_cut = cut_k(ward_linkage(permuted), 3);

    std::vector<int> mapped(vectors.size());
    for (std::size_t i = 0; i < order.size(); ++i) mapped[order[i]] = permuted_cut[i];
    CHECK(oracles::adjusted_rand(base_cut, mapped) == doctest::Approx(1.0));
}

TEST_CASE("planted three-block matrix is fully recovered") {
    std::mt19937_64 rng(12);
    const auto matrix = planted_matrix(rng);
    const auto dg = ward_linkage(matrix.values);
    const auto clusters = cut_k(dg, 3);

    std::vector<int> truth(60);
    for (int i = 0; i < 60; ++i) truth[i] = i / 20;
    CHECK(oracles::adjusted_rand(clusters, truth) == doctest::Approx(1.0));

    const auto groups = group_reasons(matrix, clusters);
    const auto expected = default_reason_grouping();
    // The planted blocks are laid out in group order, and cluster ids are
    // canonical by smallest member, so they align index-for-index.
    for (std::size_t i = 0; i < kNumFineReasons; ++i) {
        CHECK(groups[i] == static_cast<int>(expected[i]));
    }
}

TEST_CASE("group_reasons tie and activity rules") {
    AnnotationMatrix matrix;
    matrix.image_ids = {"a", "b", "c", "d"};
    matrix.reason_names = {"r1", "r2", "r3"};
    //               r1    r2    r3
    matrix.values = {{0.9, 0.1, 0.5},
                     {0.8, 0.1, 0.5},
                     {0.0, 0.7, 0.5},
                     {0.1, 0.8, 0.5}};
    const std::vector<int> clusters{0, 0, 1, 1};
    const auto groups = group_reasons(matrix, clusters);
    CHECK(groups[0] == 0);  // active in cluster 0
    CHECK(groups[1] == 1);  // active in cluster 1
    CHECK(groups[2] == 0);  // uniform: tie goes to the lower cluster id
}

TEST_CASE("default reason grouping has the fixed 15/4/2 block structure") {
    const auto grouping = default_reason_grouping();
    REQUIRE(grouping.size() == kNumFineReasons);
    std::array<int, 3> counts{};
    for (Reason r : grouping) counts[static_cast<int>(r)] += 1;
    CHECK(counts[static_cast<int>(Reason::Object)] == 15);
    CHECK(counts[static_cast<int>(Reason::Context)] == 4);
    CHECK(counts[static_cast<int>(Reason::Scene)] == 2);
    CHECK(grouping[0] == Reason::Object);
    CHECK(grouping[15] == Reason::Context);
    CHECK(grouping[20] == Reason::Scene);
}

TEST_CASE("dendrogram text rendering lists all leaves") {
    const std::vector<std::vector<double>> points{{0.0}, {1.0}, {10.0}};
    const auto dg = ward_linkage(points);
    const auto text = render_dendrogram(dg, {"a", "b", "c"});
    CHECK(text.find("- a") != std::string::npos);
    CHECK(text.find("- b") != std::string::npos);
    CHECK(text.find("- c") != std::string::npos);
    CHECK(text.find("height") != std::string::npos);
}
