#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ransomtrack/correlation.hpp"
#include "ransomtrack/synth.hpp"
#include "ransomtrack/taxonomy.hpp"

using namespace ransomtrack;

namespace {

FeatureMatrix matrix_from_rows(const std::vector<std::vector<double>>& rows,
                               const std::vector<int>& labels) {
    const std::size_t f = rows.empty() ? 0 : rows[0].size();
    std::vector<std::string> names;
    for (std::size_t j = 0; j < f; ++j) names.push_back("f" + std::to_string(j));
    std::vector<double> values;
    std::vector<Label> ls;
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        values.insert(values.end(), rows[i].begin(), rows[i].end());
        ls.push_back(label_from_int(labels[i]));
        ids.push_back(sha_like_id("row" + std::to_string(i)));
    }
    return FeatureMatrix(FeatureSpace::uniform(std::move(names), FeatureKind::StaticOpcode),
                         std::move(values), std::move(ls), std::move(ids));
}

// Correlation matrix stuffed with hand-set values; diagonal 1.
ClassCorrelation fixed_corr(Label label, std::size_t f,
                            const std::vector<std::tuple<std::size_t, std::size_t, double>>& entries) {
    ClassCorrelation c(label, f);
    for (std::size_t j = 0; j < f; ++j) c.set(j, j, 1.0);
    for (const auto& [i, j, v] : entries) c.set(i, j, v);
    return c;
}

} // namespace

TEST_CASE("pearson_by_class matches the longhand fixture") {
    // 3 benignware rows then 3 ransomware rows over 3 features; expected
    // coefficients computed longhand from cov(x,y)/(sx*sy).
    auto m = matrix_from_rows(
        {{1, 2, 5}, {2, 4, 1}, {4, 9, 2}, {1, 3, 2}, {3, 1, 8}, {5, 2, 3}},
        {0, 0, 0, 1, 1, 1});
    auto [r0, r1] = pearson_by_class(m);
    CHECK(r0.at(0, 1) == Catch::Approx(0.9986254289035241).margin(1e-12));
    CHECK(r0.at(0, 2) == Catch::Approx(-0.5765566601970551).margin(1e-12));
    CHECK(r0.at(1, 2) == Catch::Approx(-0.532938710021193).margin(1e-12));
    CHECK(r1.at(0, 1) == Catch::Approx(-0.5).margin(1e-12));
    CHECK(r1.at(0, 2) == Catch::Approx(0.1555427542095638).margin(1e-12));
    CHECK(r1.at(1, 2) == Catch::Approx(-0.9332565252573827).margin(1e-12));
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(r0.at(j, j) == 1.0);
        CHECK(r1.at(j, j) == 1.0);
    }
    SECTION("symmetry within 1e-12") {
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j)
                CHECK(std::abs(r0.at(i, j) - r0.at(j, i)) <= 1e-12);
    }
}

TEST_CASE("perfect linear dependence gives r = 1") {
    auto m = matrix_from_rows({{1, 2}, {2, 4}, {3, 6}, {1, 5}, {2, 3}, {3, 4}},
                              {1, 1, 1, 0, 0, 0});
    auto [r0, r1] = pearson_by_class(m);
    CHECK(r1.at(0, 1) == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("zero-variance features are degenerate with r = 0") {
    auto m = matrix_from_rows({{7, 1}, {7, 2}, {7, 3}, {1, 1}, {2, 2}, {3, 1}},
                              {0, 0, 0, 1, 1, 1});
    auto [r0, r1] = pearson_by_class(m);
    CHECK(r0.degenerate(0));
    CHECK(r0.at(0, 0) == 0.0);
    CHECK(r0.at(0, 1) == 0.0);
    CHECK_FALSE(r1.degenerate(0));
}

TEST_CASE("pearson_by_class requires two samples per class") {
    auto m = matrix_from_rows({{1, 2}, {2, 3}, {3, 4}}, {0, 0, 1});
    REQUIRE_THROWS_AS(pearson_by_class(m), InsufficientSamplesError);
}

TEST_CASE("classify_pairs applies the three threshold rules") {
    // (r0, r1) per pair: (0.95, 0.92) neutral; (0.75, -0.1) benign-specific;
    // (-0.05, 0.8) ransomware-specific; (0.75, 0.3) untagged.
    auto r0 = fixed_corr(Label::Benign, 4, {{0, 1, 0.95}, {0, 2, 0.75}, {0, 3, -0.05}, {1, 2, 0.75}});
    auto r1 = fixed_corr(Label::Ransomware, 4,
                         {{0, 1, 0.92}, {0, 2, -0.1}, {0, 3, 0.8}, {1, 2, 0.3}});
    auto t = classify_pairs(r0, r1);
    CHECK(t.neutral_pairs == std::set<FeaturePair>{{0, 1}});
    CHECK(t.benign_pairs == std::set<FeaturePair>{{0, 2}});
    CHECK(t.ransom_pairs == std::set<FeaturePair>{{0, 3}});
    // (1,2) with (0.75, 0.3) satisfies neither rule

    SECTION("pair sets are disjoint") {
        for (const auto& p : t.neutral_pairs) {
            CHECK_FALSE(t.benign_pairs.count(p));
            CHECK_FALSE(t.ransom_pairs.count(p));
        }
        for (const auto& p : t.benign_pairs) CHECK_FALSE(t.ransom_pairs.count(p));
    }
}

TEST_CASE("classify_pairs boundary values are inclusive") {
    auto r0 = fixed_corr(Label::Benign, 2, {{0, 1, 0.9}});
    auto r1 = fixed_corr(Label::Ransomware, 2, {{0, 1, 0.9}});
    CHECK(classify_pairs(r0, r1).neutral_pairs.count({0, 1}) == 1);

    auto s0 = fixed_corr(Label::Benign, 2, {{0, 1, 0.7}});
    auto s1 = fixed_corr(Label::Ransomware, 2, {{0, 1, 0.0}});
    CHECK(classify_pairs(s0, s1).benign_pairs.count({0, 1}) == 1);
}

TEST_CASE("classification is invariant under positive affine rescaling") {
    Rng rng(21);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 40; ++i) {
        const double latent = rng.normal();
        rows.push_back({latent + 0.05 * rng.normal(), latent + 0.05 * rng.normal(),
                        rng.normal(), rng.normal()});
        labels.push_back(i % 2);
    }
    auto m = matrix_from_rows(rows, labels);
    auto [r0a, r1a] = pearson_by_class(m);
    auto before = classify_pairs(r0a, r1a);

    for (auto& r : rows) r[1] = 3.0 * r[1] + 7.0;  // rescale one column
    auto m2 = matrix_from_rows(rows, labels);
    auto [r0b, r1b] = pearson_by_class(m2);
    auto after = classify_pairs(r0b, r1b);

    CHECK(before.neutral_pairs == after.neutral_pairs);
    CHECK(before.benign_pairs == after.benign_pairs);
    CHECK(before.ransom_pairs == after.ransom_pairs);
}

TEST_CASE("cluster builds connected components per group type") {
    GroupTaxonomy t;
    t.n_features = 6;
    t.neutral_pairs = {{0, 1}, {1, 2}};
    t.benign_pairs = {{3, 4}};
    t = cluster(std::move(t));
    REQUIRE(t.clusters.size() == 2);
    CHECK(t.clusters[0].type == GroupType::Neutral);
    CHECK(t.clusters[0].members == std::vector<std::size_t>{0, 1, 2});
    CHECK(t.clusters[1].type == GroupType::BenignSpecific);
    CHECK(t.clusters[1].members == std::vector<std::size_t>{3, 4});

    SECTION("disjoint pairs form separate clusters") {
        GroupTaxonomy s;
        s.n_features = 4;
        s.neutral_pairs = {{0, 1}, {2, 3}};
        s = cluster(std::move(s));
        REQUIRE(s.clusters.size() == 2);
        CHECK(s.clusters[0].members == std::vector<std::size_t>{0, 1});
        CHECK(s.clusters[1].members == std::vector<std::size_t>{2, 3});
    }
}

TEST_CASE("reduce keeps the most central member of each neutral cluster") {
    // Feature 1 ("b") correlates 0.95/0.93 with its cluster mates; 0 and 2
    // reach each other only at 0.9 -- so 1 is the most central by the direct
    // |r| sum, computed below by the independent summation oracle.
    auto r0 = fixed_corr(Label::Benign, 4, {{0, 1, 0.95}, {1, 2, 0.95}, {0, 2, 0.90}});
    auto r1 = fixed_corr(Label::Ransomware, 4, {{0, 1, 0.93}, {1, 2, 0.93}, {0, 2, 0.91}});
    auto t = cluster(classify_pairs(r0, r1));
    REQUIRE(t.clusters.size() == 1);
    REQUIRE(t.clusters[0].members == std::vector<std::size_t>{0, 1, 2});

    // independent centrality oracle: direct summation over the cluster
    double best_score = -1.0;
    std::size_t best = 99;
    for (std::size_t i : t.clusters[0].members) {
        double score = 0.0;
        for (std::size_t j : t.clusters[0].members)
            if (i != j) score += 0.5 * (std::abs(r0.at(i, j)) + std::abs(r1.at(i, j)));
        if (score > best_score) {
            best_score = score;
            best = i;
        }
    }
    REQUIRE(best == 1);

    auto m = matrix_from_rows({{1, 2, 3, 4}, {2, 3, 4, 5}, {0, 1, 2, 3}, {5, 6, 7, 8},
                               {1, 1, 1, 1}, {2, 2, 2, 2}},
                              {0, 0, 0, 1, 1, 1});
    auto [reduced, plan] = reduce(m, t, r0, r1);
    CHECK(plan.kept == std::vector<std::size_t>{1, 3});
    REQUIRE(plan.dropped.size() == 2);
    CHECK(plan.dropped[0].feature == 0);
    CHECK(plan.dropped[0].representative == 1);
    CHECK(plan.dropped[1].feature == 2);
    CHECK(plan.dropped[1].representative == 1);
    CHECK(reduced.n_features() == 2);
    CHECK(reduced.space().name(0) == "f1");
    CHECK(reduced.at(0, 0) == 2.0);

    SECTION("kept and dropped partition the feature set") {
        std::set<std::size_t> all;
        for (auto k : plan.kept) all.insert(k);
        for (const auto& d : plan.dropped) CHECK(all.insert(d.feature).second);
        CHECK(all.size() == 4);
    }
}

TEST_CASE("reduce with no neutral clusters is the identity plan") {
    auto r0 = fixed_corr(Label::Benign, 3, {{0, 1, 0.8}});
    auto r1 = fixed_corr(Label::Ransomware, 3, {{0, 1, -0.2}});
    auto t = cluster(classify_pairs(r0, r1));
    auto m = matrix_from_rows({{1, 2, 3}, {2, 3, 4}, {3, 4, 5}, {4, 5, 6}}, {0, 0, 1, 1});
    auto [reduced, plan] = reduce(m, t, r0, r1);
    CHECK(plan.kept == std::vector<std::size_t>{0, 1, 2});
    CHECK(plan.dropped.empty());
    CHECK(reduced.n_features() == 3);
}

TEST_CASE("reduce never drops class-specific features") {
    // Feature 2 sits in a neutral cluster {0,1,2} and in a ransom-specific
    // pair (2,3); it must survive even when it is not the representative.
    auto r0 = fixed_corr(Label::Benign, 4,
                         {{0, 1, 0.99}, {1, 2, 0.95}, {0, 2, 0.95}, {2, 3, -0.1}});
    auto r1 = fixed_corr(Label::Ransomware, 4,
                         {{0, 1, 0.99}, {1, 2, 0.95}, {0, 2, 0.95}, {2, 3, 0.9}});
    auto t = cluster(classify_pairs(r0, r1));
    auto m = matrix_from_rows({{1, 2, 3, 4}, {2, 3, 4, 5}, {0, 1, 2, 3}, {5, 6, 7, 8},
                               {1, 1, 1, 2}, {2, 2, 2, 3}},
                              {0, 0, 0, 1, 1, 1});
    auto [reduced, plan] = reduce(m, t, r0, r1);
    for (const auto& d : plan.dropped) {
        CHECK(d.feature != 2);
        CHECK(d.feature != 3);
    }
    (void)reduced;
}

TEST_CASE("planted duplicate block collapses to one representative") {
    // 10 mutually identical columns (r = 1 exactly) plus 2 noise columns.
    Rng rng(5);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    for (int i = 0; i < 60; ++i) {
        std::vector<double> row(12);
        const double shared = std::round(rng.normal(100.0, 20.0));
        for (int j = 0; j < 10; ++j) row[j] = shared;
        row[10] = std::round(rng.normal(100.0, 5.0));
        row[11] = std::round(rng.normal(100.0, 5.0));
        rows.push_back(std::move(row));
        labels.push_back(i % 2);
    }
    auto m = matrix_from_rows(rows, labels);
    auto [r0, r1] = pearson_by_class(m);
    auto t = cluster(classify_pairs(r0, r1));
    REQUIRE(t.clusters.size() == 1);
    REQUIRE(t.clusters[0].members.size() == 10);
    auto [reduced, plan] = reduce(m, t, r0, r1);
    CHECK(plan.dropped.size() == 9);
    CHECK(reduced.n_features() == 3);
}

TEST_CASE("adjusted rand index") {
    CHECK(adjusted_rand_index({{0, 1}, {2, 3}}, {{0, 1}, {2, 3}}, 5) == 1.0);
    CHECK(adjusted_rand_index({{0, 1}, {2, 3}}, {{0, 1, 2, 3}}, 5) < 1.0);
    CHECK(adjusted_rand_index({{0, 1}}, {{0, 1}, {2, 3}}, 5) < 1.0);
    CHECK(adjusted_rand_index({}, {}, 4) == 1.0);
}
