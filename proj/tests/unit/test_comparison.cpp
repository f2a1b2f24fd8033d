#include <doctest.h>

#include <limits>

#include "oracles.hpp"
#include "rlink/comparison.hpp"
#include "rlink/random.hpp"

using namespace rlink;

namespace {

DataFile make_file(std::vector<std::string> names, std::vector<std::vector<std::optional<std::string>>> rows) {
    std::vector<FieldSchema> schema;
    for (auto& n : names) schema.push_back({n, FieldKind::String});
    std::vector<Record> recs;
    for (auto& r : rows) recs.push_back({"", r});
    return DataFile(schema, recs);
}

}  // namespace

TEST_SUITE("comparison") {

TEST_CASE("levenshtein levels") {
    const auto spec = ComparatorSpec::levenshtein("name");
    CHECK(bin_similarity(spec, 0.0) == 0);
    CHECK(bin_similarity(spec, 1e-9) == 1);
    CHECK(bin_similarity(spec, 0.25) == 1);
    CHECK(bin_similarity(spec, 0.2500001) == 2);
    CHECK(bin_similarity(spec, 0.5) == 2);
    CHECK(bin_similarity(spec, 1.0) == 3);
    CHECK_THROWS_AS(bin_similarity(spec, 1.5), ConfigError);
    CHECK_THROWS_AS(bin_similarity(spec, -0.1), ConfigError);
    CHECK(compare_field(spec, "ANA", "ANA").level == 0);
}

TEST_CASE("absolute difference levels") {
    const auto year = ComparatorSpec::absolute_difference("year", {0, 1, 2});
    CHECK(compare_field(year, "1981", "1986").level == 3);
    CHECK(compare_field(year, "1981", "1981").level == 0);
    CHECK(compare_field(year, "1981", "1982").level == 1);
    CHECK(compare_field(year, "1983", "1981").level == 2);
    CHECK_THROWS_AS(compare_field(year, "1981", "abc"), ValidationError);
}

TEST_CASE("missing values are unobserved") {
    for (const auto& spec : {ComparatorSpec::levenshtein("a"), ComparatorSpec::binary("a"),
                             ComparatorSpec::absolute_difference("a", {0, 1}),
                             ComparatorSpec::levenshtein("a", SimilarityKind::ModifiedLevenshtein)}) {
        auto c = compare_field(spec, std::nullopt, "1");
        CHECK_FALSE(c.observed);
        CHECK_FALSE(c.level.has_value());
        CHECK_FALSE(compare_field(spec, "1", std::nullopt).observed);
        CHECK_FALSE(compare_field(spec, std::nullopt, std::nullopt).observed);
    }
}

TEST_CASE("adjacency") {
    AdjacencyMap adj;
    adj.add_edge("A", "B");
    CHECK(adjacency_compare("A", "A", adj) == 0);
    CHECK(adjacency_compare("A", "B", adj) == 1);
    CHECK(adjacency_compare("B", "A", adj) == 1);
    CHECK(adjacency_compare("A", "C", adj) == 2);
    CHECK(adjacency_compare("Z", "Z", adj) == 0);
    const auto spec = ComparatorSpec::region("r", std::make_shared<AdjacencyMap>(adj));
    CHECK(compare_field(spec, "B", "A").level == 1);
}

TEST_CASE("spec validation") {
    ComparatorSpec s{"a", SimilarityKind::BinaryAgreement, {0.0}, nullptr};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.upper_bounds = {0.0, 0.0};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.upper_bounds = {-1.0, 1.0};
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s.upper_bounds = {0.0, 1.0};
    CHECK_NOTHROW(s.validate());
    CHECK_THROWS_AS(similarity_kind_from_string("soundex"), ConfigError);
    CHECK(similarity_kind_from_string(to_string(SimilarityKind::ModifiedLevenshtein)) ==
          SimilarityKind::ModifiedLevenshtein);
}

TEST_CASE("comparators are symmetric") {
    Rng rng(5);
    const std::string alphabet = "AB C";
    AdjacencyMap adj;
    adj.add_edge("A", "B");
    auto adjp = std::make_shared<AdjacencyMap>(adj);
    for (int rep = 0; rep < 200; ++rep) {
        std::string a, b;
        for (auto n = uniform_index(rng, 6); n > 0; --n) a += alphabet[uniform_index(rng, 4)];
        for (auto n = uniform_index(rng, 6); n > 0; --n) b += alphabet[uniform_index(rng, 4)];
        for (const auto& spec : {ComparatorSpec::levenshtein("x"), ComparatorSpec::binary("x"),
                                 ComparatorSpec::levenshtein("x", SimilarityKind::ModifiedLevenshtein),
                                 ComparatorSpec::region("x", adjp)}) {
            CHECK(compare_field(spec, a, b).level == compare_field(spec, b, a).level);
        }
        const auto x = std::to_string(uniform_index(rng, 10)), y = std::to_string(uniform_index(rng, 10));
        const auto num = ComparatorSpec::absolute_difference("x", {0, 1, 2});
        CHECK(compare_field(num, x, y).level == compare_field(num, y, x).level);
    }
}

TEST_CASE("pair counts") {
    auto f1 = make_file({"k", "v"}, {{"a", "x"}, {"b", "y"}});
    auto f2 = make_file({"k", "v"}, {{"a", "x"}});
    const auto d = build_comparison_data(f1, f2, {ComparatorSpec::binary("v")});
    CHECK(d.num_pairs() == 2);
    CHECK(d.level(0, 0) == 0);
    CHECK(d.level(1, 0) == 1);

    // Blocks of sizes (3,2) and (2,2), plus records with a missing key.
    auto g1 = make_file({"k", "v"}, {{"a", "1"}, {"a", "2"}, {"a", "3"}, {"b", "4"}, {"b", "5"}, {std::nullopt, "6"}});
    auto g2 = make_file({"k", "v"}, {{"b", "1"}, {"a", "2"}, {"a", "3"}, {"b", "4"}, {std::nullopt, "5"}});
    const auto blocked = build_comparison_data(g1, g2, {ComparatorSpec::binary("v")}, BlockingSpec{{"k"}});
    CHECK(blocked.num_pairs() == 10);
    CHECK(blocked.column(4).empty());
    for (const auto& p : blocked.pairs()) CHECK(g1.value(p.i, 0) == g2.value(p.j, 0));
    CHECK(build_comparison_data(g1, g2, {ComparatorSpec::binary("v")}).num_pairs() == 30);
}

TEST_CASE("large unblocked pair count") {
    std::vector<std::vector<std::optional<std::string>>> r1(4420, {std::string("x")}), r2(1324, {std::string("x")});
    for (std::size_t i = 0; i < r1.size(); i += 7) r1[i][0] = "y";
    const auto d = build_comparison_data(make_file({"v"}, r1), make_file({"v"}, r2), {ComparatorSpec::binary("v")});
    CHECK(d.num_pairs() == 5'852'080u);
    CHECK(d.num_patterns() == 2);
}

TEST_CASE("build errors") {
    auto f1 = make_file({"k"}, {{"a"}});
    auto f2 = make_file({"k"}, {{"b"}});
    CHECK_THROWS_AS(build_comparison_data(f1, f2, {ComparatorSpec::binary("nope")}), ConfigError);
    CHECK_THROWS_AS(build_comparison_data(f1, f2, {ComparatorSpec::binary("k")}, BlockingSpec{{"k"}}), ValidationError);
    CHECK_THROWS_AS(build_comparison_data(f1, f2, {}), ConfigError);
}

TEST_CASE("pattern compression and candidate index") {
    auto f1 = make_file({"a", "b"}, {{"x", "1"}, {"y", std::nullopt}, {"x", "2"}});
    auto f2 = make_file({"a", "b"}, {{"x", "1"}, {"z", "2"}});
    const auto d = build_comparison_data(f1, f2, {ComparatorSpec::binary("a"), ComparatorSpec::binary("b")});
    REQUIRE(d.num_pairs() == 6);
    std::uint64_t total = 0;
    for (std::size_t p = 0; p < d.num_patterns(); ++p) total += d.pattern_count(p);
    CHECK(total == 6);
    for (std::size_t k = 0; k < d.num_pairs(); ++k) {
        const auto p = d.pair(k);
        for (std::size_t f = 0; f < 2; ++f) {
            const auto c = compare_field(f == 0 ? ComparatorSpec::binary("a") : ComparatorSpec::binary("b"),
                                         f1.value(p.i, f), f2.value(p.j, f));
            CHECK(d.level(k, f) == (c.observed ? *c.level : -1));
        }
        CHECK(d.find_pair(p.i, p.j) == k);
    }
    for (std::size_t j = 0; j < 2; ++j) {
        CHECK(d.column(j).size() == 3);
        for (const auto& c : d.column(j)) CHECK(d.pair(c.pair).j == j);
    }
    // Level totals count observed comparisons only.
    CHECK(d.level_totals(1)[0] + d.level_totals(1)[1] == 4);
}

TEST_CASE("explicit levels and unobserved field") {
    const auto d = ComparisonData::from_levels(2, 1, {{"a", 2}}, {{1, 0}, {0, 0}}, {1, 0});
    CHECK(d.pair(0) == MatchPair{0, 0});
    CHECK(d.level(0, 0) == 0);
    const auto e = d.with_unobserved_field("z", 3);
    CHECK(e.num_fields() == 2);
    CHECK(e.level(1, 1) == -1);
    CHECK(e.num_patterns() == d.num_patterns());
    CHECK_THROWS_AS(ComparisonData::from_levels(2, 1, {{"a", 2}}, {{0, 0}, {0, 0}}, {1, 0}), ValidationError);
    CHECK_THROWS_AS(ComparisonData::from_levels(2, 1, {{"a", 2}}, {{0, 0}}, {2}), ValidationError);
}

}  // TEST_SUITE
