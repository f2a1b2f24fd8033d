#pragma once

#include "rlink/estimators.hpp"
#include "rlink/review.hpp"

/// Four records per file: record 1 is linked automatically, records 2-4 are rejected.
struct ReviewFixture {
    rlink::DataFile file1;
    rlink::DataFile file2;
    rlink::ComparisonData data;
    rlink::PosteriorSummary post;
    rlink::LinkageEstimate est;
    std::vector<rlink::ReviewTask> tasks;
};

inline ReviewFixture review_fixture() {
    using namespace rlink;
    ReviewFixture fx;
    std::vector<Record> r1, r2;
    for (const char* n : {"ANN", "BOB", "CY", "DEE"}) r1.push_back({"", {std::string(n)}});
    for (const char* n : {"ANN", "BOBB", "BO", "CYY"}) r2.push_back({"", {std::string(n)}});
    fx.file1 = DataFile({{"name", FieldKind::String}}, r1);
    fx.file2 = DataFile({{"name", FieldKind::String}}, r2);
    std::vector<MatchPair> pairs;
    std::vector<std::int8_t> levels;
    for (std::uint32_t i = 0; i < 4; ++i) {
        for (std::uint32_t j = 0; j < 4; ++j) {
            pairs.push_back({i, j});
            levels.push_back(i == j ? 0 : 1);
        }
    }
    fx.data = ComparisonData::from_levels(4, 4, {{"name", 2}}, pairs, levels);
    fx.post = PosteriorSummary::from_probabilities(4, 4, {{0, 0}, {1, 1}, {2, 1}, {1, 2}, {3, 2}, {2, 3}, {0, 3}},
                                                   {0.95, 0.4, 0.4, 0.3, 0.3, 0.5, 0.02});
    fx.est = bayes_partial(fx.post, LossConfig::parse("1,1,2,0.1"));
    fx.tasks = build_tasks(fx.est, fx.post, fx.data, &fx.file1, &fx.file2);
    return fx;
}
