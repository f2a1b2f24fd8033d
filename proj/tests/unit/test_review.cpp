#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "review_fixture.hpp"

using namespace rlink;

namespace {

ReviewDecision link(std::size_t task, std::uint32_t i, bool supersede = false) {
    ReviewDecision d;
    d.task = task;
    d.action = ReviewAction::Link;
    d.i = i;
    d.supersede = supersede;
    return d;
}

ReviewDecision other(std::size_t task, ReviewAction a, bool supersede = false) {
    ReviewDecision d;
    d.task = task;
    d.action = a;
    d.supersede = supersede;
    return d;
}

std::string temp_log(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "rlink_review_test";
    std::filesystem::create_directories(dir);
    const auto p = dir / name;
    std::filesystem::remove(p);
    return p.string();
}

}  // namespace

TEST_SUITE("review") {

TEST_CASE("tasks cover rejected records") {
    const auto fx = review_fixture();
    REQUIRE(fx.tasks.size() == 3);
    CHECK(fx.tasks[0].id == 2);
    CHECK(fx.tasks[1].id == 3);
    CHECK(fx.tasks[2].id == 4);
    const auto& t4 = fx.tasks[2];
    REQUIRE(t4.candidates.size() == 2);
    CHECK(t4.candidates[0].i == 2);
    CHECK(t4.candidates[1].i == 0);
    CHECK(t4.nonmatch_prob == doctest::Approx(0.48));
    CHECK(t4.candidates[0].levels == std::vector<int>{fx.data.level(*fx.data.find_pair(2, 3), 0)});
    CHECK(t4.candidates[0].values == fx.file1.record(2).values);
    CHECK(t4.values == fx.file2.record(3).values);
}

TEST_CASE("candidate lists") {
    std::vector<MatchPair> pairs;
    std::vector<double> probs;
    for (std::uint32_t i = 0; i < 10; ++i) {
        pairs.push_back({i, 0});
        probs.push_back(i < 3 ? 0.2 : 0.005);
    }
    const auto post = PosteriorSummary::from_probabilities(10, 1, pairs, probs);
    std::vector<std::int8_t> levels(10, 0);
    const auto data = ComparisonData::from_levels(10, 1, {{"a", 2}}, pairs, levels);
    LinkageEstimate est{10, {{Decision::Reject, std::nullopt, 0.365, 0.1}}, "partial", LossConfig::parse("1,1,2,0.1")};
    const auto tasks = build_tasks(est, post, data, nullptr, nullptr);
    REQUIRE(tasks.size() == 1);
    CHECK(tasks[0].candidates.size() == kTopCandidates);
    for (std::size_t c = 1; c < tasks[0].candidates.size(); ++c) {
        CHECK(tasks[0].candidates[c - 1].prob >= tasks[0].candidates[c].prob);
    }
}

TEST_CASE("submission outcomes") {
    auto fx = review_fixture();
    ReviewSession s(fx.est, fx.post, fx.tasks, "");
    CHECK(s.submit(link(2, 1)).status == SubmitStatus::Committed);
    CHECK(s.submit(link(2, 1)).status == SubmitStatus::Duplicate);
    CHECK(s.snapshot()->log.size() == 1);
    const auto c = s.submit(other(2, ReviewAction::NonLink));
    CHECK(c.status == SubmitStatus::Conflict);
    REQUIRE(c.decision.has_value());
    CHECK(c.decision->i == 1u);
    CHECK(s.submit(other(2, ReviewAction::NonLink, true)).status == SubmitStatus::Committed);
    CHECK(s.snapshot()->num_decided == 1);

    CHECK(s.submit(link(4, 0)).status == SubmitStatus::Conflict);   // automatic link holds record 0
    CHECK(s.submit(link(3, 0)).status == SubmitStatus::Invalid);    // not a candidate
    CHECK(s.submit(link(1, 0)).status == SubmitStatus::NotFound);   // not rejected
    CHECK(s.submit(link(99, 0)).status == SubmitStatus::NotFound);
    ReviewDecision bad = other(3, ReviewAction::NonLink);
    bad.i = 1;
    CHECK(s.submit(bad).status == SubmitStatus::Invalid);

    CHECK(s.submit(link(2, 2, true)).status == SubmitStatus::Committed);
    CHECK(s.submit(link(4, 2)).status == SubmitStatus::Conflict);  // first committed wins
    CHECK(s.submit(link(2, 1, true)).status == SubmitStatus::Committed);
    CHECK(s.submit(link(4, 2)).status == SubmitStatus::Committed);  // released
    CHECK(s.submit(other(3, ReviewAction::Skip)).status == SubmitStatus::Committed);
    CHECK(s.snapshot()->num_decided == 3);
    CHECK_FALSE(s.snapshot()->log.back().timestamp.empty());

    const auto progress = s.progress_json();
    CHECK(progress["total"] == 3);
    CHECK(progress["decided"] == 3);
    CHECK(progress["links"] == 2);
    CHECK(progress["skips"] == 1);

    const auto m = s.merged();
    CHECK(m.entries[1].decision == Decision::Link);
    CHECK(m.entries[1].i == 1u);
    CHECK(m.entries[3].i == 2u);
    CHECK(m.entries[2].decision == Decision::Reject);
    CHECK(m.estimator == "partial+review");
    CHECK(m.entries[1].prob == doctest::Approx(0.4));
}

TEST_CASE("replay restores the session") {
    const auto path = temp_log("replay.jsonl");
    auto fx = review_fixture();
    std::shared_ptr<const ReviewSession::Snapshot> before;
    {
        ReviewSession s(fx.est, fx.post, fx.tasks, path);
        s.submit(link(2, 2));
        s.submit(other(3, ReviewAction::NonLink));
        s.submit(link(2, 1, true));
        before = s.snapshot();
    }
    ReviewSession again(fx.est, fx.post, fx.tasks, path);
    const auto after = again.snapshot();
    REQUIRE(after->log.size() == before->log.size());
    for (std::size_t k = 0; k < after->log.size(); ++k) CHECK(after->log[k].to_json() == before->log[k].to_json());
    CHECK(after->reviewed_owner == before->reviewed_owner);
    CHECK(after->num_decided == before->num_decided);
    CHECK(again.submit(link(4, 2)).status == SubmitStatus::Committed);
}

TEST_CASE("a torn final line is ignored") {
    const auto path = temp_log("torn.jsonl");
    auto fx = review_fixture();
    {
        ReviewSession s(fx.est, fx.post, fx.tasks, path);
        s.submit(link(2, 1));
    }
    {
        std::ofstream out(path, std::ios::app);
        out << "{\"task_id\": 3, \"decis";
    }
    {
        ReviewSession s(fx.est, fx.post, fx.tasks, path);
        CHECK(s.snapshot()->log.size() == 1);
        CHECK(s.submit(other(3, ReviewAction::NonLink)).status == SubmitStatus::Committed);
    }
    ReviewSession s(fx.est, fx.post, fx.tasks, path);
    CHECK(s.snapshot()->log.size() == 2);

    {
        std::ofstream out(path, std::ios::app);
        out << "garbage\n{\"task_id\": 4, \"decision\": \"skip\"}\n";
    }
    CHECK_THROWS_AS(ReviewSession(fx.est, fx.post, fx.tasks, path), ValidationError);
}

TEST_CASE("decision documents") {
    const auto d = ReviewDecision::from_json(Json::parse(R"({"task_id": 4, "decision": "link", "record": 3, "note": "n"})"));
    CHECK(d.task == 4);
    CHECK(d.i == 2u);
    CHECK(d.note == "n");
    CHECK(ReviewDecision::from_json(d.to_json()).same_outcome(d));
    CHECK(d.to_json()["record"] == 3);
    CHECK_THROWS_AS(ReviewDecision::from_json(Json::parse(R"({"task_id": 0, "decision": "skip"})")), ValidationError);
    CHECK_THROWS_AS(ReviewDecision::from_json(Json::parse(R"({"task_id": 2, "decision": "maybe"})")), ValidationError);
    CHECK_THROWS_AS(ReviewDecision::from_json(Json::parse(R"({"task_id": 2, "decision": "link"})")), ValidationError);
    CHECK_THROWS_AS(ReviewDecision::from_json(Json::parse(R"({"task_id": 2, "decision": "skip", "record": 1})")),
                    ValidationError);
    CHECK_THROWS_AS(ReviewDecision::from_json(Json::parse("[1]")), ValidationError);
    CHECK(utc_timestamp().size() == 20);
}

TEST_CASE("merging decisions") {
    LinkageEstimate est{5, {}, "partial", LossConfig::parse("1,1,2,0.1")};
    est.entries = {{Decision::Link, 0u, 0.95, 0.05}, {Decision::Reject, std::nullopt, 0.2, 0.1},
                   {Decision::Reject, std::nullopt, 0.3, 0.1}, {Decision::Reject, std::nullopt, 0.4, 0.1},
                   {Decision::NonLink, std::nullopt, 0.99, 0.01}};
    const auto m = merge_decisions(est, {link(2, 1), link(3, 2), other(4, ReviewAction::NonLink)});
    CHECK(m.count(Decision::Link) == est.count(Decision::Link) + 2);
    CHECK(m.count(Decision::Reject) == est.count(Decision::Reject) - 3);
    CHECK(m.count(Decision::NonLink) == est.count(Decision::NonLink) + 1);
    CHECK(m.estimator == "partial+review");

    const auto unchanged = merge_decisions(est, {});
    CHECK(unchanged.same_decisions(est));

    const auto last = merge_decisions(est, {link(2, 1), other(2, ReviewAction::NonLink)});
    CHECK(last.entries[1].decision == Decision::NonLink);
    CHECK(merge_decisions(est, {other(2, ReviewAction::Skip)}).entries[1].decision == Decision::Reject);

    CHECK_THROWS_AS(merge_decisions(est, {link(2, 0)}), ValidationError);
    CHECK_THROWS_AS(merge_decisions(est, {link(2, 3), link(3, 3)}), ValidationError);
    CHECK_THROWS_AS(merge_decisions(est, {link(1, 3)}), ValidationError);
    CHECK_THROWS_AS(merge_decisions(est, {link(2, 9)}), ValidationError);
    try {
        merge_decisions(est, {link(2, 3), link(3, 3)});
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("records 2 3") != std::string::npos);
    }
}

}  // TEST_SUITE
