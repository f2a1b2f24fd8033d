#include <doctest.h>

#include "oracles.hpp"
#include "rlink/estimators.hpp"

using namespace rlink;

namespace {

LossConfig loss(double l10, double l01, double l11p, std::optional<double> lr = std::nullopt) {
    LossConfig c;
    c.lambda_10 = l10;
    c.lambda_01 = l01;
    c.lambda_11p = l11p;
    c.lambda_R = lr;
    return c;
}

/// One file-2 record with the given match probabilities.
PosteriorSummary single(std::vector<double> probs) {
    std::vector<MatchPair> pairs;
    for (std::uint32_t i = 0; i < probs.size(); ++i) pairs.push_back({i, 0});
    return PosteriorSummary::from_probabilities(probs.size(), 1, pairs, probs);
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("expected loss example") {
    const auto p = single({0.7, 0.1, 0.2});
    const auto cfg = loss(1, 1, 2);
    CHECK(expected_loss(0, Decision::Link, 1u, p, cfg) == doctest::Approx(2 * 0.9));
    const auto q = PosteriorSummary::from_probabilities(2, 1, {{0, 0}, {1, 0}}, {0.7, 0.1});
    CHECK(expected_loss(0, Decision::Link, 0u, q, cfg) == doctest::Approx(0.2 + 2 * 0.1));
    CHECK(expected_loss(0, Decision::NonLink, std::nullopt, q, cfg) == doctest::Approx(0.8));
    CHECK(expected_loss(0, Decision::Reject, std::nullopt, q, loss(1, 1, 2, 0.1)) == 0.1);
    CHECK(std::isinf(expected_loss(0, Decision::Reject, std::nullopt, q, cfg)));
}

TEST_CASE("loss parsing and regimes") {
    const auto a = LossConfig::parse("1,1,2");
    CHECK(a.theorem1());
    CHECK_FALSE(a.theorem3());
    const auto b = LossConfig::parse("1,1,2,0.1");
    CHECK(b.lambda_R == 0.1);
    CHECK(b.theorem3());
    CHECK_FALSE(b.theorem1());
    CHECK(LossConfig::parse("1,1,2,inf").theorem1());
    CHECK(LossConfig::parse(b.to_string()).lambda_R == b.lambda_R);
    CHECK(b.to_string() == "1,1,2,0.1");
    CHECK_THROWS_AS(LossConfig::parse("1,1"), ConfigError);
    CHECK_THROWS_AS(LossConfig::parse("1,x,2"), ConfigError);
    CHECK_THROWS_AS(loss(0, 1, 2).validate(), ConfigError);
    CHECK_THROWS_AS(loss(1, 1, 2, 0.0).validate(), ConfigError);
    CHECK_FALSE(loss(2, 1, 3).theorem1());
    CHECK_FALSE(loss(1, 1, 1.5).theorem1());
    CHECK_FALSE(loss(1, 1, 2, 0.6).theorem3());
}

TEST_CASE("full estimate thresholds") {
    CHECK(bayes_full(single({0.51}), loss(1, 1, 2)).entries[0].decision == Decision::Link);
    CHECK(bayes_full(single({0.49}), loss(1, 1, 2)).entries[0].decision == Decision::NonLink);
    CHECK(bayes_full(single({0.5}), loss(1, 1, 2)).entries[0].decision == Decision::NonLink);
    CHECK(bayes_full(single({0.76}), loss(1, 3, 4)).entries[0].decision == Decision::Link);
    CHECK(bayes_full(single({0.74}), loss(1, 3, 4)).entries[0].decision == Decision::NonLink);
    const auto e = bayes_full(single({0.2, 0.6}), loss(1, 1, 2));
    CHECK(e.entries[0].decision == Decision::Link);
    CHECK(e.entries[0].i == 1u);
    CHECK(e.entries[0].prob == 0.6);
    CHECK_THROWS_AS(bayes_full(single({0.5}), loss(1, 1, 2, 0.1)), RegimeError);
    CHECK_THROWS_AS(bayes_full(single({0.5}), loss(2, 1, 3)), RegimeError);
}

TEST_CASE("partial estimate examples") {
    const auto cfg = loss(1, 1, 2, 0.1);
    const auto a = bayes_partial(single({0.95}), cfg);
    CHECK(a.entries[0].decision == Decision::Link);
    CHECK(a.entries[0].expected_loss == doctest::Approx(0.05));
    const auto b = bayes_partial(single({1.0 / 3, 1.0 / 3, 1.0 / 3}), cfg);
    CHECK(b.entries[0].decision == Decision::Reject);
    CHECK(b.entries[0].expected_loss == 0.1);
    CHECK(bayes_partial(single({0.05}), cfg).entries[0].decision == Decision::NonLink);
    CHECK(bayes_partial(single({0.5}), cfg).entries[0].decision == Decision::Reject);
    CHECK_THROWS_AS(bayes_partial(single({0.5}), loss(1, 1, 2)), RegimeError);
    CHECK_THROWS_AS(bayes_partial(single({0.5}), loss(1, 1, 2, 0.6)), RegimeError);
}

TEST_CASE("general estimate") {
    // Point mass on a single matching.
    const auto pm = PosteriorSummary::from_samples(3, 2, {{2, -1}});
    const auto g = bayes_estimate_general(pm, loss(1, 1, 2, 0.1));
    CHECK(g.entries[0].decision == Decision::Link);
    CHECK(g.entries[0].i == 2u);
    CHECK(g.entries[1].decision == Decision::NonLink);
    CHECK(g.total_loss() == 0.0);

    // Two records compete for file-1 record 0.
    const auto comp = PosteriorSummary::from_samples(2, 2, {{0, -1}, {0, -1}, {-1, 0}, {-1, 0}, {0, -1}, {-1, 0}, {1, 0}, {0, 1}, {1, 0}, {0, 1}});
    REQUIRE(comp.prob(0, 0) == doctest::Approx(0.5));
    const auto c = bayes_estimate_general(comp, loss(1, 1, 4));
    std::vector<std::vector<double>> P;
    std::vector<double> Pn;
    oracle::dense_marginals(comp, P, Pn);
    CHECK(c.total_loss() == doctest::Approx(oracle::best_decision_loss(P, Pn, 2, loss(1, 1, 4))).epsilon(1e-12));
    CHECK_NOTHROW(c.validate());

    // Only one of them can have it.
    const auto ties = PosteriorSummary::from_probabilities(1, 2, {{0, 0}, {0, 1}}, {0.6, 0.4});
    CHECK_NOTHROW(ties.validate());
    const auto t = bayes_estimate_general(ties, loss(1, 1, 2));
    CHECK(t.count(Decision::Link) == 1);
    CHECK(t.entries[0].i == 0u);
}

TEST_CASE("closed forms and assignment agree with brute force") {
    Rng rng(17);
    const std::vector<LossConfig> full_cfgs{loss(1, 1, 2), loss(1, 3, 4), loss(0.5, 2, 3)};
    const std::vector<LossConfig> partial_cfgs{loss(1, 1, 2, 0.1), loss(1, 1, 2, 0.5), loss(2, 3, 5, 0.25)};
    for (int rep = 0; rep < 60; ++rep) {
        const std::size_t n1 = 1 + uniform_index(rng, 3), n2 = 1 + uniform_index(rng, n1);
        const auto post = oracle::random_posterior(n1, n2, rng, 1 + uniform_index(rng, 30));
        std::vector<std::vector<double>> P;
        std::vector<double> Pn;
        oracle::dense_marginals(post, P, Pn);
        for (const auto& cfg : full_cfgs) {
            const double best = oracle::best_decision_loss(P, Pn, n1, cfg);
            const auto f = bayes_full(post, cfg);
            CHECK(oracle::estimate_loss(f, P, Pn, cfg) == doctest::Approx(best).epsilon(1e-12));
            CHECK(bayes_estimate_general(post, cfg).total_loss() == doctest::Approx(best).epsilon(1e-12));
            CHECK(f.total_loss() == doctest::Approx(best).epsilon(1e-12));
        }
        for (const auto& cfg : partial_cfgs) {
            const double best = oracle::best_decision_loss(P, Pn, n1, cfg);
            const auto p = bayes_partial(post, cfg);
            CHECK(oracle::estimate_loss(p, P, Pn, cfg) == doctest::Approx(best).epsilon(1e-12));
            CHECK(bayes_estimate_general(post, cfg).total_loss() == doctest::Approx(best).epsilon(1e-12));
        }
        const auto off = loss(2, 1, 1.5, 0.3);
        CHECK(bayes_estimate_general(post, off).total_loss() ==
              doctest::Approx(oracle::best_decision_loss(P, Pn, n1, off)).epsilon(1e-12));
    }
}

TEST_CASE("rejections grow as the rejection loss falls") {
    Rng rng(23);
    const auto post = oracle::random_posterior(4, 4, rng, 12);
    std::size_t prev = 0;
    for (double lr : {0.5, 0.4, 0.3, 0.2, 0.1, 0.05, 0.01}) {
        const auto e = bayes_partial(post, loss(1, 1, 2, lr));
        CHECK(e.count(Decision::Reject) >= prev);
        prev = e.count(Decision::Reject);
    }
}

TEST_CASE("validation and crosstab") {
    LinkageEstimate e{3, {}, "x", loss(1, 1, 2)};
    e.entries = {{Decision::Link, 0u, 0.9, 0.1}, {Decision::Link, 0u, 0.9, 0.1}};
    CHECK_THROWS_AS(e.validate(), ValidationError);
    e.entries[1] = {Decision::Reject, std::nullopt, 0.5, 0.1};
    CHECK_THROWS_AS(e.validate(), ValidationError);
    e.loss.lambda_R = 0.1;
    CHECK_NOTHROW(e.validate());

    LinkageEstimate f{3, {{Decision::Link, 0u, 0.9, 0.1}, {Decision::NonLink, std::nullopt, 0.5, 0.5}}, "y", loss(1, 1, 2)};
    const auto t = crosstab(e, f);
    CHECK(t.counts[0][0] == 1);
    CHECK(t.counts[2][1] == 1);
    CHECK(t.same_target == 1);
    CHECK(t.to_string("x", "y").find("[1]") != std::string::npos);
    CHECK_FALSE(e.same_decisions(f));
    CHECK(e.same_decisions(e));
}

TEST_CASE("refuses probabilities that are not from a matching distribution") {
    const auto bad = PosteriorSummary::from_probabilities(1, 2, {{0, 0}, {0, 1}}, {0.7, 0.7});
    CHECK_THROWS_AS(bayes_estimate_general(bad, loss(1, 1, 2)), ValidationError);
    CHECK_THROWS_AS(bayes_full(bad, loss(1, 1, 2)), ValidationError);
    CHECK_THROWS_AS(bayes_partial(bad, loss(1, 1, 2, 0.1)), ValidationError);
}

}  // TEST_SUITE
