#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <map>

#include "oracles.hpp"
#include "rlink/beta_rl.hpp"
#include "rlink/fs_mixture.hpp"

using namespace rlink;

namespace {

/// n1 x n2 complete comparison data with random levels on two fields.
ComparisonData tiny_instance(std::size_t n1, std::size_t n2, Rng& rng, double missing = 0.0) {
    std::vector<MatchPair> pairs;
    std::vector<std::int8_t> levels;
    for (std::uint32_t i = 0; i < n1; ++i) {
        for (std::uint32_t j = 0; j < n2; ++j) {
            pairs.push_back({i, j});
            levels.push_back(uniform01(rng) < missing ? -1 : static_cast<std::int8_t>(uniform_index(rng, 3)));
            levels.push_back(uniform01(rng) < missing ? -1 : static_cast<std::int8_t>(uniform_index(rng, 2)));
        }
    }
    return ComparisonData::from_levels(n1, n2, {{"a", 3}, {"b", 2}}, pairs, levels);
}

double total_variation(const PosteriorSummary& a, const PosteriorSummary& b) {
    double tv = 0.0;
    for (std::size_t j = 0; j < a.n2(); ++j) {
        double d = std::fabs(a.nonmatch(j) - b.nonmatch(j));
        for (std::size_t i = 0; i < a.n1(); ++i) d += std::fabs(a.prob(i, j) - b.prob(i, j));
        tv = std::max(tv, 0.5 * d);
    }
    return tv;
}

}  // namespace

TEST_SUITE("beta_rl") {

TEST_CASE("prior examples") {
    PriorConfig cfg;
    CHECK(prior_log_pmf(MatchingLabeling::from_labels(2, {3}), cfg) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
    CHECK(prior_log_pmf(MatchingLabeling::from_labels(2, {1}), cfg) == doctest::Approx(std::log(0.25)).epsilon(1e-14));
    CHECK(prior_log_pmf(MatchingLabeling(3, 0), cfg) == 0.0);
}

TEST_CASE("prior sums to one") {
    for (auto [a, b] : {std::pair{1.0, 1.0}, {2.0, 5.0}, {0.5, 0.5}}) {
        for (std::size_t n1 = 1; n1 <= 4; ++n1) {
            for (std::size_t n2 = 1; n2 <= 3; ++n2) {
                PriorConfig cfg;
                cfg.alpha_pi = a;
                cfg.beta_pi = b;
                double s = 0.0;
                for (const auto& z : oracle::all_labelings(n1, n2)) s += std::exp(prior_log_pmf(oracle::to_labeling(n1, z), cfg));
                CHECK(std::fabs(s - 1.0) < 1e-10);
            }
        }
    }
    PriorConfig flat;
    flat.flat_matching_prior = true;
    const auto all = oracle::all_labelings(3, 2);
    for (const auto& z : all) {
        CHECK(prior_log_pmf(oracle::to_labeling(3, z), flat) == doctest::Approx(-std::log(double(all.size()))));
    }
}

TEST_CASE("prior config validation") {
    PriorConfig cfg;
    cfg.alpha_pi = 0.0;
    CHECK_THROWS_AS(cfg.resolved({{"a", 2}}), ConfigError);
    PriorConfig shape;
    shape.alpha = {{1.0, 1.0, 1.0}};
    CHECK_THROWS_AS(shape.resolved({{"a", 2}}), ConfigError);
    PriorConfig neg;
    neg.beta = {{1.0, -1.0}};
    CHECK_THROWS_AS(neg.resolved({{"a", 2}}), ConfigError);
    const auto ok = PriorConfig{}.resolved({{"a", 2}, {"b", 3}});
    CHECK(ok.alpha[1] == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("sufficient statistics") {
    Rng rng(3);
    const auto data = tiny_instance(3, 2, rng, 0.3);
    for (const auto& raw : oracle::all_labelings(3, 2)) {
        const auto z = oracle::to_labeling(3, raw);
        const auto s = sufficient_stats(data, z);
        for (std::size_t f = 0; f < 2; ++f) {
            std::uint64_t matched_obs = 0, total_obs = 0;
            for (std::size_t k = 0; k < data.num_pairs(); ++k) {
                if (data.level(k, f) < 0) continue;
                ++total_obs;
                if (raw[data.pair(k).j] == std::int32_t(data.pair(k).i)) ++matched_obs;
            }
            std::uint64_t sa = 0, sb = 0;
            for (auto v : s.a[f]) sa += v;
            for (auto v : s.b[f]) sb += v;
            CHECK(sa == matched_obs);
            CHECK(sa + sb == total_obs);
        }
    }
}

TEST_CASE("sample_phi") {
    const std::vector<FieldLevels> fields{{"a", 4}};
    const auto cfg = PriorConfig{}.resolved(fields);
    SufficientStats zero{{{0, 0, 0, 0}}, {{0, 0, 0, 0}}};
    SufficientStats heavy{{{1000, 0, 0, 0}}, {{0, 0, 0, 0}}};
    std::vector<Rng> rngs{make_stream(5, 0)};
    double mean0 = 0.0, mean_heavy = 0.0;
    const int N = 4000;
    for (int t = 0; t < N; ++t) {
        const auto phi = sample_phi(zero, cfg, rngs);
        CHECK_NOTHROW(phi.validate(fields, 1e-12));
        mean0 += phi.m[0][0] / N;
        mean_heavy += sample_phi(heavy, cfg, rngs).m[0][0] / N;
    }
    CHECK(mean0 == doctest::Approx(0.25).epsilon(0.05));
    CHECK(mean_heavy == doctest::Approx(1001.0 / 1004.0).epsilon(1e-3));

    std::vector<Rng> r1{make_stream(9, 0)}, r2{make_stream(9, 0)};
    CHECK(sample_phi(heavy, cfg, r1).m == sample_phi(heavy, cfg, r2).m);
}

TEST_CASE("label conditional") {
    const auto data = ComparisonData::from_levels(2, 1, {{"a", 2}}, {{0, 0}, {1, 0}}, {0, 1});
    PhiParams eq = PhiParams::uniform(data.fields());
    const auto w = pattern_weights(eq, data);
    const auto p = label_conditional(0, MatchingLabeling(2, 1), data, w, PriorConfig{});
    CHECK(p[0] == doctest::Approx(0.25));
    CHECK(p[1] == doctest::Approx(0.25));
    CHECK(p[2] == doctest::Approx(0.5));

    PriorConfig flat;
    flat.flat_matching_prior = true;
    const auto q = label_conditional(0, MatchingLabeling(2, 1), data, w, flat);
    CHECK(q[0] == doctest::Approx(1.0 / 3));
    CHECK(q[2] == doctest::Approx(1.0 / 3));

    const auto one = ComparisonData::from_levels(1, 2, {{"a", 2}}, {{0, 0}, {0, 1}}, {0, 0});
    const auto taken = MatchingLabeling::from_labels(1, {1, 3});
    const auto r = label_conditional(1, taken, one, pattern_weights(PhiParams::uniform(one.fields()), one), PriorConfig{});
    CHECK(r[0] == 0.0);
    CHECK(r[1] == 1.0);
}

TEST_CASE("label conditional against the direct formula") {
    Rng rng(21);
    const auto data = tiny_instance(4, 3, rng, 0.2);
    PhiParams phi;
    phi.m = {{0.7, 0.2, 0.1}, {0.8, 0.2}};
    phi.u = {{0.1, 0.3, 0.6}, {0.4, 0.6}};
    const auto w = pattern_weights(phi, data);
    PriorConfig cfg;
    cfg.alpha_pi = 2.0;
    cfg.beta_pi = 3.0;
    const auto z = MatchingLabeling::from_labels(4, {2, 6, 7});
    const auto p = label_conditional(1, z, data, w, cfg);
    // File-2 record 0 holds file-1 record 1.
    const double n12 = 1, n1 = 4, n2 = 3;
    std::vector<double> mass(5, 0.0);
    for (std::uint32_t i = 0; i < 4; ++i) {
        if (i == 1) continue;
        mass[i] = std::exp(composite_weight(phi, data.pattern(data.pattern_of(*data.find_pair(i, 1)))));
    }
    mass[4] = (n1 - n12) * (n2 - n12 - 1 + cfg.beta_pi) / (n12 + cfg.alpha_pi);
    double s = 0.0;
    for (double m : mass) s += m;
    for (std::size_t k = 0; k < 5; ++k) CHECK(p[k] == doctest::Approx(mass[k] / s).epsilon(1e-12));
}

TEST_CASE("exact posterior matches the linear-domain oracle") {
    Rng rng(12);
    for (int rep = 0; rep < 5; ++rep) {
        const auto data = tiny_instance(3, 2, rng, 0.2);
        PriorConfig cfg;
        cfg.alpha_pi = 1.5;
        cfg.beta_pi = 0.7;
        const auto ex = exact_posterior(data, cfg);
        double total = 0.0;
        std::map<std::vector<std::size_t>, double> want;
        for (const auto& raw : oracle::all_labelings(3, 2)) {
            want[oracle::to_labeling(3, raw).labels()] = oracle::collapsed_weight(data, raw, cfg.alpha_pi, cfg.beta_pi);
            total += want[oracle::to_labeling(3, raw).labels()];
        }
        REQUIRE(ex.labelings.size() == want.size());
        double s = 0.0;
        for (std::size_t k = 0; k < ex.labelings.size(); ++k) {
            s += ex.probs[k];
            CHECK(ex.probs[k] == doctest::Approx(want[ex.labelings[k].labels()] / total).epsilon(1e-10));
        }
        CHECK(std::fabs(s - 1.0) < 1e-12);
    }
}

TEST_CASE("exact posterior with nothing observed equals the prior") {
    const auto data = ComparisonData::from_levels(2, 1, {{"a", 2}}, {{0, 0}, {1, 0}}, {-1, -1});
    PriorConfig cfg;
    const auto ex = exact_posterior(data, cfg);
    for (std::size_t k = 0; k < ex.labelings.size(); ++k) {
        CHECK(ex.probs[k] == doctest::Approx(std::exp(prior_log_pmf(ex.labelings[k], cfg))).epsilon(1e-14));
    }
}

TEST_CASE("exact posterior refuses large instances") {
    std::vector<MatchPair> pairs;
    for (std::uint32_t i = 0; i < 12; ++i)
        for (std::uint32_t j = 0; j < 12; ++j) pairs.push_back({i, j});
    const auto data = ComparisonData::from_levels(12, 12, {{"a", 2}}, pairs, std::vector<std::int8_t>(144, 0));
    CHECK(count_labelings(data) > kMaxExactLabelings);
    CHECK_THROWS_AS(exact_posterior(data, PriorConfig{}), CapacityError);
}

TEST_CASE("Gibbs is deterministic and its draws are valid") {
    Rng rng(31);
    const auto data = tiny_instance(5, 4, rng, 0.1);
    GibbsOptions opt;
    opt.iterations = 300;
    opt.burn_in = 50;
    opt.seed = 77;
    const auto a = run_gibbs(data, PriorConfig{}, opt);
    const auto b = run_gibbs(data, PriorConfig{}, opt);
    CHECK(a.samples() == b.samples());
    CHECK(a.num_samples() == 250);
    for (const auto& s : a.samples()) CHECK_NOTHROW(oracle::to_labeling(5, s));
    CHECK(a.max_row_sum() <= 1.0 + 1e-12);
    CHECK_NOTHROW(a.validate(1e-12));
    CHECK(a.overlap_samples().size() == 250);
    opt.seed = 78;
    CHECK(run_gibbs(data, PriorConfig{}, opt).samples() != a.samples());
    opt.burn_in = 300;
    CHECK_THROWS_AS(run_gibbs(data, PriorConfig{}, opt), ConfigError);
}

TEST_CASE("Gibbs starts from the empty matching") {
    Rng rng(2);
    const auto data = tiny_instance(3, 3, rng);
    GibbsChain chain(data, PriorConfig{}, 1);
    CHECK(chain.overlap() == 0);
    CHECK(chain.labels() == MatchingLabeling(3, 3));
}

TEST_CASE("Gibbs approaches the exact posterior") {
    Rng rng(8);
    const auto data = tiny_instance(3, 2, rng);
    GibbsOptions opt;
    opt.iterations = 20100;
    opt.burn_in = 100;
    opt.seed = 4;
    const auto g = run_gibbs(data, PriorConfig{}, opt);
    CHECK(total_variation(g, exact_posterior(data, PriorConfig{}).marginals()) < 0.03);
    opt.random_scan = true;
    opt.chains = 2;
    const auto h = run_gibbs(data, PriorConfig{}, opt);
    CHECK(h.num_samples() == 40000);
    CHECK(total_variation(h, exact_posterior(data, PriorConfig{}).marginals()) < 0.03);
}

TEST_CASE("one Gibbs iteration preserves the exact posterior") {
    Rng rng(41);
    const auto data = tiny_instance(2, 2, rng);
    const PriorConfig cfg;
    const auto ex = exact_posterior(data, cfg);
    std::map<std::vector<std::size_t>, std::size_t> index;
    for (std::size_t k = 0; k < ex.labelings.size(); ++k) index[ex.labelings[k].labels()] = k;
    std::discrete_distribution<std::size_t> start(ex.probs.begin(), ex.probs.end());
    GibbsChain chain(data, cfg, 123);
    const std::size_t R = 100000;
    std::vector<double> counts(ex.probs.size(), 0.0);
    for (std::size_t r = 0; r < R; ++r) {
        chain.set_labels(ex.labelings[start(rng)]);
        chain.iterate();
        counts[index.at(chain.labels().labels())] += 1;
    }
    double chi2 = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
        const double e = ex.probs[k] * double(R);
        chi2 += (counts[k] - e) * (counts[k] - e) / e;
    }
    const boost::math::chi_squared dist(double(counts.size() - 1));
    CHECK(chi2 < boost::math::quantile(dist, 0.999));
}

TEST_CASE("an unobserved field leaves the sampler unchanged") {
    Rng rng(6);
    const auto data = tiny_instance(4, 3, rng, 0.2);
    const auto wider = data.with_unobserved_field("z", 4);
    GibbsOptions opt;
    opt.iterations = 200;
    opt.burn_in = 20;
    opt.seed = 9;
    const auto a = run_gibbs(data, PriorConfig{}, opt);
    const auto b = run_gibbs(wider, PriorConfig{}, opt);
    CHECK(a.samples() == b.samples());
    for (std::size_t j = 0; j < 3; ++j) {
        CHECK(a.nonmatch(j) == b.nonmatch(j));
        for (std::size_t i = 0; i < 4; ++i) CHECK(a.prob(i, j) == b.prob(i, j));
    }
    const auto z = MatchingLabeling::from_labels(4, {2, 6, 1});
    const auto sa = sufficient_stats(data, z), sb = sufficient_stats(wider, z);
    CHECK(sa.a[0] == sb.a[0]);
    CHECK(sa.b[1] == sb.b[1]);
    CHECK(collapsed_log_posterior(data, z, PriorConfig{}) == collapsed_log_posterior(wider, z, PriorConfig{}));
}

TEST_CASE("posterior summaries") {
    const auto p = PosteriorSummary::from_probabilities(3, 2, {{0, 0}, {1, 0}, {1, 1}}, {0.5, 0.25, 0.5});
    CHECK(p.nonmatch(0) == 0.25);
    CHECK(p.nonmatch(1) == 0.5);
    CHECK(p.prob(2, 0) == 0.0);
    CHECK(p.max_row_sum() == 0.75);
    CHECK_NOTHROW(p.validate());
    const auto bad = PosteriorSummary::from_probabilities(2, 2, {{0, 0}, {0, 1}}, {0.8, 0.8});
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    CHECK_THROWS_AS(PosteriorSummary::from_probabilities(2, 1, {{0, 0}, {1, 0}}, {0.8, 0.8}), ValidationError);

    const auto s = PosteriorSummary::from_samples(2, 2, {{0, -1}, {1, 0}, {0, 1}, {-1, -1}});
    CHECK(s.prob(0, 0) == 0.5);
    CHECK(s.prob(1, 0) == 0.25);
    CHECK(s.nonmatch(1) == 0.5);
    CHECK(s.overlap_samples() == std::vector<std::size_t>{1, 2, 2, 0});
}

}  // TEST_SUITE
