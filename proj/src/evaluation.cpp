#include "rlink/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace rlink {

namespace {

std::optional<double> ratio(std::size_t num, std::size_t den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

EvalReport tally(const MatchingLabeling& truth, const LinkageEstimate& est) {
    if (truth.n2() != est.n2() || truth.n1() != est.n1) throw ValidationError("truth and estimate differ in size");
    EvalReport r;
    r.n2 = truth.n2();
    for (std::size_t j = 0; j < r.n2; ++j) {
        const auto t = truth.match(j);
        const auto& e = est.entries[j];
        if (t) ++r.true_matches;
        switch (e.decision) {
            case Decision::Link:
                ++r.links;
                if (t && e.i == t) ++r.correct_links;
                break;
            case Decision::NonLink:
                ++r.nonlinks;
                if (!t) ++r.correct_nonlinks;
                break;
            case Decision::Reject:
                ++r.rejections;
                break;
        }
    }
    r.precision = ratio(r.correct_links, r.links);
    r.recall = ratio(r.correct_links, r.true_matches);
    r.ppv = r.precision;
    r.npv = ratio(r.correct_nonlinks, r.nonlinks);
    r.rejection_rate = ratio(r.rejections, r.n2);
    return r;
}

}  // namespace

EvalReport score_full(const MatchingLabeling& truth, const LinkageEstimate& est) {
    auto r = tally(truth, est);
    if (r.rejections > 0) throw ValidationError("full estimate expected, found rejections");
    return r;
}

EvalReport score_partial(const MatchingLabeling& truth, const LinkageEstimate& est) { return tally(truth, est); }

LinkageEstimate estimate_from_labeling(const MatchingLabeling& z, std::string name) {
    LinkageEstimate est{z.n1(), {}, std::move(name), {}};
    for (std::size_t j = 0; j < z.n2(); ++j) {
        EstimateEntry e;
        e.i = z.match(j);
        e.decision = e.i ? Decision::Link : Decision::NonLink;
        est.entries.push_back(e);
    }
    return est;
}

double spectral_density_zero(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / double(n);
    auto autocov = [&](std::size_t k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) s += (x[t] - mean) * (x[t + k] - mean);
        return s / double(n);
    };
    const auto lag = std::min<std::size_t>(n - 1, std::max<std::size_t>(1, std::size_t(std::ceil(0.04 * double(n)))));
    const double gamma0 = autocov(0);
    double s = gamma0;
    for (std::size_t k = 1; k <= lag; ++k) {
        const double w = 0.5 * (1.0 + std::cos(std::numbers::pi * double(k) / double(lag + 1)));
        s += 2.0 * w * autocov(k);
    }
    return s > 0.0 ? s : gamma0;
}

std::optional<double> geweke_z(std::span<const double> chain, double first_frac, double last_frac) {
    if (chain.size() < 100) throw ValidationError("Geweke diagnostic needs a chain of at least 100 values");
    if (!(first_frac > 0.0) || !(last_frac > 0.0) || first_frac + last_frac > 1.0) {
        throw ConfigError("Geweke fractions must be positive and sum to at most 1");
    }
    const std::size_t n = chain.size();
    const auto na = std::max<std::size_t>(2, std::size_t(std::floor(first_frac * double(n))));
    const auto nb = std::max<std::size_t>(2, std::size_t(std::floor(last_frac * double(n))));
    const auto a = chain.subspan(0, na);
    const auto b = chain.subspan(n - nb, nb);
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / double(na);
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / double(nb);
    const double var = spectral_density_zero(a) / double(na) + spectral_density_zero(b) / double(nb);
    if (var <= 0.0) {
        if (ma == mb) return std::nullopt;
        return ma > mb ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    }
    return (ma - mb) / std::sqrt(var);
}

std::string_view to_string(QuantileType t) {
    return t == QuantileType::InverseCdf ? "inverse-cdf" : "linear";
}

double quantile(std::span<const double> sorted, double q, QuantileType type) {
    if (sorted.empty()) throw ValidationError("quantile of an empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("quantile level outside [0,1]");
    const std::size_t n = sorted.size();
    if (type == QuantileType::InverseCdf) {
        // Smallest k with k/n >= q.
        double pos = q * double(n);
        const double rounded = std::round(pos);
        if (std::fabs(pos - rounded) < 1e-9 * std::max(1.0, pos)) pos = rounded;
        auto k = static_cast<std::size_t>(std::ceil(pos));
        k = std::clamp<std::size_t>(k, 1, n);
        return sorted[k - 1];
    }
    const double h = (double(n) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, n - 1);
    return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

IntervalSummary summarize(std::vector<double> samples, double level, QuantileType type) {
    if (samples.empty()) throw ValidationError("summary of an empty sample");
    if (!(level > 0.0 && level < 1.0)) throw ConfigError("interval level must lie in (0,1)");
    std::sort(samples.begin(), samples.end());
    IntervalSummary s;
    s.mean = std::accumulate(samples.begin(), samples.end(), 0.0) / double(samples.size());
    s.median = quantile(samples, 0.5, type);
    const double tail = (1.0 - level) / 2.0;
    s.lower = quantile(samples, tail, type);
    s.upper = quantile(samples, 1.0 - tail, type);
    return s;
}

OverlapSummary overlap_summary(const PosteriorSummary& posterior, double level, QuantileType type) {
    const auto& ov = posterior.overlap_samples();
    if (ov.empty()) throw ValidationError("posterior has no overlap samples");
    std::vector<double> n12(ov.begin(), ov.end()), prop, uni;
    for (double k : n12) {
        prop.push_back(posterior.n2() ? k / double(posterior.n2()) : 0.0);
        uni.push_back(double(posterior.n1() + posterior.n2()) - k);
    }
    OverlapSummary out;
    out.level = level;
    out.convention = type;
    out.overlap = summarize(n12, level, type);
    out.proportion = summarize(prop, level, type);
    out.union_size = summarize(uni, level, type);
    return out;
}

std::vector<PairDiagnostic> geweke_pair_statuses(const PosteriorSummary& posterior, double first_frac,
                                                 double last_frac) {
    const auto& draws = posterior.samples();
    if (draws.size() < 100) throw ValidationError("Geweke diagnostics need at least 100 retained draws");
    std::map<MatchPair, std::vector<double>> chains;
    for (std::size_t t = 0; t < draws.size(); ++t) {
        for (std::size_t j = 0; j < draws[t].size(); ++j) {
            if (draws[t][j] < 0) continue;
            auto& c = chains[{static_cast<std::uint32_t>(draws[t][j]), static_cast<std::uint32_t>(j)}];
            if (c.empty()) c.assign(draws.size(), 0.0);
            c[t] = 1.0;
        }
    }
    std::vector<PairDiagnostic> out;
    for (const auto& [pair, c] : chains) {
        if (auto z = geweke_z(c, first_frac, last_frac)) out.push_back({pair, *z});
    }
    return out;
}

}  // namespace rlink
