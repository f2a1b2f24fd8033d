#include "rlink/beta_rl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace rlink {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::uint64_t kLabelStream = 0xFFFF'FFFF'FFFFULL;

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

/// Multivariate log-beta: sum lgamma(x_l) - lgamma(sum x_l).
template <class Counts>
double log_beta(const std::vector<double>& prior, const Counts& counts) {
    double s = 0.0, total = 0.0;
    for (std::size_t l = 0; l < prior.size(); ++l) {
        const double x = prior[l] + static_cast<double>(counts[l]);
        s += std::lgamma(x);
        total += x;
    }
    return s - std::lgamma(total);
}

double log_sum(const std::vector<double>& v) {
    const double m = *std::max_element(v.begin(), v.end());
    if (m == kNegInf) return kNegInf;
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

/// log of the number of matchings with k links: C(n2,k) n1!/(n1-k)!.
double log_num_matchings(std::size_t n1, std::size_t n2, std::size_t k) {
    return std::lgamma(double(n2) + 1) - std::lgamma(double(k) + 1) - std::lgamma(double(n2 - k) + 1) +
           std::lgamma(double(n1) + 1) - std::lgamma(double(n1 - k) + 1);
}

double beta_prior_unnormalized(std::size_t n1, std::size_t n2, std::size_t n12, double a, double b) {
    return std::lgamma(double(n1 - n12) + 1) - std::lgamma(double(n1) + 1) +
           log_beta(double(n12) + a, double(n2 - n12) + b) - log_beta(a, b);
}

SufficientStats stats_from_raw(const ComparisonData& data, const std::vector<std::int64_t>& pair_of) {
    SufficientStats s;
    const std::size_t F = data.num_fields();
    s.a.resize(F);
    s.b.resize(F);
    for (std::size_t f = 0; f < F; ++f) s.a[f].assign(data.fields()[f].num_levels, 0);
    for (auto k : pair_of) {
        if (k < 0) continue;
        const auto levels = data.pattern(data.pattern_of(k));
        for (std::size_t f = 0; f < F; ++f) {
            if (levels[f] >= 0) ++s.a[f][levels[f]];
        }
    }
    for (std::size_t f = 0; f < F; ++f) {
        const auto& total = data.level_totals(f);
        s.b[f].resize(total.size());
        for (std::size_t l = 0; l < total.size(); ++l) s.b[f][l] = total[l] - s.a[f][l];
    }
    return s;
}

std::vector<std::int64_t> pairs_of_labeling(const ComparisonData& data, const MatchingLabeling& z) {
    if (z.n1() != data.n1() || z.n2() != data.n2()) throw ValidationError("labeling size does not match comparison data");
    std::vector<std::int64_t> out(z.n2(), -1);
    for (std::size_t j = 0; j < z.n2(); ++j) {
        if (auto i = z.match(j)) {
            auto k = data.find_pair(*i, j);
            if (!k) throw ValidationError("labeling links a pair outside the candidate set");
            out[j] = static_cast<std::int64_t>(*k);
        }
    }
    return out;
}

std::vector<double> dirichlet(const std::vector<double>& prior, const std::vector<std::uint64_t>& counts, Rng& rng) {
    std::vector<double> x(prior.size());
    double sum = 0.0;
    for (std::size_t l = 0; l < x.size(); ++l) {
        std::gamma_distribution<double> gamma(prior[l] + static_cast<double>(counts[l]), 1.0);
        x[l] = gamma(rng);
        sum += x[l];
    }
    if (!(sum > 0.0)) {
        // Every gamma draw underflowed; fall back to the conditional mean.
        for (std::size_t l = 0; l < x.size(); ++l) x[l] = prior[l] + static_cast<double>(counts[l]);
        sum = std::accumulate(x.begin(), x.end(), 0.0);
    }
    for (auto& v : x) v /= sum;
    return x;
}

}  // namespace

PriorConfig PriorConfig::resolved(const std::vector<FieldLevels>& fields) const {
    if (!(alpha_pi > 0.0) || !(beta_pi > 0.0)) throw ConfigError("alpha_pi and beta_pi must be positive");
    PriorConfig out = *this;
    auto fill = [&](std::vector<std::vector<double>>& v, const char* name) {
        if (v.empty()) {
            for (const auto& f : fields) v.emplace_back(f.num_levels, 1.0);
            return;
        }
        if (v.size() != fields.size()) throw ConfigError(std::string(name) + ": one vector per field required");
        for (std::size_t f = 0; f < fields.size(); ++f) {
            if (v[f].size() != static_cast<std::size_t>(fields[f].num_levels)) {
                throw ConfigError(std::string(name) + ": wrong level count for field '" + fields[f].name + "'");
            }
            for (double x : v[f]) {
                if (!(x > 0.0)) throw ConfigError(std::string(name) + ": hyperparameters must be positive");
            }
        }
    };
    fill(out.alpha, "alpha");
    fill(out.beta, "beta");
    return out;
}

double prior_log_pmf(std::size_t n1, std::size_t n2, std::size_t n12, const PriorConfig& cfg) {
    if (n12 > std::min(n1, n2)) return kNegInf;
    const std::size_t kmax = std::min(n1, n2);
    if (cfg.flat_matching_prior) {
        std::vector<double> terms;
        for (std::size_t k = 0; k <= kmax; ++k) terms.push_back(log_num_matchings(n1, n2, k));
        return -log_sum(terms);
    }
    const double a = cfg.alpha_pi, b = cfg.beta_pi;
    if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("alpha_pi and beta_pi must be positive");
    double lp = beta_prior_unnormalized(n1, n2, n12, a, b);
    if (n1 < n2) {
        // Overlap sizes above n1 are infeasible; renormalize over the feasible ones.
        std::vector<double> terms;
        for (std::size_t k = 0; k <= kmax; ++k) {
            terms.push_back(log_num_matchings(n1, n2, k) + beta_prior_unnormalized(n1, n2, k, a, b));
        }
        lp -= log_sum(terms);
    }
    return lp;
}

double prior_log_pmf(const MatchingLabeling& z, const PriorConfig& cfg) {
    z.validate();
    return prior_log_pmf(z.n1(), z.n2(), z.overlap_size(), cfg);
}

SufficientStats sufficient_stats(const ComparisonData& data, const MatchingLabeling& z) {
    return stats_from_raw(data, pairs_of_labeling(data, z));
}

PhiParams sample_phi(const SufficientStats& stats, const PriorConfig& cfg, std::span<Rng> field_rngs) {
    const std::size_t F = stats.a.size();
    if (field_rngs.size() < F) throw ConfigError("one random stream per field required");
    if (cfg.alpha.size() != F || cfg.beta.size() != F) throw ConfigError("prior is not resolved for these fields");
    PhiParams phi;
    phi.m.resize(F);
    phi.u.resize(F);
    for (std::size_t f = 0; f < F; ++f) {
        phi.m[f] = dirichlet(cfg.alpha[f], stats.a[f], field_rngs[f]);
        phi.u[f] = dirichlet(cfg.beta[f], stats.b[f], field_rngs[f]);
    }
    return phi;
}

namespace {

/// Relative mass of "unmatched" against any single free candidate of weight 0.
double unmatched_log_mass(std::size_t n1, std::size_t n2, std::size_t n12_rest, const PriorConfig& cfg) {
    if (cfg.flat_matching_prior) return 0.0;
    if (n12_rest >= n1) return kNegInf;
    return std::log(double(n1 - n12_rest)) + std::log(double(n2 - n12_rest) - 1.0 + cfg.beta_pi) -
           std::log(double(n12_rest) + cfg.alpha_pi);
}

}  // namespace

std::vector<double> label_conditional(std::size_t j, const MatchingLabeling& z, const ComparisonData& data,
                                      std::span<const double> pattern_w, const PriorConfig& cfg) {
    const std::size_t n1 = data.n1();
    std::vector<bool> taken(n1, false);
    std::size_t n12_rest = 0;
    for (std::size_t t = 0; t < z.n2(); ++t) {
        if (t == j || !z.is_matched(t)) continue;
        taken[*z.match(t)] = true;
        ++n12_rest;
    }
    std::vector<double> logs(n1 + 1, kNegInf);
    bool any_free = false;
    for (const auto& c : data.column(j)) {
        if (taken[c.i]) continue;
        logs[c.i] = pattern_w[data.pattern_of(c.pair)];
        any_free = true;
    }
    std::vector<double> probs(n1 + 1, 0.0);
    if (!any_free) {
        probs[n1] = 1.0;
        return probs;
    }
    logs[n1] = unmatched_log_mass(n1, data.n2(), n12_rest, cfg);
    const double total = log_sum(logs);
    for (std::size_t q = 0; q <= n1; ++q) probs[q] = std::exp(logs[q] - total);
    return probs;
}

// -------------------------------------------------------------------------
//     PosteriorSummary
// -------------------------------------------------------------------------

class PosteriorBuilder {
  public:
    PosteriorBuilder(std::size_t n1, std::size_t n2) {
        s_.n1_ = n1;
        s_.columns_.resize(n2);
        s_.nonmatch_.assign(n2, 0.0);
    }
    PosteriorSummary& get() { return s_; }
    std::vector<std::vector<PosteriorSummary::Entry>>& columns() { return s_.columns_; }
    std::vector<double>& nonmatch() { return s_.nonmatch_; }
    std::vector<std::vector<std::int32_t>>& samples() { return s_.samples_; }
    std::vector<std::size_t>& overlap() { return s_.overlap_; }
    void set_num_samples(std::size_t n) { s_.num_samples_ = n; }

    /// Sorts entries and drops zeros.
    void finish() {
        for (auto& col : s_.columns_) {
            std::sort(col.begin(), col.end(), [](const auto& a, const auto& b) { return a.i < b.i; });
            col.erase(std::remove_if(col.begin(), col.end(), [](const auto& e) { return e.prob <= 0.0; }), col.end());
        }
    }

  private:
    PosteriorSummary s_;
};

PosteriorSummary PosteriorSummary::from_samples(std::size_t n1, std::size_t n2,
                                                const std::vector<std::vector<std::int32_t>>& samples) {
    if (samples.empty()) throw ValidationError("posterior needs at least one sample");
    PosteriorBuilder b(n1, n2);
    std::vector<std::map<std::uint32_t, std::size_t>> counts(n2);
    std::vector<std::size_t> nm(n2, 0);
    for (const auto& z : samples) {
        if (z.size() != n2) throw ValidationError("sample has wrong length");
        std::size_t n12 = 0;
        for (std::size_t j = 0; j < n2; ++j) {
            if (z[j] < 0) {
                ++nm[j];
            } else {
                if (static_cast<std::size_t>(z[j]) >= n1) throw ValidationError("sample label out of range");
                ++counts[j][static_cast<std::uint32_t>(z[j])];
                ++n12;
            }
        }
        b.overlap().push_back(n12);
    }
    const double N = static_cast<double>(samples.size());
    for (std::size_t j = 0; j < n2; ++j) {
        for (const auto& [i, c] : counts[j]) b.columns()[j].push_back({i, double(c) / N});
        b.nonmatch()[j] = double(nm[j]) / N;
    }
    b.samples() = samples;
    b.set_num_samples(samples.size());
    b.finish();
    return b.get();
}

PosteriorSummary PosteriorSummary::from_probabilities(std::size_t n1, std::size_t n2, const std::vector<MatchPair>& pairs,
                                                      const std::vector<double>& probs) {
    if (pairs.size() != probs.size()) throw ValidationError("probability count does not match pair count");
    PosteriorBuilder b(n1, n2);
    std::vector<double> colsum(n2, 0.0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        const auto [i, j] = pairs[k];
        if (i >= n1 || j >= n2) throw ValidationError("probability pair out of range");
        if (!(probs[k] >= 0.0 && probs[k] <= 1.0)) throw ValidationError("probability outside [0,1]");
        b.columns()[j].push_back({i, probs[k]});
        colsum[j] += probs[k];
    }
    for (std::size_t j = 0; j < n2; ++j) {
        if (colsum[j] > 1.0 + 1e-9) throw ValidationError("match probabilities of record " + std::to_string(j + 1) + " exceed 1");
        b.nonmatch()[j] = std::max(0.0, 1.0 - colsum[j]);
        auto& col = b.columns()[j];
        std::sort(col.begin(), col.end(), [](const auto& x, const auto& y) { return x.i < y.i; });
        for (std::size_t t = 1; t < col.size(); ++t) {
            if (col[t].i == col[t - 1].i) throw ValidationError("duplicate probability pair");
        }
    }
    b.finish();
    return b.get();
}

double PosteriorSummary::prob(std::size_t i, std::size_t j) const {
    const auto& col = columns_[j];
    auto it = std::lower_bound(col.begin(), col.end(), i, [](const Entry& e, std::size_t v) { return e.i < v; });
    return it != col.end() && it->i == i ? it->prob : 0.0;
}

double PosteriorSummary::max_row_sum() const {
    std::vector<double> rows(n1_, 0.0);
    for (const auto& col : columns_) {
        for (const auto& e : col) rows[e.i] += e.prob;
    }
    return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

void PosteriorSummary::validate(double tol) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        double s = nonmatch_[j];
        for (const auto& e : columns_[j]) s += e.prob;
        if (std::fabs(s - 1.0) > tol) {
            throw ValidationError("probabilities of record " + std::to_string(j + 1) + " sum to " + std::to_string(s));
        }
    }
    if (max_row_sum() > 1.0 + tol) {
        throw ValidationError("a file-1 record has total match probability above 1; the posterior is not a distribution over matchings");
    }
}

// -------------------------------------------------------------------------
//     Gibbs sampler
// -------------------------------------------------------------------------

GibbsChain::GibbsChain(const ComparisonData& data, const PriorConfig& cfg, std::uint64_t seed, bool random_scan)
    : data_(data),
      cfg_(cfg.resolved(data.fields())),
      random_scan_(random_scan),
      label_rng_(make_stream(seed, kLabelStream)),
      match_(data.n2(), -1),
      pair_of_(data.n2(), -1),
      owner_(data.n1(), -1),
      phi_(PhiParams::uniform(data.fields())) {
    for (std::size_t f = 0; f < data.num_fields(); ++f) field_rngs_.push_back(make_stream(seed, f));
    order_.resize(data.n2());
    std::iota(order_.begin(), order_.end(), 0u);
    refresh_weights();
}

MatchingLabeling GibbsChain::labels() const {
    std::vector<std::optional<std::uint32_t>> m(match_.size());
    for (std::size_t j = 0; j < m.size(); ++j) {
        if (match_[j] >= 0) m[j] = static_cast<std::uint32_t>(match_[j]);
    }
    return MatchingLabeling::from_matches(data_.n1(), m);
}

void GibbsChain::set_labels(const MatchingLabeling& z) {
    pair_of_ = pairs_of_labeling(data_, z);
    std::fill(owner_.begin(), owner_.end(), -1);
    n12_ = 0;
    for (std::size_t j = 0; j < z.n2(); ++j) {
        match_[j] = z.raw(j);
        if (match_[j] >= 0) {
            if (owner_[match_[j]] >= 0) throw ValidationError("labeling repeats a link target");
            owner_[match_[j]] = static_cast<std::int32_t>(j);
            ++n12_;
        }
    }
}

void GibbsChain::update_phi() {
    phi_ = sample_phi(stats_from_raw(data_, pair_of_), cfg_, field_rngs_);
    refresh_weights();
}

void GibbsChain::refresh_weights() {
    // Clamp at the smallest normal double.
    pattern_w_ = pattern_weights(phi_, data_, std::numeric_limits<double>::min());
    ref_ = pattern_w_.empty() ? 0.0 : *std::max_element(pattern_w_.begin(), pattern_w_.end());
    pattern_e_.resize(pattern_w_.size());
    for (std::size_t p = 0; p < pattern_w_.size(); ++p) pattern_e_[p] = std::exp(pattern_w_[p] - ref_);
}

void GibbsChain::sample_label(std::size_t j) {
    if (match_[j] >= 0) {
        owner_[match_[j]] = -1;
        match_[j] = -1;
        pair_of_[j] = -1;
        --n12_;
    }
    const auto column = data_.column(j);
    mass_.clear();
    double wmax = -std::numeric_limits<double>::infinity();
    for (const auto& c : column) {
        if (owner_[c.i] >= 0) {
            mass_.push_back(-1.0);  // taken
            continue;
        }
        const auto p = data_.pattern_of(c.pair);
        mass_.push_back(static_cast<double>(p));
        wmax = std::max(wmax, pattern_w_[p]);
    }
    if (wmax == -std::numeric_limits<double>::infinity()) return;  // no free candidate

    const double log_u = unmatched_log_mass(data_.n1(), data_.n2(), n12_, cfg_);
    // Cached exp(w - ref) are accurate unless every free candidate sits far below ref
    // or the unmatched mass dwarfs it; then normalize at this record's own maximum.
    const bool direct = wmax - ref_ < -600.0 || log_u - ref_ > 600.0;
    const double shift = direct ? std::max(wmax, log_u) : ref_;
    double total = 0.0;
    for (auto& m : mass_) {
        if (m < 0.0) {
            m = 0.0;
            continue;
        }
        const auto p = static_cast<std::size_t>(m);
        m = direct ? std::exp(pattern_w_[p] - shift) : pattern_e_[p];
        total += m;
    }
    const double unmatched = log_u == -std::numeric_limits<double>::infinity() ? 0.0 : std::exp(log_u - shift);
    total += unmatched;

    double target = uniform01(label_rng_) * total;
    for (std::size_t t = 0; t < column.size(); ++t) {
        if (mass_[t] <= 0.0) continue;
        if (target < mass_[t]) {
            match_[j] = static_cast<std::int32_t>(column[t].i);
            pair_of_[j] = static_cast<std::int64_t>(column[t].pair);
            owner_[column[t].i] = static_cast<std::int32_t>(j);
            ++n12_;
            return;
        }
        target -= mass_[t];
    }
    if (unmatched == 0.0) {
        // Rounding pushed the draw past the last candidate; take the last free one.
        for (std::size_t t = column.size(); t-- > 0;) {
            if (mass_[t] <= 0.0) continue;
            match_[j] = static_cast<std::int32_t>(column[t].i);
            pair_of_[j] = static_cast<std::int64_t>(column[t].pair);
            owner_[column[t].i] = static_cast<std::int32_t>(j);
            ++n12_;
            return;
        }
    }
}

void GibbsChain::sweep() {
    if (random_scan_) std::shuffle(order_.begin(), order_.end(), label_rng_);
    for (auto j : order_) sample_label(j);
}

void GibbsChain::iterate() {
    update_phi();
    sweep();
}

PosteriorSummary run_gibbs(const ComparisonData& data, const PriorConfig& cfg, const GibbsOptions& options) {
    if (options.iterations <= options.burn_in) throw ConfigError("iterations must exceed burn-in");
    if (options.chains == 0) throw ConfigError("at least one chain required");
    const std::size_t n1 = data.n1(), n2 = data.n2();
    const std::size_t C = options.chains;
    const std::size_t kept = options.iterations - options.burn_in;

    std::vector<std::vector<std::uint32_t>> pair_counts(C);
    std::vector<std::vector<std::uint32_t>> nm_counts(C);
    std::vector<std::vector<std::vector<std::int32_t>>> draws(C);
    std::vector<std::vector<std::size_t>> overlaps(C);
    const auto resolved = cfg.resolved(data.fields());

#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(C); ++c) {
        const std::uint64_t seed = c == 0 ? options.seed : splitmix64(options.seed + 0x9E37ULL * c);
        GibbsChain chain(data, resolved, seed, options.random_scan);
        pair_counts[c].assign(data.num_pairs(), 0);
        nm_counts[c].assign(n2, 0);
        for (std::size_t t = 0; t < options.iterations; ++t) {
            chain.iterate();
            if (t < options.burn_in) continue;
            const auto& pairs = chain.matched_pairs();
            for (std::size_t j = 0; j < n2; ++j) {
                if (pairs[j] >= 0) ++pair_counts[c][pairs[j]];
                else ++nm_counts[c][j];
            }
            overlaps[c].push_back(chain.overlap());
            if (options.keep_samples) draws[c].push_back(chain.raw_labels());
        }
    }

    PosteriorBuilder b(n1, n2);
    const double N = static_cast<double>(kept * C);
    for (std::size_t k = 0; k < data.num_pairs(); ++k) {
        std::uint64_t total = 0;
        for (std::size_t c = 0; c < C; ++c) total += pair_counts[c][k];
        if (total > 0) b.columns()[data.pair(k).j].push_back({data.pair(k).i, double(total) / N});
    }
    for (std::size_t j = 0; j < n2; ++j) {
        std::uint64_t total = 0;
        for (std::size_t c = 0; c < C; ++c) total += nm_counts[c][j];
        b.nonmatch()[j] = double(total) / N;
    }
    for (std::size_t c = 0; c < C; ++c) {
        b.overlap().insert(b.overlap().end(), overlaps[c].begin(), overlaps[c].end());
        for (auto& d : draws[c]) b.samples().push_back(std::move(d));
    }
    b.set_num_samples(kept * C);
    b.finish();
    auto summary = b.get();
    summary.set_chain({options.iterations, options.burn_in, options.seed, C, options.random_scan});
    return summary;
}

// -------------------------------------------------------------------------
//     Exact posterior
// -------------------------------------------------------------------------

namespace {

template <class Visit>
void enumerate(const ComparisonData& data, std::size_t j, std::vector<std::int32_t>& match, std::vector<bool>& used,
               Visit& visit) {
    if (j == data.n2()) {
        visit(match);
        return;
    }
    match[j] = -1;
    enumerate(data, j + 1, match, used, visit);
    for (const auto& c : data.column(j)) {
        if (used[c.i]) continue;
        used[c.i] = true;
        match[j] = static_cast<std::int32_t>(c.i);
        enumerate(data, j + 1, match, used, visit);
        used[c.i] = false;
    }
    match[j] = -1;
}

MatchingLabeling labeling_from_raw(std::size_t n1, const std::vector<std::int32_t>& raw) {
    std::vector<std::optional<std::uint32_t>> m(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) {
        if (raw[j] >= 0) m[j] = static_cast<std::uint32_t>(raw[j]);
    }
    return MatchingLabeling::from_matches(n1, m);
}

struct CountLimit {};

}  // namespace

std::size_t count_labelings(const ComparisonData& data, std::size_t limit) {
    std::size_t count = 0;
    std::vector<std::int32_t> match(data.n2(), -1);
    std::vector<bool> used(data.n1(), false);
    auto visit = [&](const std::vector<std::int32_t>&) {
        if (++count > limit) throw CountLimit{};
    };
    try {
        enumerate(data, 0, match, used, visit);
    } catch (const CountLimit&) {
    }
    return count;
}

void for_each_labeling(const ComparisonData& data, const std::function<void(const MatchingLabeling&)>& f) {
    std::vector<std::int32_t> match(data.n2(), -1);
    std::vector<bool> used(data.n1(), false);
    auto visit = [&](const std::vector<std::int32_t>& raw) { f(labeling_from_raw(data.n1(), raw)); };
    enumerate(data, 0, match, used, visit);
}

double collapsed_log_posterior(const ComparisonData& data, const MatchingLabeling& z, const PriorConfig& cfg) {
    const auto prior = cfg.resolved(data.fields());
    const auto stats = sufficient_stats(data, z);
    double lp = prior_log_pmf(z.n1(), z.n2(), z.overlap_size(), prior);
    for (std::size_t f = 0; f < data.num_fields(); ++f) {
        const std::vector<std::uint64_t> zero(prior.alpha[f].size(), 0);
        lp += log_beta(prior.alpha[f], stats.a[f]) - log_beta(prior.alpha[f], zero);
        lp += log_beta(prior.beta[f], stats.b[f]) - log_beta(prior.beta[f], zero);
    }
    return lp;
}

ExactPosterior exact_posterior(const ComparisonData& data, const PriorConfig& cfg) {
    const auto n = count_labelings(data);
    if (n > kMaxExactLabelings) {
        throw CapacityError("exact posterior refused: more than " + std::to_string(kMaxExactLabelings) +
                            " labelings to enumerate");
    }
    const auto prior = cfg.resolved(data.fields());
    ExactPosterior out;
    std::vector<double> logs;
    for_each_labeling(data, [&](const MatchingLabeling& z) {
        out.labelings.push_back(z);
        logs.push_back(collapsed_log_posterior(data, z, prior));
    });
    const double total = log_sum(logs);
    out.probs.resize(logs.size());
    for (std::size_t t = 0; t < logs.size(); ++t) out.probs[t] = std::exp(logs[t] - total);
    return out;
}

PosteriorSummary ExactPosterior::marginals() const {
    if (labelings.empty()) throw ValidationError("empty posterior");
    const std::size_t n1 = labelings[0].n1(), n2 = labelings[0].n2();
    PosteriorBuilder b(n1, n2);
    std::vector<std::map<std::uint32_t, double>> acc(n2);
    for (std::size_t t = 0; t < labelings.size(); ++t) {
        for (std::size_t j = 0; j < n2; ++j) {
            if (auto i = labelings[t].match(j)) acc[j][*i] += probs[t];
            else b.nonmatch()[j] += probs[t];
        }
    }
    for (std::size_t j = 0; j < n2; ++j) {
        for (const auto& [i, p] : acc[j]) b.columns()[j].push_back({i, p});
    }
    b.finish();
    return b.get();
}

}  // namespace rlink
