#include "rlink/fs_mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "rlink/lsap.hpp"

namespace rlink {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

void check_distribution(const std::vector<double>& v, std::size_t size, double tol, const std::string& what) {
    if (v.size() != size) throw ValidationError(what + ": wrong number of levels");
    double sum = 0.0;
    for (double x : v) {
        if (!(x >= 0.0)) throw ValidationError(what + ": negative or NaN probability");
        sum += x;
    }
    if (std::fabs(sum - 1.0) > tol) throw ValidationError(what + ": probabilities do not sum to 1");
}

}  // namespace

void PhiParams::validate(const std::vector<FieldLevels>& fields, double tol) const {
    if (m.size() != fields.size() || u.size() != fields.size()) {
        throw ValidationError("Phi has " + std::to_string(m.size()) + " fields, expected " +
                              std::to_string(fields.size()));
    }
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const auto n = static_cast<std::size_t>(fields[f].num_levels);
        check_distribution(m[f], n, tol, "m[" + fields[f].name + "]");
        check_distribution(u[f], n, tol, "u[" + fields[f].name + "]");
    }
    if (p && !(*p >= 0.0 && *p <= 1.0)) throw ValidationError("mixture proportion outside [0,1]");
}

PhiParams PhiParams::uniform(const std::vector<FieldLevels>& fields) {
    PhiParams phi;
    for (const auto& f : fields) {
        phi.m.emplace_back(f.num_levels, 1.0 / f.num_levels);
        phi.u.emplace_back(f.num_levels, 1.0 / f.num_levels);
    }
    return phi;
}

PhiParams PhiParams::em_default(const std::vector<FieldLevels>& fields) {
    PhiParams phi = uniform(fields);
    for (std::size_t f = 0; f < fields.size(); ++f) {
        const int L = fields[f].num_levels;
        if (L < 2) continue;
        phi.m[f].assign(L, 0.1 / (L - 1));
        phi.m[f][0] = 0.9;
    }
    phi.p = 0.1;
    return phi;
}

double composite_weight(const PhiParams& phi, std::span<const std::int8_t> levels, double floor) {
    double w = 0.0;
    for (std::size_t f = 0; f < levels.size(); ++f) {
        const int l = levels[f];
        if (l < 0) continue;
        w += std::log(std::max(phi.m[f][l], floor)) - std::log(std::max(phi.u[f][l], floor));
    }
    return w;
}

std::vector<double> pattern_weights(const PhiParams& phi, const ComparisonData& data, double floor) {
    std::vector<double> w(data.num_patterns());
    for (std::size_t p = 0; p < w.size(); ++p) w[p] = composite_weight(phi, data.pattern(p), floor);
    return w;
}

std::vector<double> pair_weights(const PhiParams& phi, const ComparisonData& data, double floor) {
    const auto pw = pattern_weights(phi, data, floor);
    std::vector<double> w(data.num_pairs());
    const auto n = static_cast<std::int64_t>(w.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t k = 0; k < n; ++k) w[k] = pw[data.pattern_of(k)];
    return w;
}

std::vector<double> pair_weights_serial(const PhiParams& phi, const ComparisonData& data, double floor) {
    std::vector<double> w(data.num_pairs());
    std::vector<std::int8_t> levels(data.num_fields());
    for (std::size_t k = 0; k < w.size(); ++k) {
        for (std::size_t f = 0; f < levels.size(); ++f) levels[f] = static_cast<std::int8_t>(data.level(k, f));
        w[k] = composite_weight(phi, levels, floor);
    }
    return w;
}

// -------------------------------------------------------------------------
//     EM
// -------------------------------------------------------------------------

namespace {

struct PatternLogs {
    std::vector<double> log_m, log_u;
};

PatternLogs pattern_logs(const PhiParams& phi, const ComparisonData& data) {
    PatternLogs out;
    out.log_m.resize(data.num_patterns());
    out.log_u.resize(data.num_patterns());
    for (std::size_t p = 0; p < data.num_patterns(); ++p) {
        double lm = 0.0, lu = 0.0;
        const auto levels = data.pattern(p);
        for (std::size_t f = 0; f < levels.size(); ++f) {
            if (levels[f] < 0) continue;
            lm += std::log(phi.m[f][levels[f]]);
            lu += std::log(phi.u[f][levels[f]]);
        }
        out.log_m[p] = lm;
        out.log_u[p] = lu;
    }
    return out;
}

double log_or_neg_inf(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

}  // namespace

double mixture_log_likelihood(const PhiParams& phi, const ComparisonData& data) {
    const double p = phi.p.value_or(0.5);
    const auto logs = pattern_logs(phi, data);
    double ll = 0.0;
    for (std::size_t q = 0; q < data.num_patterns(); ++q) {
        const double a = log_or_neg_inf(p) + logs.log_m[q];
        const double b = log_or_neg_inf(1.0 - p) + logs.log_u[q];
        ll += static_cast<double>(data.pattern_count(q)) * log_sum_exp(a, b);
    }
    return ll;
}

std::vector<double> pattern_match_probabilities(const PhiParams& phi, const ComparisonData& data) {
    const double p = phi.p.value_or(0.5);
    const auto logs = pattern_logs(phi, data);
    std::vector<double> g(data.num_patterns());
    for (std::size_t q = 0; q < g.size(); ++q) {
        const double a = log_or_neg_inf(p) + logs.log_m[q];
        const double b = log_or_neg_inf(1.0 - p) + logs.log_u[q];
        g[q] = a == kNegInf ? 0.0 : std::exp(a - log_sum_exp(a, b));
    }
    return g;
}

std::vector<double> floored_proportions(const std::vector<double>& counts, double floor) {
    const std::size_t L = counts.size();
    if (L == 0) return {};
    if (floor * static_cast<double>(L) > 1.0) throw ConfigError("probability floor too large for level count");
    std::vector<bool> pinned(L, false);
    std::vector<double> out(L, floor);
    // Water-filling: levels whose unconstrained share falls below the floor are pinned to it.
    for (;;) {
        double free_mass = 1.0, free_count = 0.0;
        for (std::size_t l = 0; l < L; ++l) {
            if (pinned[l]) free_mass -= floor;
            else free_count += counts[l];
        }
        if (free_count <= 0.0) {
            std::size_t n_free = 0;
            for (std::size_t l = 0; l < L; ++l) n_free += !pinned[l];
            for (std::size_t l = 0; l < L; ++l) out[l] = pinned[l] ? floor : free_mass / double(n_free);
            return out;
        }
        bool changed = false;
        for (std::size_t l = 0; l < L; ++l) {
            if (pinned[l]) continue;
            const double share = free_mass * counts[l] / free_count;
            if (share < floor) {
                pinned[l] = true;
                changed = true;
            }
        }
        if (!changed) {
            for (std::size_t l = 0; l < L; ++l) out[l] = pinned[l] ? floor : free_mass * counts[l] / free_count;
            return out;
        }
    }
}

EmResult em_fit(const ComparisonData& data, const std::optional<PhiParams>& init, const EmOptions& options) {
    const auto& fields = data.fields();
    if (data.num_pairs() == 0) throw ValidationError("EM needs at least one comparison");
    bool any_observed = false;
    for (std::size_t f = 0; f < fields.size(); ++f) {
        for (auto c : data.level_totals(f)) any_observed |= c > 0;
    }
    if (!any_observed) throw ValidationError("EM needs at least one observed comparison");

    EmResult result;
    result.phi = init ? *init : PhiParams::em_default(fields);
    if (!result.phi.p) result.phi.p = 0.1;
    result.phi.validate(fields, 1e-9);
    // Project the start onto the floored simplex so every update stays feasible.
    for (std::size_t f = 0; f < fields.size(); ++f) {
        result.phi.m[f] = floored_proportions(result.phi.m[f], options.floor);
        result.phi.u[f] = floored_proportions(result.phi.u[f], options.floor);
    }
    result.degenerate = data.num_patterns() == 1;

    const std::size_t P = data.num_patterns();
    const double N = static_cast<double>(data.num_pairs());
    double ll = mixture_log_likelihood(result.phi, data);
    result.log_likelihood.push_back(ll);

    for (std::size_t it = 0; it < options.max_iterations; ++it) {
        const auto g = pattern_match_probabilities(result.phi, data);
        double match_total = 0.0;
        std::vector<std::vector<double>> nm(fields.size()), nu(fields.size());
        for (std::size_t f = 0; f < fields.size(); ++f) {
            nm[f].assign(fields[f].num_levels, 0.0);
            nu[f].assign(fields[f].num_levels, 0.0);
        }
        for (std::size_t q = 0; q < P; ++q) {
            const double c = static_cast<double>(data.pattern_count(q));
            match_total += c * g[q];
            const auto levels = data.pattern(q);
            for (std::size_t f = 0; f < levels.size(); ++f) {
                if (levels[f] < 0) continue;
                nm[f][levels[f]] += c * g[q];
                nu[f][levels[f]] += c * (1.0 - g[q]);
            }
        }
        result.phi.p = match_total / N;
        for (std::size_t f = 0; f < fields.size(); ++f) {
            if (std::accumulate(nm[f].begin(), nm[f].end(), 0.0) > 0.0) {
                result.phi.m[f] = floored_proportions(nm[f], options.floor);
            }
            if (std::accumulate(nu[f].begin(), nu[f].end(), 0.0) > 0.0) {
                result.phi.u[f] = floored_proportions(nu[f], options.floor);
            }
        }
        const double next = mixture_log_likelihood(result.phi, data);
        result.log_likelihood.push_back(next);
        result.iterations = it + 1;
        const double change = std::fabs(next - ll) / std::max(1.0, std::fabs(ll));
        ll = next;
        if (change < options.tolerance) {
            result.converged = true;
            break;
        }
    }
    return result;
}

// -------------------------------------------------------------------------
//     MLE matching
// -------------------------------------------------------------------------

WeightMatrix::WeightMatrix(std::size_t n1, std::size_t n2, std::vector<MatchPair> pairs, std::vector<double> weights)
    : n1_(n1), n2_(n2) {
    if (pairs.size() != weights.size()) throw ValidationError("weight count does not match pair count");
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pairs[a] < pairs[b]; });
    for (auto k : order) {
        if (pairs[k].i >= n1 || pairs[k].j >= n2) throw ValidationError("weight pair out of range");
        if (!pairs_.empty() && pairs_.back() == pairs[k]) throw ValidationError("duplicate weight pair");
        if (std::isnan(weights[k]) || weights[k] == std::numeric_limits<double>::infinity()) {
            throw ValidationError("weights must be finite on candidate pairs");
        }
        pairs_.push_back(pairs[k]);
        weights_.push_back(weights[k]);
    }
}

WeightMatrix WeightMatrix::dense(const std::vector<std::vector<double>>& w) {
    const std::size_t n1 = w.size();
    const std::size_t n2 = n1 ? w[0].size() : 0;
    std::vector<MatchPair> pairs;
    std::vector<double> weights;
    for (std::size_t i = 0; i < n1; ++i) {
        if (w[i].size() != n2) throw ValidationError("ragged weight matrix");
        for (std::size_t j = 0; j < n2; ++j) {
            pairs.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)});
            weights.push_back(w[i][j]);
        }
    }
    return WeightMatrix(n1, n2, std::move(pairs), std::move(weights));
}

WeightMatrix WeightMatrix::from_comparison(const PhiParams& phi, const ComparisonData& data, double floor) {
    return WeightMatrix(data.n1(), data.n2(), data.pairs(), pair_weights(phi, data, floor));
}

double WeightMatrix::at(std::size_t i, std::size_t j) const {
    const MatchPair key{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    auto it = std::lower_bound(pairs_.begin(), pairs_.end(), key);
    if (it == pairs_.end() || *it != key) return kNegInf;
    return weights_[it - pairs_.begin()];
}

double matching_objective(const WeightMatrix& weights, const MatchingLabeling& z) {
    double total = 0.0;
    for (std::size_t j = 0; j < z.n2(); ++j) {
        if (auto i = z.match(j)) total += weights.at(*i, j);
    }
    return total;
}

namespace {

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

}  // namespace

MleResult mle_matching(const WeightMatrix& weights) {
    const std::size_t n1 = weights.n1();
    const std::size_t n2 = weights.n2();
    MleResult result{MatchingLabeling(n1, n2), 0.0};

    // Connected components over positive-weight pairs; nodes 0..n1-1 are file-1 records.
    std::vector<std::size_t> parent(n1 + n2);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    std::vector<std::size_t> positive;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights.weights()[k] <= 0.0) continue;
        positive.push_back(k);
        const auto& p = weights.pairs()[k];
        const auto a = find_root(parent, p.i), b = find_root(parent, n1 + p.j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::map<std::size_t, std::size_t> component_of_root;
    std::vector<std::vector<std::size_t>> component_pairs;
    for (auto k : positive) {
        const auto root = find_root(parent, weights.pairs()[k].i);
        auto [it, inserted] = component_of_root.emplace(root, component_pairs.size());
        if (inserted) component_pairs.emplace_back();
        component_pairs[it->second].push_back(k);
    }

    const auto C = static_cast<std::int64_t>(component_pairs.size());
    std::vector<std::vector<MatchPair>> links(C);
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t c = 0; c < C; ++c) {
        const auto& ks = component_pairs[c];
        std::vector<std::uint32_t> rows, cols;
        for (auto k : ks) {
            rows.push_back(weights.pairs()[k].j);
            cols.push_back(weights.pairs()[k].i);
        }
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        // Rows: file-2 records. Columns: file-1 records, then one zero-cost dummy per row.
        CostMatrix cost(rows.size(), cols.size() + rows.size(), kForbidden);
        for (auto k : ks) {
            const auto& p = weights.pairs()[k];
            const auto r = std::lower_bound(rows.begin(), rows.end(), p.j) - rows.begin();
            const auto col = std::lower_bound(cols.begin(), cols.end(), p.i) - cols.begin();
            cost(r, col) = -weights.weights()[k];
        }
        for (std::size_t r = 0; r < rows.size(); ++r) cost(r, cols.size() + r) = 0.0;
        const auto assignment = solve_lsap(cost);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const auto col = assignment.column_of_row[r];
            if (col < cols.size()) links[c].push_back({cols[col], rows[r]});
        }
    }
    for (const auto& comp : links) {
        for (const auto& p : comp) result.z.set_match(p.j, p.i);
    }
    result.objective = matching_objective(weights, result.z);
    return result;
}

// -------------------------------------------------------------------------
//     Fellegi-Sunter decision rule
// -------------------------------------------------------------------------

void FSRuleConfig::validate() const {
    if (!(mu > 0.0 && mu < 1.0)) throw ConfigError("mu must lie in (0,1)");
    if (!(lambda_fs > 0.0 && lambda_fs < 1.0)) throw ConfigError("lambda_fs must lie in (0,1)");
}

std::string_view to_string(FsDecision d) {
    switch (d) {
        case FsDecision::Link: return "link";
        case FsDecision::Review: return "review";
        case FsDecision::NonLink: return "non-link";
    }
    return "non-link";
}

namespace {

constexpr std::size_t kMaxConfigurations = 1'000'000;

struct WeightClass {
    double weight = 0.0;
    double m = 0.0;
    double u = 0.0;
};

std::vector<WeightClass> weight_classes(const PhiParams& phi, const std::vector<bool>& observed) {
    std::vector<std::size_t> fields;
    std::size_t total = 1;
    for (std::size_t f = 0; f < observed.size(); ++f) {
        if (!observed[f]) continue;
        fields.push_back(f);
        total *= phi.m[f].size();
        if (total > kMaxConfigurations) throw CapacityError("too many comparison configurations for the FS rule");
    }
    std::vector<WeightClass> configs;
    configs.reserve(total);
    std::vector<std::size_t> level(fields.size(), 0);
    for (std::size_t n = 0; n < total; ++n) {
        WeightClass c{0.0, 1.0, 1.0};
        for (std::size_t t = 0; t < fields.size(); ++t) {
            const auto f = fields[t];
            const double m = phi.m[f][level[t]], u = phi.u[f][level[t]];
            c.weight += std::log(std::max(m, kProbFloor)) - std::log(std::max(u, kProbFloor));
            c.m *= m;
            c.u *= u;
        }
        configs.push_back(c);
        for (std::size_t t = 0; t < fields.size(); ++t) {
            if (++level[t] < phi.m[fields[t]].size()) break;
            level[t] = 0;
        }
    }
    std::stable_sort(configs.begin(), configs.end(),
                     [](const WeightClass& a, const WeightClass& b) { return a.weight > b.weight; });
    // Configurations with equal weight are indistinguishable to the rule.
    std::vector<WeightClass> merged;
    for (const auto& c : configs) {
        if (!merged.empty() && std::fabs(merged.back().weight - c.weight) <= 1e-12 * std::max(1.0, std::fabs(c.weight))) {
            merged.back().m += c.m;
            merged.back().u += c.u;
        } else {
            merged.push_back(c);
        }
    }
    return merged;
}

}  // namespace

FsPatternThresholds fs_thresholds(const PhiParams& phi, const std::vector<bool>& observed, const FSRuleConfig& cfg) {
    cfg.validate();
    const auto classes = weight_classes(phi, observed);
    const std::size_t H = classes.size();
    FsPatternThresholds t;
    t.observed = observed;
    t.num_configurations = H;

    // h' = first class at which cumulative u-mass reaches mu; classes before it are linked.
    std::size_t h_link = H;
    double cum = 0.0;
    for (std::size_t h = 0; h < H; ++h) {
        cum += classes[h].u;
        if (cum >= cfg.mu) {
            h_link = h;
            break;
        }
    }
    // h'' = last class whose tail m-mass reaches lambda; classes after it are non-linked.
    std::size_t h_nonlink = 0;
    double tail = 0.0;
    for (std::size_t h = H; h-- > 0;) {
        tail += classes[h].m;
        if (tail >= cfg.lambda_fs) {
            h_nonlink = h;
            break;
        }
    }
    t.num_linked = h_link;
    t.first_nonlinked = std::max(h_nonlink + 1, h_link);
    t.link_weight = h_link < H ? classes[h_link].weight : -std::numeric_limits<double>::infinity();
    t.nonlink_weight = t.first_nonlinked < H ? classes[t.first_nonlinked - 1].weight
                                             : -std::numeric_limits<double>::infinity();
    if (t.first_nonlinked == 0) t.nonlink_weight = std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < H; ++h) {
        if (h < t.num_linked) t.achieved_mu += classes[h].u;
        else if (h >= t.first_nonlinked) t.achieved_lambda += classes[h].m;
    }
    return t;
}

FsRuleResult fs_decision_rule(const PhiParams& phi, const ComparisonData& data, const MatchingLabeling& matched,
                              const FSRuleConfig& cfg) {
    cfg.validate();
    phi.validate(data.fields(), 1e-9);
    if (matched.n1() != data.n1() || matched.n2() != data.n2()) throw ValidationError("matching size mismatch");

    FsRuleResult result;
    std::map<std::vector<bool>, std::size_t> threshold_index;
    for (std::uint32_t j = 0; j < data.n2(); ++j) {
        FsPairDecision d;
        d.j = j;
        d.i = matched.match(j);
        if (!d.i) {
            d.decision = FsDecision::NonLink;
            result.decisions.push_back(d);
            ++result.nonlinks;
            continue;
        }
        const auto k = data.find_pair(*d.i, j);
        if (!k) throw ValidationError("matched pair is not a candidate pair");
        const auto levels = data.pattern(data.pattern_of(*k));
        d.weight = composite_weight(phi, levels);
        std::vector<bool> observed(levels.size());
        for (std::size_t f = 0; f < levels.size(); ++f) observed[f] = levels[f] >= 0;
        auto [it, inserted] = threshold_index.emplace(observed, result.thresholds.size());
        if (inserted) result.thresholds.push_back(fs_thresholds(phi, observed, cfg));
        auto& t = result.thresholds[it->second];
        ++t.num_pairs;
        // Classes are identified by weight; linking wins where the regions overlap.
        const double tol = 4e-12 * std::max(1.0, std::fabs(d.weight));
        if (d.weight > t.link_weight + tol) {
            d.decision = FsDecision::Link;
            ++result.links;
        } else if (d.weight < t.nonlink_weight - tol) {
            d.decision = FsDecision::NonLink;
            ++result.nonlinks;
        } else {
            d.decision = FsDecision::Review;
            ++result.reviews;
        }
        result.decisions.push_back(d);
    }
    return result;
}

}  // namespace rlink
