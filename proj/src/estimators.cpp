#include "rlink/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "rlink/lsap.hpp"

namespace rlink {

void LossConfig::validate() const {
    if (!(lambda_10 > 0.0) || !(lambda_01 > 0.0) || !(lambda_11p > 0.0)) {
        throw ConfigError("losses must be positive");
    }
    if (lambda_R && !(*lambda_R > 0.0 && std::isfinite(*lambda_R))) {
        throw ConfigError("rejection loss must be positive and finite (omit it to disallow rejections)");
    }
}

std::optional<std::string> LossConfig::theorem1_violation() const {
    if (lambda_R) return "lambda_R must be infinite (no rejections)";
    if (!(lambda_10 <= lambda_01)) return "lambda_10 <= lambda_01 is violated";
    if (!(lambda_11p >= lambda_10 + lambda_01)) return "lambda_11' >= lambda_10 + lambda_01 is violated";
    return std::nullopt;
}

std::optional<std::string> LossConfig::theorem3_violation() const {
    if (!lambda_R) return "lambda_R must be finite";
    if (!(lambda_11p >= lambda_01)) return "lambda_11' >= lambda_01 is violated";
    if (!(lambda_01 >= 2.0 * *lambda_R)) return "lambda_01 >= 2 lambda_R is violated";
    if (!(lambda_10 >= 2.0 * *lambda_R)) return "lambda_10 >= 2 lambda_R is violated";
    return std::nullopt;
}

bool LossConfig::theorem1() const { return !theorem1_violation(); }
bool LossConfig::theorem3() const { return !theorem3_violation(); }

LossConfig LossConfig::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) parts.push_back(item);
    if (parts.size() < 3 || parts.size() > 4) {
        throw ConfigError("loss must be 'l10,l01,l11p[,lR]', got '" + text + "'");
    }
    auto number = [&](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("loss value '" + s + "' is not a number");
        }
    };
    LossConfig cfg;
    cfg.lambda_10 = number(parts[0]);
    cfg.lambda_01 = number(parts[1]);
    cfg.lambda_11p = number(parts[2]);
    if (parts.size() == 4 && parts[3] != "inf" && parts[3] != "Inf" && parts[3] != "") cfg.lambda_R = number(parts[3]);
    cfg.validate();
    return cfg;
}

namespace {

/// Shortest of 15 or 17 significant digits that reads back exactly.
std::string shortest(double x) {
    for (int digits : {15, 17}) {
        std::ostringstream out;
        out << std::setprecision(digits) << x;
        if (digits == 17 || std::stod(out.str()) == x) return out.str();
    }
    return {};
}

}  // namespace

std::string LossConfig::to_string() const {
    return shortest(lambda_10) + ',' + shortest(lambda_01) + ',' + shortest(lambda_11p) + ',' +
           (lambda_R ? shortest(*lambda_R) : std::string("inf"));
}

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::Link: return "link";
        case Decision::NonLink: return "non-link";
        case Decision::Reject: return "reject";
    }
    return "non-link";
}

std::size_t LinkageEstimate::count(Decision d) const {
    return static_cast<std::size_t>(
        std::count_if(entries.begin(), entries.end(), [d](const EstimateEntry& e) { return e.decision == d; }));
}

double LinkageEstimate::total_loss() const {
    double s = 0.0;
    for (const auto& e : entries) s += e.expected_loss;
    return s;
}

void LinkageEstimate::validate() const {
    std::vector<bool> used(n1, false);
    for (std::size_t j = 0; j < entries.size(); ++j) {
        const auto& e = entries[j];
        if (e.decision == Decision::Link) {
            if (!e.i || *e.i >= n1) throw ValidationError("link without a valid target for record " + std::to_string(j + 1));
            if (used[*e.i]) throw ValidationError("file-1 record " + std::to_string(*e.i + 1) + " linked twice");
            used[*e.i] = true;
        } else if (e.i) {
            throw ValidationError("non-link decision carries a target");
        }
        if (e.decision == Decision::Reject && !loss.lambda_R) {
            throw ValidationError("rejection present although rejections are disallowed");
        }
    }
}

bool LinkageEstimate::same_decisions(const LinkageEstimate& other) const {
    if (entries.size() != other.entries.size()) return false;
    for (std::size_t j = 0; j < entries.size(); ++j) {
        if (entries[j].decision != other.entries[j].decision || entries[j].i != other.entries[j].i) return false;
    }
    return true;
}

double expected_loss(std::size_t j, Decision decision, std::optional<std::uint32_t> i, const PosteriorSummary& posterior,
                     const LossConfig& cfg) {
    const double p_nm = posterior.nonmatch(j);
    switch (decision) {
        case Decision::Reject:
            if (!cfg.lambda_R) return std::numeric_limits<double>::infinity();
            return *cfg.lambda_R;
        case Decision::NonLink:
            return cfg.lambda_10 * (1.0 - p_nm);
        case Decision::Link: {
            if (!i) throw ValidationError("link decision needs a target");
            const double p_i = posterior.prob(*i, j);
            const double p_other = std::max(0.0, 1.0 - p_nm - p_i);
            return cfg.lambda_01 * p_nm + cfg.lambda_11p * p_other;
        }
    }
    return 0.0;
}

namespace {

void check_posterior(const PosteriorSummary& posterior) {
    if (posterior.max_row_sum() > 1.0 + 1e-9) {
        throw ValidationError(
            "posterior match probabilities of a file-1 record sum above 1; they do not come from a distribution "
            "over bipartite matchings");
    }
}

/// Most probable link target of j; lowest i among ties.
std::optional<PosteriorSummary::Entry> best_target(const PosteriorSummary& posterior, std::size_t j) {
    std::optional<PosteriorSummary::Entry> best;
    for (const auto& e : posterior.column(j)) {
        if (!best || e.prob > best->prob) best = e;
    }
    return best;
}

EstimateEntry make_entry(std::size_t j, Decision d, std::optional<std::uint32_t> i, const PosteriorSummary& posterior,
                         const LossConfig& cfg) {
    EstimateEntry e;
    e.decision = d;
    e.i = d == Decision::Link ? i : std::nullopt;
    e.prob = d == Decision::Link ? posterior.prob(*i, j) : posterior.nonmatch(j);
    e.expected_loss = expected_loss(j, d, e.i, posterior, cfg);
    return e;
}

}  // namespace

LinkageEstimate bayes_estimate_general(const PosteriorSummary& posterior, const LossConfig& cfg) {
    cfg.validate();
    check_posterior(posterior);
    const std::size_t n1 = posterior.n1(), n2 = posterior.n2();
    // Columns: n1 links, then n2 non-links, then n2 rejections (own column only).
    CostMatrix cost(n2, n1 + 2 * n2, kForbidden);
    for (std::size_t j = 0; j < n2; ++j) {
        for (std::size_t i = 0; i < n1; ++i) {
            cost(j, i) = expected_loss(j, Decision::Link, static_cast<std::uint32_t>(i), posterior, cfg);
        }
        cost(j, n1 + j) = expected_loss(j, Decision::NonLink, std::nullopt, posterior, cfg);
        if (cfg.lambda_R) cost(j, n1 + n2 + j) = *cfg.lambda_R;
    }
    const auto assignment = solve_lsap(cost);
    LinkageEstimate est{n1, {}, "general", cfg};
    for (std::size_t j = 0; j < n2; ++j) {
        const auto c = assignment.column_of_row[j];
        if (c < n1) est.entries.push_back(make_entry(j, Decision::Link, static_cast<std::uint32_t>(c), posterior, cfg));
        else if (c < n1 + n2) est.entries.push_back(make_entry(j, Decision::NonLink, std::nullopt, posterior, cfg));
        else est.entries.push_back(make_entry(j, Decision::Reject, std::nullopt, posterior, cfg));
    }
    est.validate();
    return est;
}

LinkageEstimate bayes_full(const PosteriorSummary& posterior, const LossConfig& cfg) {
    cfg.validate();
    if (auto v = cfg.theorem1_violation()) throw RegimeError("full estimate not available: " + *v);
    check_posterior(posterior);
    const double denom = cfg.lambda_01 + cfg.lambda_10;
    const double base = cfg.lambda_01 / denom;
    const double slope = (cfg.lambda_11p - cfg.lambda_01 - cfg.lambda_10) / denom;
    LinkageEstimate est{posterior.n1(), {}, "full", cfg};
    for (std::size_t j = 0; j < posterior.n2(); ++j) {
        const auto best = best_target(posterior, j);
        bool link = false;
        if (best) {
            const double p_other = std::max(0.0, 1.0 - posterior.nonmatch(j) - best->prob);
            link = best->prob > base + slope * p_other;
        }
        est.entries.push_back(link ? make_entry(j, Decision::Link, best->i, posterior, cfg)
                                   : make_entry(j, Decision::NonLink, std::nullopt, posterior, cfg));
    }
    est.validate();
    return est;
}

LinkageEstimate bayes_partial(const PosteriorSummary& posterior, const LossConfig& cfg) {
    cfg.validate();
    if (auto v = cfg.theorem3_violation()) throw RegimeError("partial estimate not available: " + *v);
    check_posterior(posterior);
    const double lr = *cfg.lambda_R;
    const double link_base = 1.0 - lr / cfg.lambda_01;
    const double slope = (cfg.lambda_11p - cfg.lambda_01) / cfg.lambda_01;
    const double nonlink_threshold = 1.0 - lr / cfg.lambda_10;
    LinkageEstimate est{posterior.n1(), {}, "partial", cfg};
    for (std::size_t j = 0; j < posterior.n2(); ++j) {
        const auto best = best_target(posterior, j);
        if (best) {
            const double p_other = std::max(0.0, 1.0 - posterior.nonmatch(j) - best->prob);
            if (best->prob > link_base + slope * p_other) {
                est.entries.push_back(make_entry(j, Decision::Link, best->i, posterior, cfg));
                continue;
            }
        }
        if (posterior.nonmatch(j) > nonlink_threshold) {
            est.entries.push_back(make_entry(j, Decision::NonLink, std::nullopt, posterior, cfg));
        } else {
            est.entries.push_back(make_entry(j, Decision::Reject, std::nullopt, posterior, cfg));
        }
    }
    est.validate();
    return est;
}

Crosstab crosstab(const LinkageEstimate& e1, const LinkageEstimate& e2) {
    if (e1.n2() != e2.n2()) throw ValidationError("estimates cover different numbers of records");
    Crosstab t;
    for (std::size_t j = 0; j < e1.n2(); ++j) {
        const auto a = static_cast<std::size_t>(e1.entries[j].decision);
        const auto b = static_cast<std::size_t>(e2.entries[j].decision);
        ++t.counts[a][b];
        if (e1.entries[j].decision == Decision::Link && e2.entries[j].decision == Decision::Link &&
            e1.entries[j].i == e2.entries[j].i) {
            ++t.same_target;
        }
    }
    return t;
}

std::string Crosstab::to_string(const std::string& name1, const std::string& name2) const {
    const char* labels[3] = {"link", "non-link", "reject"};
    std::ostringstream out;
    out << name1 << " \\ " << name2 << '\n';
    out << std::left << std::setw(10) << "";
    for (auto l : labels) out << std::right << std::setw(14) << l;
    out << '\n';
    for (std::size_t a = 0; a < 3; ++a) {
        out << std::left << std::setw(10) << labels[a];
        for (std::size_t b = 0; b < 3; ++b) {
            std::string cell = std::to_string(counts[a][b]);
            if (a == 0 && b == 0) cell += " [" + std::to_string(same_target) + "]";
            out << std::right << std::setw(14) << cell;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace rlink
