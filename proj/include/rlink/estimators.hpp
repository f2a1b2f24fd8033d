#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rlink/beta_rl.hpp"

namespace rlink {

/// Additive loss. `lambda_R` empty means rejection is not allowed.
struct LossConfig {
    double lambda_10 = 1.0;   // false non-match
    double lambda_01 = 1.0;   // false match, true non-match
    double lambda_11p = 2.0;  // false match, true match elsewhere
    std::optional<double> lambda_R;

    void validate() const;
    /// lambda_R infinite, lambda_10 <= lambda_01 and lambda_11p >= lambda_10 + lambda_01.
    bool theorem1() const;
    /// lambda_11p >= lambda_01 >= 2 lambda_R > 0 and lambda_10 >= 2 lambda_R.
    bool theorem3() const;
    /// Violated full-estimate constraint, or empty when in regime.
    std::optional<std::string> theorem1_violation() const;
    std::optional<std::string> theorem3_violation() const;

    /// "l10,l01,l11p,lR" with lR a number, "inf" or absent.
    static LossConfig parse(const std::string& text);
    std::string to_string() const;
};

enum class Decision { Link, NonLink, Reject };
std::string_view to_string(Decision d);

struct EstimateEntry {
    Decision decision = Decision::NonLink;
    std::optional<std::uint32_t> i;  // link target
    double prob = 0.0;               // P(Z_j = i) for links, P(Z_j unmatched) otherwise
    double expected_loss = 0.0;
};

struct LinkageEstimate {
    std::size_t n1 = 0;
    std::vector<EstimateEntry> entries;  // one per file-2 record
    std::string estimator;
    LossConfig loss;

    std::size_t n2() const { return entries.size(); }
    std::size_t count(Decision d) const;
    double total_loss() const;
    /// Throws ValidationError on repeated link targets or rejections without a rejection loss.
    void validate() const;
    /// Same decisions and targets.
    bool same_decisions(const LinkageEstimate& other) const;
};

/// Posterior expected loss of one decision for record j.
double expected_loss(std::size_t j, Decision decision, std::optional<std::uint32_t> i, const PosteriorSummary& posterior,
                     const LossConfig& cfg);

/// Minimum expected loss over all one-to-one decision vectors, via linear sum assignment.
LinkageEstimate bayes_estimate_general(const PosteriorSummary& posterior, const LossConfig& cfg);

/// Closed-form full estimate; throws RegimeError outside its loss regime.
LinkageEstimate bayes_full(const PosteriorSummary& posterior, const LossConfig& cfg);

/// Closed-form partial estimate with rejections; throws RegimeError outside its loss regime.
LinkageEstimate bayes_partial(const PosteriorSummary& posterior, const LossConfig& cfg);

/// Cross-tabulation of two estimates: counts[a][b] for decisions a, b in Link/NonLink/Reject
/// order, with the number of link-link records sharing a target.
struct Crosstab {
    std::array<std::array<std::size_t, 3>, 3> counts{};
    std::size_t same_target = 0;

    std::string to_string(const std::string& name1, const std::string& name2) const;
};

Crosstab crosstab(const LinkageEstimate& e1, const LinkageEstimate& e2);

}  // namespace rlink
