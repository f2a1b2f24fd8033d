#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlink/comparison.hpp"
#include "rlink/core.hpp"

namespace rlink {

/// Lower bound on m and u entries in EM and in FS weights.
inline constexpr double kProbFloor = 1e-6;

/// Level probabilities for matches (m) and non-matches (u), per field.
struct PhiParams {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> u;
    std::optional<double> p;  // mixture proportion of matches

    std::size_t num_fields() const { return m.size(); }
    /// Throws ValidationError unless shapes match `fields` and every vector is a distribution.
    void validate(const std::vector<FieldLevels>& fields, double tol = 1e-12) const;

    static PhiParams uniform(const std::vector<FieldLevels>& fields);
    /// m with 0.9 on level 0 and the rest spread evenly, u uniform, p = 0.1.
    static PhiParams em_default(const std::vector<FieldLevels>& fields);
};

/// Sum over observed fields of log(m/u). Entries are clamped below at `floor`.
double composite_weight(const PhiParams& phi, std::span<const std::int8_t> levels, double floor = kProbFloor);

/// One weight per comparison pattern.
std::vector<double> pattern_weights(const PhiParams& phi, const ComparisonData& data, double floor = kProbFloor);

/// One weight per candidate pair (parallel over pairs).
std::vector<double> pair_weights(const PhiParams& phi, const ComparisonData& data, double floor = kProbFloor);
std::vector<double> pair_weights_serial(const PhiParams& phi, const ComparisonData& data,
                                        double floor = kProbFloor);

// -------------------------------------------------------------------------
//     EM
// -------------------------------------------------------------------------

struct EmOptions {
    std::size_t max_iterations = 1000;
    double tolerance = 1e-8;  // relative change in log-likelihood
    double floor = kProbFloor;
};

struct EmResult {
    PhiParams phi;
    std::vector<double> log_likelihood;  // entry t is the value at the parameters after t updates
    std::size_t iterations = 0;
    bool converged = false;
    bool degenerate = false;  // a single comparison pattern: mixture not identifiable
};

/// Observed-data log-likelihood of the two-component mixture.
double mixture_log_likelihood(const PhiParams& phi, const ComparisonData& data);

/// Posterior match probability of each comparison pattern under the mixture.
std::vector<double> pattern_match_probabilities(const PhiParams& phi, const ComparisonData& data);

EmResult em_fit(const ComparisonData& data, const std::optional<PhiParams>& init = std::nullopt,
                const EmOptions& options = {});

/// Maximizes sum n_l log m_l over the simplex with m_l >= floor.
std::vector<double> floored_proportions(const std::vector<double>& counts, double floor);

// -------------------------------------------------------------------------
//     MLE matching
// -------------------------------------------------------------------------

/// Log-likelihood-ratio weights on candidate pairs; other pairs are -inf.
class WeightMatrix {
  public:
    WeightMatrix() = default;
    WeightMatrix(std::size_t n1, std::size_t n2, std::vector<MatchPair> pairs, std::vector<double> weights);

    /// Dense weights indexed w[i][j]; every pair is a candidate.
    static WeightMatrix dense(const std::vector<std::vector<double>>& w);
    static WeightMatrix from_comparison(const PhiParams& phi, const ComparisonData& data, double floor = kProbFloor);

    std::size_t n1() const { return n1_; }
    std::size_t n2() const { return n2_; }
    std::size_t size() const { return pairs_.size(); }
    const std::vector<MatchPair>& pairs() const { return pairs_; }
    const std::vector<double>& weights() const { return weights_; }
    /// Weight of (i, j); -inf when not a candidate.
    double at(std::size_t i, std::size_t j) const;

  private:
    std::size_t n1_ = 0;
    std::size_t n2_ = 0;
    std::vector<MatchPair> pairs_;  // sorted
    std::vector<double> weights_;
};

struct MleResult {
    MatchingLabeling z;
    double objective = 0.0;
};

/// Maximum-weight bipartite matching; non-positive weights are never linked.
MleResult mle_matching(const WeightMatrix& weights);

/// Sum of weights over the links of z.
double matching_objective(const WeightMatrix& weights, const MatchingLabeling& z);

// -------------------------------------------------------------------------
//     Fellegi-Sunter decision rule
// -------------------------------------------------------------------------

struct FSRuleConfig {
    double mu = 0.0025;       // admissible false-link rate
    double lambda_fs = 0.005;  // admissible false-non-link rate
    void validate() const;
};

enum class FsDecision { Link, Review, NonLink };
std::string_view to_string(FsDecision d);

/// Thresholds for one missingness pattern (set of observed fields).
struct FsPatternThresholds {
    std::vector<bool> observed;
    std::size_t num_configurations = 0;  // distinct weights after merging ties
    std::size_t num_linked = 0;          // leading weight classes that are linked
    std::size_t first_nonlinked = 0;     // weight classes at or after this index are non-linked
    double link_weight = 0.0;            // weights strictly above this are linked
    double nonlink_weight = 0.0;         // weights strictly below this are non-linked
    double achieved_mu = 0.0;            // u-mass of the link region
    double achieved_lambda = 0.0;        // m-mass of the non-link region
    std::size_t num_pairs = 0;
};

struct FsPairDecision {
    std::uint32_t j = 0;
    std::optional<std::uint32_t> i;  // absent when the MLE leaves j unmatched
    FsDecision decision = FsDecision::NonLink;
    double weight = 0.0;
};

struct FsRuleResult {
    std::vector<FsPairDecision> decisions;  // one per file-2 record
    std::vector<FsPatternThresholds> thresholds;
    std::size_t links = 0, reviews = 0, nonlinks = 0;
    double review_rate() const { return decisions.empty() ? 0.0 : double(reviews) / double(decisions.size()); }
};

/// Three-way rule applied to the pairs matched by `matched`. Records the MLE leaves
/// unmatched are non-links.
FsRuleResult fs_decision_rule(const PhiParams& phi, const ComparisonData& data, const MatchingLabeling& matched,
                              const FSRuleConfig& cfg);

/// Thresholds for one observed-field mask; configuration weights use the floored Phi.
FsPatternThresholds fs_thresholds(const PhiParams& phi, const std::vector<bool>& observed, const FSRuleConfig& cfg);

}  // namespace rlink
