#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "rlink/comparison.hpp"
#include "rlink/core.hpp"
#include "rlink/fs_mixture.hpp"
#include "rlink/random.hpp"

namespace rlink {

/// Hyperparameters of the Bayesian model. Empty Dirichlet vectors mean all ones.
struct PriorConfig {
    double alpha_pi = 1.0;
    double beta_pi = 1.0;
    std::vector<std::vector<double>> alpha;  // match level pseudo-counts per field
    std::vector<std::vector<double>> beta;   // non-match level pseudo-counts per field
    bool flat_matching_prior = false;         // uniform prior over matchings instead of the beta prior

    /// Copy with Dirichlet vectors filled in for `fields`; throws ConfigError on bad shapes or values.
    PriorConfig resolved(const std::vector<FieldLevels>& fields) const;
};

/// Log prior of a matching with n12 links between files of sizes n1 and n2.
double prior_log_pmf(std::size_t n1, std::size_t n2, std::size_t n12, const PriorConfig& cfg);
double prior_log_pmf(const MatchingLabeling& z, const PriorConfig& cfg);

/// Level counts among matched (a) and unmatched (b) candidate pairs with the field observed.
struct SufficientStats {
    std::vector<std::vector<std::uint64_t>> a;
    std::vector<std::vector<std::uint64_t>> b;

    friend bool operator==(const SufficientStats&, const SufficientStats&) = default;
};

SufficientStats sufficient_stats(const ComparisonData& data, const MatchingLabeling& z);

/// Draws m_f ~ Dir(a_f + alpha_f), u_f ~ Dir(b_f + beta_f). `field_rngs` holds one stream per field.
PhiParams sample_phi(const SufficientStats& stats, const PriorConfig& cfg, std::span<Rng> field_rngs);

/// Full conditional of Z_j given the other labels: entry i < n1 is P(Z_j = i), the
/// last entry is P(unmatched). `pattern_w` holds one composite weight per pattern.
std::vector<double> label_conditional(std::size_t j, const MatchingLabeling& z, const ComparisonData& data,
                                      std::span<const double> pattern_w, const PriorConfig& cfg);

// -------------------------------------------------------------------------
//     Posterior summaries
// -------------------------------------------------------------------------

struct ChainInfo {
    std::size_t iterations = 0;
    std::size_t burn_in = 0;
    std::uint64_t seed = 0;
    std::size_t chains = 1;
    bool random_scan = false;
};

/// Pairwise match probabilities P(Z_j = i) and P(Z_j unmatched), plus optional draws.
class PosteriorSummary {
  public:
    struct Entry {
        std::uint32_t i = 0;
        double prob = 0.0;
    };

    PosteriorSummary() = default;

    /// From retained labelings (all of the same size).
    static PosteriorSummary from_samples(std::size_t n1, std::size_t n2, const std::vector<std::vector<std::int32_t>>& samples);
    /// From explicit (i, j, prob) entries; non-match probabilities are 1 minus the column sums.
    static PosteriorSummary from_probabilities(std::size_t n1, std::size_t n2, const std::vector<MatchPair>& pairs,
                                               const std::vector<double>& probs);

    std::size_t n1() const { return n1_; }
    std::size_t n2() const { return columns_.size(); }
    /// Nonzero entries for record j, ascending in i.
    std::span<const Entry> column(std::size_t j) const { return columns_[j]; }
    double prob(std::size_t i, std::size_t j) const;
    double nonmatch(std::size_t j) const { return nonmatch_[j]; }

    /// Retained draws: samples()[t][j] is the 0-based match of j or -1.
    const std::vector<std::vector<std::int32_t>>& samples() const { return samples_; }
    std::size_t num_samples() const { return num_samples_; }
    const std::vector<std::size_t>& overlap_samples() const { return overlap_; }
    const ChainInfo& chain() const { return chain_; }
    void set_chain(const ChainInfo& info) { chain_ = info; }
    void drop_samples() { samples_.clear(); }

    /// Largest row sum over i of P(Z_j = i).
    double max_row_sum() const;
    /// Throws ValidationError if any column fails to sum to 1 or any row sum exceeds 1 + tol.
    void validate(double tol = 1e-9) const;

  private:
    friend class PosteriorBuilder;

    std::size_t n1_ = 0;
    std::vector<std::vector<Entry>> columns_;
    std::vector<double> nonmatch_;
    std::vector<std::vector<std::int32_t>> samples_;
    std::vector<std::size_t> overlap_;
    std::size_t num_samples_ = 0;
    ChainInfo chain_;
};

// -------------------------------------------------------------------------
//     Gibbs sampler
// -------------------------------------------------------------------------

struct GibbsOptions {
    std::size_t iterations = 1000;
    std::size_t burn_in = 100;
    std::uint64_t seed = 1;
    std::size_t chains = 1;       // independent chains run in parallel and pooled
    bool random_scan = false;     // permute the sweep order every iteration
    bool keep_samples = true;
};

/// One Gibbs iteration state for a single chain.
class GibbsChain {
  public:
    GibbsChain(const ComparisonData& data, const PriorConfig& cfg, std::uint64_t seed, bool random_scan = false);

    /// Step 1 then step 2 of one iteration.
    void iterate();
    /// Draws Phi given the current labels.
    void update_phi();
    /// Resamples every label in sweep order given the current Phi.
    void sweep();

    MatchingLabeling labels() const;
    /// Raw labels: 0-based match of each file-2 record or -1.
    const std::vector<std::int32_t>& raw_labels() const { return match_; }
    /// Candidate pair index of each record's current match, or -1.
    const std::vector<std::int64_t>& matched_pairs() const { return pair_of_; }
    void set_labels(const MatchingLabeling& z);
    const PhiParams& phi() const { return phi_; }
    std::size_t overlap() const { return n12_; }

  private:
    void refresh_weights();
    void sample_label(std::size_t j);

    const ComparisonData& data_;
    PriorConfig cfg_;
    bool random_scan_;
    std::vector<Rng> field_rngs_;
    Rng label_rng_;
    std::vector<std::int32_t> match_;
    std::vector<std::int64_t> pair_of_;
    std::vector<std::int32_t> owner_;  // file-2 record holding each file-1 record, or -1
    std::size_t n12_ = 0;
    PhiParams phi_;
    std::vector<double> pattern_w_;
    std::vector<double> pattern_e_;  // exp(pattern_w_ - ref_)
    double ref_ = 0.0;
    std::vector<double> mass_;
    std::vector<std::uint32_t> order_;
};

PosteriorSummary run_gibbs(const ComparisonData& data, const PriorConfig& cfg, const GibbsOptions& options);

// -------------------------------------------------------------------------
//     Exact posterior by enumeration
// -------------------------------------------------------------------------

struct ExactPosterior {
    std::vector<MatchingLabeling> labelings;
    std::vector<double> probs;

    PosteriorSummary marginals() const;
};

/// Largest enumeration exact_posterior accepts.
inline constexpr std::size_t kMaxExactLabelings = 1'000'000;

/// Number of labelings with each Z_j in its candidate set or unmatched; saturates at limit + 1.
std::size_t count_labelings(const ComparisonData& data, std::size_t limit = kMaxExactLabelings);

/// Log of the unnormalized collapsed posterior of z (Phi integrated out).
double collapsed_log_posterior(const ComparisonData& data, const MatchingLabeling& z, const PriorConfig& cfg);

/// Exact posterior over all labelings; throws CapacityError above kMaxExactLabelings.
ExactPosterior exact_posterior(const ComparisonData& data, const PriorConfig& cfg);

/// Calls f on every labeling allowed by the candidate sets.
void for_each_labeling(const ComparisonData& data, const std::function<void(const MatchingLabeling&)>& f);

}  // namespace rlink
