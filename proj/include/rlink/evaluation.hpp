#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlink/beta_rl.hpp"
#include "rlink/estimators.hpp"

namespace rlink {

/// Accuracy of an estimate against the true labeling. Ratios with empty denominators are absent.
struct EvalReport {
    std::size_t n2 = 0;
    std::size_t true_matches = 0;
    std::size_t links = 0;
    std::size_t correct_links = 0;
    std::size_t nonlinks = 0;
    std::size_t correct_nonlinks = 0;
    std::size_t rejections = 0;

    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> ppv;
    std::optional<double> npv;
    std::optional<double> rejection_rate;
};

/// Precision and recall of a full estimate; throws ValidationError if it has rejections.
EvalReport score_full(const MatchingLabeling& truth, const LinkageEstimate& est);
/// PPV, NPV and rejection rate (precision and recall are filled in too).
EvalReport score_partial(const MatchingLabeling& truth, const LinkageEstimate& est);

/// Estimate from a labeling: matched records are links, the rest non-links.
LinkageEstimate estimate_from_labeling(const MatchingLabeling& z, std::string name = "labeling");

/// Spectral density at frequency zero of a series, Tukey-Hanning lag window with
/// truncation lag max(1, ceil(0.04 n)).
double spectral_density_zero(std::span<const double> x);

/// Geweke convergence z-score comparing the first and last fractions of a chain.
/// Absent when both segments are constant with equal means; +-inf when both are
/// constant with different means. Throws ValidationError for chains shorter than 100.
std::optional<double> geweke_z(std::span<const double> chain, double first_frac = 0.1, double last_frac = 0.5);

enum class QuantileType {
    InverseCdf,  // smallest sample value with empirical CDF >= q
    Linear,      // linear interpolation between order statistics
};

std::string_view to_string(QuantileType t);

/// Quantile of a sorted sample.
double quantile(std::span<const double> sorted, double q, QuantileType type = QuantileType::InverseCdf);

struct IntervalSummary {
    double mean = 0.0;
    double median = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct OverlapSummary {
    double level = 0.9;
    QuantileType convention = QuantileType::InverseCdf;
    IntervalSummary overlap;     // n12
    IntervalSummary proportion;  // n12 / n2
    IntervalSummary union_size;  // n1 + n2 - n12
};

IntervalSummary summarize(std::vector<double> samples, double level, QuantileType type = QuantileType::InverseCdf);

OverlapSummary overlap_summary(const PosteriorSummary& posterior, double level = 0.9,
                               QuantileType type = QuantileType::InverseCdf);

/// Geweke z-scores of the 0/1 matching-status chains of every (i, j) that is not constant.
struct PairDiagnostic {
    MatchPair pair;
    double z = 0.0;
};
std::vector<PairDiagnostic> geweke_pair_statuses(const PosteriorSummary& posterior, double first_frac = 0.1,
                                                 double last_frac = 0.5);

}  // namespace rlink
