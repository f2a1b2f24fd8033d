#pragma once

#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "rlink/beta_rl.hpp"
#include "rlink/comparison.hpp"
#include "rlink/core.hpp"
#include "rlink/estimators.hpp"
#include "rlink/evaluation.hpp"
#include "rlink/fs_mixture.hpp"

namespace rlink {

using Json = nlohmann::json;

inline constexpr const char* kVersion = "1.0.0";

/// Parses delimiter-separated text with double-quote escaping.
std::vector<std::vector<std::string>> parse_delimited(const std::string& text, char delimiter = ',');
std::string quote_field(const std::string& value, char delimiter = ',');

std::string read_text(const std::string& path);
/// Writes through a temporary file and renames it into place.
void write_text(const std::string& path, const std::string& text);

// -------------------------------------------------------------------------
//     Linkage configuration
// -------------------------------------------------------------------------

struct LinkageConfig {
    std::vector<FieldSchema> field_kinds;  // kinds of named fields; unlisted columns are strings
    std::vector<ComparatorSpec> comparators;
    std::optional<BlockingSpec> blocking;
    std::string missing_token;
    std::optional<std::string> id_column;
    char delimiter = ',';

    FieldKind kind_of(const std::string& name) const;
};

LinkageConfig parse_config(const Json& doc, const std::string& base_dir = ".");
LinkageConfig load_config(const std::string& path);
/// Configuration matching the synthetic generator's fields.
LinkageConfig synthetic_config();
Json config_to_json(const LinkageConfig& cfg);

std::shared_ptr<AdjacencyMap> load_adjacency(const std::string& path);

// -------------------------------------------------------------------------
//     Datafiles
// -------------------------------------------------------------------------

DataFile parse_datafile(const std::string& text, const LinkageConfig& cfg);
DataFile read_datafile(const std::string& path, const LinkageConfig& cfg);
std::string format_datafile(const DataFile& file, const LinkageConfig& cfg);
void write_datafile(const std::string& path, const DataFile& file, const LinkageConfig& cfg);

// -------------------------------------------------------------------------
//     Comparison data
// -------------------------------------------------------------------------

struct ComparisonFile {
    ComparisonData data;
    bool swapped = false;
};

/// "#" line with JSON metadata, header "i,j,<fields>", 1-based indices, NA for unobserved.
std::string format_comparison(const ComparisonData& data, bool swapped);
ComparisonFile parse_comparison(const std::string& text);
void write_comparison(const std::string& path, const ComparisonData& data, bool swapped);
ComparisonFile read_comparison(const std::string& path);

// -------------------------------------------------------------------------
//     Parameters, weights, posteriors, estimates
// -------------------------------------------------------------------------

Json phi_to_json(const PhiParams& phi, const std::vector<FieldLevels>& fields);
PhiParams phi_from_json(const Json& doc, const std::vector<FieldLevels>& fields);

std::string format_weights(const ComparisonData& data, const std::vector<double>& weights);

/// Pairwise probabilities as "i,j,prob" rows (1-based).
std::string format_posterior(const PosteriorSummary& posterior);
/// Reads pairwise probabilities; sizes come from the chain metadata.
PosteriorSummary parse_posterior(const std::string& text, std::size_t n1, std::size_t n2);
std::string format_overlap(const PosteriorSummary& posterior);
/// Retained draws, one line per draw with 1-based labels (n1 + j for unmatched).
std::string format_draws(const PosteriorSummary& posterior);
std::vector<std::vector<std::int32_t>> parse_draws(const std::string& text, std::size_t n1);
Json chain_to_json(const PosteriorSummary& posterior, const PriorConfig& prior);

/// Estimate rows in the user's orientation, with a header comment naming the estimator and losses.
std::string format_estimate(const LinkageEstimate& est, bool swapped);
struct EstimateFile {
    LinkageEstimate estimate;
    bool swapped = false;
};
EstimateFile parse_estimate(const std::string& text);

/// Truth file rows "j,z" with the 1-based label encoding.
std::string format_truth(const MatchingLabeling& z);
MatchingLabeling parse_truth(const std::string& text, std::size_t n1);

Json report_to_json(const EvalReport& r);
Json overlap_to_json(const OverlapSummary& s);

/// Writes "<out>.meta.json" describing a pipeline stage.
void write_meta(const std::string& out, const std::string& stage, Json details);

}  // namespace rlink
