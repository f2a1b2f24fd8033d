#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rlink/core.hpp"

namespace rlink {

enum class SimilarityKind {
    NormalizedLevenshtein,
    ModifiedLevenshtein,
    AbsoluteDifference,
    BinaryAgreement,
    Adjacency,
};

std::string_view to_string(SimilarityKind kind);
SimilarityKind similarity_kind_from_string(std::string_view s);

/// Symmetric region adjacency relation.
class AdjacencyMap {
  public:
    void add_edge(const std::string& a, const std::string& b);
    bool adjacent(const std::string& a, const std::string& b) const;
    std::size_t num_edges() const { return edges_.size(); }

  private:
    std::set<std::pair<std::string, std::string>> edges_;
};

/// 0 if equal, 1 if adjacent, 2 otherwise. Regions absent from the map are adjacent to nothing.
int adjacency_compare(const std::string& a, const std::string& b, const AdjacencyMap& adjacency);

/// How one field is compared and binned into disagreement levels.
///
/// Similarities are disagreement measures with minimum 0. `upper_bounds[l]` closes
/// interval l: level 0 is [0, b0], level l > 0 is (b_{l-1}, b_l]. A similarity above
/// the last bound is a configuration error (use +inf for open-ended last levels).
struct ComparatorSpec {
    std::string field;
    SimilarityKind kind = SimilarityKind::NormalizedLevenshtein;
    std::vector<double> upper_bounds;
    std::shared_ptr<const AdjacencyMap> adjacency;  // Adjacency kind only

    int num_levels() const { return static_cast<int>(upper_bounds.size()); }
    void validate() const;

    /// Levels 0 | (0,.25] | (.25,.5] | (.5,1] on a normalized edit distance.
    static ComparatorSpec levenshtein(std::string field, SimilarityKind kind = SimilarityKind::NormalizedLevenshtein);
    /// Agree | disagree.
    static ComparatorSpec binary(std::string field);
    /// Absolute difference with inclusive integer level cut points, e.g. {0, 1, 2} -> 0 | 1 | 2 | 3+.
    static ComparatorSpec absolute_difference(std::string field, std::vector<double> cuts);
    static ComparatorSpec region(std::string field, std::shared_ptr<const AdjacencyMap> adjacency);
};

struct FieldComparison {
    std::optional<int> level;  // present iff observed
    bool observed = false;
};

/// Disagreement measure of two present values.
double field_similarity(const ComparatorSpec& spec, const std::string& a, const std::string& b);

/// Interval index of a similarity value; throws ConfigError if it falls outside every interval.
int bin_similarity(const ComparatorSpec& spec, double similarity);

FieldComparison compare_field(const ComparatorSpec& spec, const std::optional<std::string>& a,
                              const std::optional<std::string>& b);

struct BlockingSpec {
    std::vector<std::string> fields;
};

struct FieldLevels {
    std::string name;
    int num_levels = 0;
};

struct Candidate {
    std::uint32_t i = 0;
    std::uint64_t pair = 0;
};

/// Comparison vectors for every candidate pair.
///
/// Pairs are stored i-major. Each pair points at a pattern: a distinct vector of
/// per-field levels where -1 marks an unobserved comparison. Likelihood code works
/// on patterns and never touches raw field values.
class ComparisonData {
  public:
    static constexpr std::int8_t kMissing = -1;

    ComparisonData() = default;

    /// Builds from explicit levels: `levels` holds pairs.size() * fields.size()
    /// entries, -1 for unobserved. Pairs must be unique; they are sorted i-major.
    static ComparisonData from_levels(std::size_t n1, std::size_t n2, std::vector<FieldLevels> fields,
                                      std::vector<MatchPair> pairs, const std::vector<std::int8_t>& levels);

    std::size_t n1() const { return n1_; }
    std::size_t n2() const { return n2_; }
    std::size_t num_fields() const { return fields_.size(); }
    const std::vector<FieldLevels>& fields() const { return fields_; }
    std::size_t num_pairs() const { return pairs_.size(); }
    MatchPair pair(std::size_t k) const { return pairs_[k]; }
    const std::vector<MatchPair>& pairs() const { return pairs_; }

    std::uint32_t pattern_of(std::size_t k) const { return pattern_of_pair_[k]; }
    std::size_t num_patterns() const { return pattern_counts_.size(); }
    std::span<const std::int8_t> pattern(std::size_t p) const {
        return {pattern_levels_.data() + p * fields_.size(), fields_.size()};
    }
    std::uint64_t pattern_count(std::size_t p) const { return pattern_counts_[p]; }

    /// Level of field f for pair k, -1 if unobserved.
    int level(std::size_t k, std::size_t f) const { return pattern(pattern_of(k))[f]; }

    /// Candidate file-1 records of file-2 record j, ascending in i.
    std::span<const Candidate> column(std::size_t j) const {
        return {col_entries_.data() + col_offsets_[j], col_entries_.data() + col_offsets_[j + 1]};
    }
    std::optional<std::uint64_t> find_pair(std::size_t i, std::size_t j) const;

    /// Number of pairs with field f observed at each level.
    const std::vector<std::uint64_t>& level_totals(std::size_t f) const { return level_totals_[f]; }

    /// Copy with an extra field that is unobserved for every pair.
    ComparisonData with_unobserved_field(const std::string& name, int num_levels) const;

    friend bool operator==(const ComparisonData& a, const ComparisonData& b);

  private:
    friend class ComparisonBuilder;

    std::size_t n1_ = 0;
    std::size_t n2_ = 0;
    std::vector<FieldLevels> fields_;
    std::vector<MatchPair> pairs_;
    std::vector<std::uint32_t> pattern_of_pair_;
    std::vector<std::int8_t> pattern_levels_;
    std::vector<std::uint64_t> pattern_counts_;
    std::vector<std::uint64_t> col_offsets_;
    std::vector<Candidate> col_entries_;
    std::vector<std::vector<std::uint64_t>> level_totals_;
};

/// Candidate pairs (all n1*n2, or within-block pairs) with parallel field comparison.
ComparisonData build_comparison_data(const DataFile& f1, const DataFile& f2, const std::vector<ComparatorSpec>& specs,
                                     const std::optional<BlockingSpec>& blocking = std::nullopt);

/// Single-threaded reference for build_comparison_data; must produce identical output.
ComparisonData build_comparison_data_serial(const DataFile& f1, const DataFile& f2,
                                            const std::vector<ComparatorSpec>& specs,
                                            const std::optional<BlockingSpec>& blocking = std::nullopt);

/// Candidate pairs only (i-major), after blocking. Records with a missing key pair with nothing.
std::vector<MatchPair> candidate_pairs(const DataFile& f1, const DataFile& f2,
                                       const std::optional<BlockingSpec>& blocking);

}  // namespace rlink
