#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rlink {

// -------------------------------------------------------------------------
//     Errors
// -------------------------------------------------------------------------

/// Input violates a structural invariant (bad labeling, bad matrix, bad record).
class ValidationError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Configuration cannot be honoured (unknown field, bad thresholds, ...).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Loss configuration outside the regime an estimator requires.
class RegimeError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Problem too large for an exhaustive routine.
class CapacityError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// -------------------------------------------------------------------------
//     Datafiles
// -------------------------------------------------------------------------

enum class FieldKind { String, Categorical, Integer, DatePart };

std::string_view to_string(FieldKind kind);
FieldKind field_kind_from_string(std::string_view s);

struct FieldSchema {
    std::string name;
    FieldKind kind = FieldKind::String;
};

struct Record {
    std::string id;                                  // user id column, or 1-based position
    std::vector<std::optional<std::string>> values;  // one slot per schema field
};

class DataFile {
  public:
    DataFile() = default;
    DataFile(std::vector<FieldSchema> schema, std::vector<Record> records);

    std::size_t size() const { return records_.size(); }
    std::size_t num_fields() const { return schema_.size(); }
    const std::vector<FieldSchema>& schema() const { return schema_; }
    const std::vector<Record>& records() const { return records_; }
    const Record& record(std::size_t i) const { return records_.at(i); }

    /// Index of the named field; nullopt if absent.
    std::optional<std::size_t> field_index(std::string_view name) const;
    std::size_t require_field(std::string_view name) const;

    const std::optional<std::string>& value(std::size_t record, std::size_t field) const {
        return records_[record].values[field];
    }

  private:
    std::vector<FieldSchema> schema_;
    std::vector<Record> records_;
};

/// Two datafiles in canonical orientation (file1.size() >= file2.size()).
struct FilePair {
    DataFile file1;
    DataFile file2;
    bool swapped = false;  // true when the user's second file became file1
};

FilePair orient_files(DataFile first, DataFile second);

// -------------------------------------------------------------------------
//     Bipartite matchings
// -------------------------------------------------------------------------

struct MatchPair {
    std::uint32_t i = 0;  // file-1 record, 0-based
    std::uint32_t j = 0;  // file-2 record, 0-based

    friend bool operator==(const MatchPair&, const MatchPair&) = default;
    friend auto operator<=>(const MatchPair&, const MatchPair&) = default;
};

class MatchingMatrix;

/// One label per file-2 record: its file-1 match or "unmatched".
///
/// Stored 0-based with `std::nullopt` for unmatched records. `labels()` and
/// `from_labels()` use the 1-based encoding {1..n1} U {n1+j} where record j
/// (1-based) is unmatched iff its label is n1+j.
class MatchingLabeling {
  public:
    MatchingLabeling() = default;
    /// Empty matching.
    MatchingLabeling(std::size_t n1, std::size_t n2);

    static MatchingLabeling from_labels(std::size_t n1, const std::vector<std::size_t>& labels);
    static MatchingLabeling from_matches(std::size_t n1,
                                         const std::vector<std::optional<std::uint32_t>>& matches);

    std::size_t n1() const { return n1_; }
    std::size_t n2() const { return match_.size(); }

    std::optional<std::uint32_t> match(std::size_t j) const {
        return match_[j] < 0 ? std::nullopt : std::optional<std::uint32_t>(match_[j]);
    }
    bool is_matched(std::size_t j) const { return match_[j] >= 0; }
    /// Raw 0-based target or -1.
    std::int32_t raw(std::size_t j) const { return match_[j]; }

    /// Sets record j's match; throws ValidationError when i is already taken by another record.
    void set_match(std::size_t j, std::optional<std::uint32_t> i);

    std::vector<std::size_t> labels() const;
    std::size_t overlap_size() const;

    /// Throws ValidationError on a repeated target.
    void validate() const;

    friend bool operator==(const MatchingLabeling&, const MatchingLabeling&) = default;

  private:
    std::size_t n1_ = 0;
    std::vector<std::int32_t> match_;
};

class MatchingMatrix {
  public:
    MatchingMatrix() = default;
    MatchingMatrix(std::size_t n1, std::size_t n2, std::vector<MatchPair> pairs);

    std::size_t n1() const { return n1_; }
    std::size_t n2() const { return n2_; }
    /// Sorted by (i, j).
    const std::vector<MatchPair>& pairs() const { return pairs_; }
    bool entry(std::size_t i, std::size_t j) const;

    friend bool operator==(const MatchingMatrix&, const MatchingMatrix&) = default;

  private:
    std::size_t n1_ = 0;
    std::size_t n2_ = 0;
    std::vector<MatchPair> pairs_;
};

MatchingMatrix labeling_to_matrix(const MatchingLabeling& z);
MatchingLabeling matrix_to_labeling(const MatchingMatrix& d);
std::size_t overlap_size(const MatchingLabeling& z);

}  // namespace rlink
