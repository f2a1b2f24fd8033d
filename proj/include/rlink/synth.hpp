#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rlink/comparison.hpp"
#include "rlink/core.hpp"
#include "rlink/random.hpp"

namespace rlink {

enum class CorruptionKind { Missing, Edit, Ocr, Keyboard, Phonetic };
std::string_view to_string(CorruptionKind k);

/// Fields of a synthetic record.
enum class SynthField { GivenName, FamilyName, Age, Occupation };
inline constexpr std::size_t kNumSynthFields = 4;
std::string_view field_name(SynthField f);

/// Names may receive edit, OCR, keyboard and phonetic errors; age and occupation
/// may go missing or receive keyboard errors.
bool applicable(CorruptionKind kind, SynthField field);
std::vector<CorruptionKind> applicable_kinds(SynthField field);

struct GeneratorConfig {
    std::size_t records_per_file = 500;
    double overlap = 1.0;                  // fraction of file-2 records with a match in file 1
    std::size_t erroneous_fields = 1;      // fields in error per distorted record
    std::size_t max_errors_per_field = 3;  // corruption applications per erroneous field: uniform on 1..max
    double distorted_fraction = 1.0;       // share of file-2 records that get distorted
    std::uint64_t seed = 1;

    void validate() const;
    std::size_t num_matches() const;
};

struct SyntheticPair {
    DataFile file1;
    DataFile file2;
    MatchingLabeling truth;
    /// Corruption applications per file-2 record and field.
    std::vector<std::array<std::uint8_t, kNumSynthFields>> error_counts;
};

/// Applies one corruption. Returns nullopt for Missing. Throws ConfigError for an
/// inapplicable kind/field combination. OCR, keyboard and phonetic fall back to an
/// edit when no character of the value qualifies.
std::optional<std::string> corrupt_value(CorruptionKind kind, SynthField field, const std::string& value, Rng& rng);

/// Keys adjacent to c on a QWERTY keyboard (lowercase letters and digits; empty if unknown).
std::string keyboard_neighbors(char c);

SyntheticPair generate_pair(const GeneratorConfig& cfg);

/// Comparators used for synthetic data: Levenshtein levels for names, agree/disagree otherwise.
std::vector<ComparatorSpec> synthetic_comparators();

}  // namespace rlink
