#include "rlink/core.hpp"

#include <algorithm>
#include <utility>

namespace rlink {

std::string_view to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::String: return "string";
        case FieldKind::Categorical: return "categorical";
        case FieldKind::Integer: return "integer";
        case FieldKind::DatePart: return "date-part";
    }
    return "string";
}

FieldKind field_kind_from_string(std::string_view s) {
    if (s == "string") return FieldKind::String;
    if (s == "categorical") return FieldKind::Categorical;
    if (s == "integer") return FieldKind::Integer;
    if (s == "date-part") return FieldKind::DatePart;
    throw ConfigError("unknown field kind '" + std::string(s) + "'");
}

DataFile::DataFile(std::vector<FieldSchema> schema, std::vector<Record> records)
    : schema_(std::move(schema)), records_(std::move(records)) {
    for (std::size_t a = 0; a < schema_.size(); ++a) {
        for (std::size_t b = a + 1; b < schema_.size(); ++b) {
            if (schema_[a].name == schema_[b].name) {
                throw ValidationError("duplicate field name '" + schema_[a].name + "'");
            }
        }
    }
    std::vector<std::string_view> ids;
    ids.reserve(records_.size());
    for (std::size_t r = 0; r < records_.size(); ++r) {
        if (records_[r].values.size() != schema_.size()) {
            throw ValidationError("record " + std::to_string(r + 1) + " has " +
                                  std::to_string(records_[r].values.size()) + " values, schema has " +
                                  std::to_string(schema_.size()));
        }
        if (records_[r].id.empty()) records_[r].id = std::to_string(r + 1);
        ids.push_back(records_[r].id);
    }
    std::sort(ids.begin(), ids.end());
    if (auto it = std::adjacent_find(ids.begin(), ids.end()); it != ids.end()) {
        throw ValidationError("duplicate record id '" + std::string(*it) + "'");
    }
}

std::optional<std::size_t> DataFile::field_index(std::string_view name) const {
    for (std::size_t f = 0; f < schema_.size(); ++f) {
        if (schema_[f].name == name) return f;
    }
    return std::nullopt;
}

std::size_t DataFile::require_field(std::string_view name) const {
    auto f = field_index(name);
    if (!f) throw ConfigError("unknown field '" + std::string(name) + "'");
    return *f;
}

FilePair orient_files(DataFile first, DataFile second) {
    if (first.size() >= second.size()) return {std::move(first), std::move(second), false};
    return {std::move(second), std::move(first), true};
}

// -------------------------------------------------------------------------
//     MatchingLabeling
// -------------------------------------------------------------------------

MatchingLabeling::MatchingLabeling(std::size_t n1, std::size_t n2) : n1_(n1), match_(n2, -1) {}

MatchingLabeling MatchingLabeling::from_labels(std::size_t n1, const std::vector<std::size_t>& labels) {
    MatchingLabeling z(n1, labels.size());
    for (std::size_t j = 0; j < labels.size(); ++j) {
        const std::size_t label = labels[j];
        if (label >= 1 && label <= n1) {
            z.match_[j] = static_cast<std::int32_t>(label - 1);
        } else if (label != n1 + j + 1) {
            throw ValidationError("label " + std::to_string(label) + " of record " + std::to_string(j + 1) +
                                  " is neither in 1.." + std::to_string(n1) + " nor its own sentinel " +
                                  std::to_string(n1 + j + 1));
        }
    }
    z.validate();
    return z;
}

MatchingLabeling MatchingLabeling::from_matches(std::size_t n1,
                                                const std::vector<std::optional<std::uint32_t>>& matches) {
    MatchingLabeling z(n1, matches.size());
    for (std::size_t j = 0; j < matches.size(); ++j) {
        if (matches[j]) {
            if (*matches[j] >= n1) throw ValidationError("match target out of range");
            z.match_[j] = static_cast<std::int32_t>(*matches[j]);
        }
    }
    z.validate();
    return z;
}

void MatchingLabeling::set_match(std::size_t j, std::optional<std::uint32_t> i) {
    if (i) {
        if (*i >= n1_) throw ValidationError("match target out of range");
        for (std::size_t k = 0; k < match_.size(); ++k) {
            if (k != j && match_[k] == static_cast<std::int32_t>(*i)) {
                throw ValidationError("file-1 record " + std::to_string(*i + 1) + " already matched");
            }
        }
        match_[j] = static_cast<std::int32_t>(*i);
    } else {
        match_[j] = -1;
    }
}

std::vector<std::size_t> MatchingLabeling::labels() const {
    std::vector<std::size_t> out(match_.size());
    for (std::size_t j = 0; j < match_.size(); ++j) {
        out[j] = match_[j] >= 0 ? static_cast<std::size_t>(match_[j]) + 1 : n1_ + j + 1;
    }
    return out;
}

std::size_t MatchingLabeling::overlap_size() const {
    return static_cast<std::size_t>(std::count_if(match_.begin(), match_.end(), [](auto m) { return m >= 0; }));
}

void MatchingLabeling::validate() const {
    std::vector<char> taken(n1_, 0);
    for (std::size_t j = 0; j < match_.size(); ++j) {
        const auto m = match_[j];
        if (m < 0) continue;
        if (static_cast<std::size_t>(m) >= n1_) throw ValidationError("match target out of range");
        if (taken[m]) {
            throw ValidationError("file-1 record " + std::to_string(m + 1) + " is the target of two labels");
        }
        taken[m] = 1;
    }
}

// -------------------------------------------------------------------------
//     MatchingMatrix
// -------------------------------------------------------------------------

MatchingMatrix::MatchingMatrix(std::size_t n1, std::size_t n2, std::vector<MatchPair> pairs)
    : n1_(n1), n2_(n2), pairs_(std::move(pairs)) {
    std::sort(pairs_.begin(), pairs_.end());
    std::vector<char> row(n1_, 0), col(n2_, 0);
    for (const auto& p : pairs_) {
        if (p.i >= n1_ || p.j >= n2_) throw ValidationError("matching matrix entry out of range");
        if (row[p.i]++) throw ValidationError("row " + std::to_string(p.i + 1) + " has two ones");
        if (col[p.j]++) throw ValidationError("column " + std::to_string(p.j + 1) + " has two ones");
    }
}

bool MatchingMatrix::entry(std::size_t i, std::size_t j) const {
    const MatchPair key{static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j)};
    return std::binary_search(pairs_.begin(), pairs_.end(), key);
}

MatchingMatrix labeling_to_matrix(const MatchingLabeling& z) {
    z.validate();
    std::vector<MatchPair> pairs;
    for (std::size_t j = 0; j < z.n2(); ++j) {
        if (auto i = z.match(j)) pairs.push_back({*i, static_cast<std::uint32_t>(j)});
    }
    return MatchingMatrix(z.n1(), z.n2(), std::move(pairs));
}

MatchingLabeling matrix_to_labeling(const MatchingMatrix& d) {
    std::vector<std::optional<std::uint32_t>> matches(d.n2());
    for (const auto& p : d.pairs()) matches[p.j] = p.i;
    return MatchingLabeling::from_matches(d.n1(), matches);
}

std::size_t overlap_size(const MatchingLabeling& z) { return z.overlap_size(); }

}  // namespace rlink
