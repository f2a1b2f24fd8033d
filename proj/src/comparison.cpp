#include "rlink/comparison.hpp"

#include <omp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <unordered_map>

#include "rlink/strings.hpp"

namespace rlink {

std::string_view to_string(SimilarityKind kind) {
    switch (kind) {
        case SimilarityKind::NormalizedLevenshtein: return "normalized-levenshtein";
        case SimilarityKind::ModifiedLevenshtein: return "modified-levenshtein";
        case SimilarityKind::AbsoluteDifference: return "absolute-difference";
        case SimilarityKind::BinaryAgreement: return "binary-agreement";
        case SimilarityKind::Adjacency: return "adjacency";
    }
    return "normalized-levenshtein";
}

SimilarityKind similarity_kind_from_string(std::string_view s) {
    if (s == "normalized-levenshtein" || s == "levenshtein") return SimilarityKind::NormalizedLevenshtein;
    if (s == "modified-levenshtein") return SimilarityKind::ModifiedLevenshtein;
    if (s == "absolute-difference") return SimilarityKind::AbsoluteDifference;
    if (s == "binary-agreement" || s == "binary") return SimilarityKind::BinaryAgreement;
    if (s == "adjacency") return SimilarityKind::Adjacency;
    throw ConfigError("unknown comparator '" + std::string(s) + "'");
}

void AdjacencyMap::add_edge(const std::string& a, const std::string& b) {
    if (a == b) return;
    edges_.insert(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
}

bool AdjacencyMap::adjacent(const std::string& a, const std::string& b) const {
    return edges_.count(a < b ? std::make_pair(a, b) : std::make_pair(b, a)) > 0;
}

int adjacency_compare(const std::string& a, const std::string& b, const AdjacencyMap& adjacency) {
    if (a == b) return 0;
    return adjacency.adjacent(a, b) ? 1 : 2;
}

// -------------------------------------------------------------------------
//     ComparatorSpec
// -------------------------------------------------------------------------

void ComparatorSpec::validate() const {
    const std::string where = "comparator for field '" + field + "': ";
    if (upper_bounds.size() < 2) throw ConfigError(where + "needs at least two levels");
    if (upper_bounds.size() > 100) throw ConfigError(where + "too many levels");
    if (!(upper_bounds.front() >= 0.0)) throw ConfigError(where + "level 0 must contain the agreement value 0");
    for (std::size_t l = 1; l < upper_bounds.size(); ++l) {
        if (!(upper_bounds[l] > upper_bounds[l - 1])) throw ConfigError(where + "thresholds must strictly increase");
    }
    if (kind == SimilarityKind::Adjacency && upper_bounds.size() != 3) {
        throw ConfigError(where + "adjacency comparisons have exactly three levels");
    }
}

ComparatorSpec ComparatorSpec::levenshtein(std::string field, SimilarityKind kind) {
    return {std::move(field), kind, {0.0, 0.25, 0.5, 1.0}, nullptr};
}

ComparatorSpec ComparatorSpec::binary(std::string field) {
    return {std::move(field), SimilarityKind::BinaryAgreement, {0.0, 1.0}, nullptr};
}

ComparatorSpec ComparatorSpec::absolute_difference(std::string field, std::vector<double> cuts) {
    cuts.push_back(std::numeric_limits<double>::infinity());
    return {std::move(field), SimilarityKind::AbsoluteDifference, std::move(cuts), nullptr};
}

ComparatorSpec ComparatorSpec::region(std::string field, std::shared_ptr<const AdjacencyMap> adjacency) {
    return {std::move(field), SimilarityKind::Adjacency, {0.0, 1.0, 2.0}, std::move(adjacency)};
}

namespace {

double parse_number(const std::string& s, const std::string& field) {
    double value = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && *first == ' ') ++first;
    while (last > first && last[-1] == ' ') --last;
    if (first < last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw ValidationError("field '" + field + "': value '" + s + "' is not numeric");
    }
    return value;
}

}  // namespace

double field_similarity(const ComparatorSpec& spec, const std::string& a, const std::string& b) {
    switch (spec.kind) {
        case SimilarityKind::NormalizedLevenshtein: return normalized_levenshtein(a, b);
        case SimilarityKind::ModifiedLevenshtein: return modified_levenshtein(a, b);
        case SimilarityKind::AbsoluteDifference: return std::fabs(parse_number(a, spec.field) - parse_number(b, spec.field));
        case SimilarityKind::BinaryAgreement: return a == b ? 0.0 : 1.0;
        case SimilarityKind::Adjacency: {
            static const AdjacencyMap empty;
            return adjacency_compare(a, b, spec.adjacency ? *spec.adjacency : empty);
        }
    }
    return 0.0;
}

int bin_similarity(const ComparatorSpec& spec, double similarity) {
    if (similarity >= 0.0) {
        for (std::size_t l = 0; l < spec.upper_bounds.size(); ++l) {
            if (similarity <= spec.upper_bounds[l]) return static_cast<int>(l);
        }
    }
    throw ConfigError("field '" + spec.field + "': similarity " + std::to_string(similarity) +
                      " lies outside the configured intervals");
}

FieldComparison compare_field(const ComparatorSpec& spec, const std::optional<std::string>& a,
                              const std::optional<std::string>& b) {
    if (!a || !b) return {};
    return {bin_similarity(spec, field_similarity(spec, *a, *b)), true};
}

// -------------------------------------------------------------------------
//     ComparisonData
// -------------------------------------------------------------------------

class ComparisonBuilder {
  public:
    /// Mixed-radix pattern key: digit f is level+1 (0 = unobserved).
    static std::vector<std::uint64_t> radices(const std::vector<FieldLevels>& fields) {
        std::vector<std::uint64_t> mult(fields.size());
        std::uint64_t m = 1;
        for (std::size_t f = 0; f < fields.size(); ++f) {
            mult[f] = m;
            const auto radix = static_cast<std::uint64_t>(fields[f].num_levels) + 1;
            if (m > std::numeric_limits<std::uint64_t>::max() / radix) {
                throw CapacityError("too many comparison fields/levels to encode patterns");
            }
            m *= radix;
        }
        mult.push_back(m);  // total key space
        return mult;
    }

    /// Assigns pattern ids in ascending key order from per-pair keys.
    static void assign_patterns(ComparisonData& d, const std::vector<std::uint64_t>& keys,
                                const std::vector<std::uint64_t>& mult, bool parallel) {
        const std::size_t n = keys.size();
        const std::uint64_t space = mult.back();
        std::vector<std::uint64_t> unique_keys;
        d.pattern_of_pair_.assign(n, 0);

        if (!parallel) {
            std::map<std::uint64_t, std::uint64_t> counts;
            for (auto k : keys) ++counts[k];
            std::map<std::uint64_t, std::uint32_t> id;
            for (const auto& [k, c] : counts) {
                id.emplace(k, static_cast<std::uint32_t>(unique_keys.size()));
                unique_keys.push_back(k);
                d.pattern_counts_.push_back(c);
            }
            for (std::size_t k = 0; k < n; ++k) d.pattern_of_pair_[k] = id[keys[k]];
        } else if (space <= (std::uint64_t{1} << 22)) {
            // Dense histogram reduced across threads.
            std::vector<std::uint64_t> hist(space, 0);
#pragma omp parallel
            {
                std::vector<std::uint64_t> local(space, 0);
#pragma omp for schedule(static) nowait
                for (std::size_t k = 0; k < n; ++k) ++local[keys[k]];
#pragma omp critical(rlink_pattern_hist)
                for (std::uint64_t s = 0; s < space; ++s) hist[s] += local[s];
            }
            std::vector<std::uint32_t> id(space, 0);
            for (std::uint64_t s = 0; s < space; ++s) {
                if (hist[s] == 0) continue;
                id[s] = static_cast<std::uint32_t>(unique_keys.size());
                unique_keys.push_back(s);
                d.pattern_counts_.push_back(hist[s]);
            }
#pragma omp parallel for schedule(static)
            for (std::size_t k = 0; k < n; ++k) d.pattern_of_pair_[k] = id[keys[k]];
        } else {
            unique_keys = keys;
            std::sort(unique_keys.begin(), unique_keys.end());
            unique_keys.erase(std::unique(unique_keys.begin(), unique_keys.end()), unique_keys.end());
            d.pattern_counts_.assign(unique_keys.size(), 0);
#pragma omp parallel for schedule(static)
            for (std::size_t k = 0; k < n; ++k) {
                d.pattern_of_pair_[k] = static_cast<std::uint32_t>(
                    std::lower_bound(unique_keys.begin(), unique_keys.end(), keys[k]) - unique_keys.begin());
            }
            for (std::size_t k = 0; k < n; ++k) ++d.pattern_counts_[d.pattern_of_pair_[k]];
        }

        const std::size_t F = d.fields_.size();
        d.pattern_levels_.assign(unique_keys.size() * F, ComparisonData::kMissing);
        for (std::size_t p = 0; p < unique_keys.size(); ++p) {
            for (std::size_t f = 0; f < F; ++f) {
                const auto digit = (unique_keys[p] / mult[f]) % (static_cast<std::uint64_t>(d.fields_[f].num_levels) + 1);
                d.pattern_levels_[p * F + f] = static_cast<std::int8_t>(static_cast<int>(digit) - 1);
            }
        }
    }

    static void index_columns(ComparisonData& d) {
        d.col_offsets_.assign(d.n2_ + 1, 0);
        for (const auto& p : d.pairs_) ++d.col_offsets_[p.j + 1];
        std::partial_sum(d.col_offsets_.begin(), d.col_offsets_.end(), d.col_offsets_.begin());
        d.col_entries_.assign(d.pairs_.size(), {});
        std::vector<std::uint64_t> fill(d.col_offsets_.begin(), d.col_offsets_.end() - 1);
        for (std::uint64_t k = 0; k < d.pairs_.size(); ++k) {
            const auto& p = d.pairs_[k];
            d.col_entries_[fill[p.j]++] = {p.i, k};
        }
    }

    static void tally_levels(ComparisonData& d) {
        const std::size_t F = d.fields_.size();
        d.level_totals_.assign(F, {});
        for (std::size_t f = 0; f < F; ++f) d.level_totals_[f].assign(d.fields_[f].num_levels, 0);
        for (std::size_t p = 0; p < d.pattern_counts_.size(); ++p) {
            for (std::size_t f = 0; f < F; ++f) {
                const int l = d.pattern_levels_[p * F + f];
                if (l >= 0) d.level_totals_[f][l] += d.pattern_counts_[p];
            }
        }
    }

    static ComparisonData finish(std::size_t n1, std::size_t n2, std::vector<FieldLevels> fields,
                                 std::vector<MatchPair> pairs, const std::vector<std::uint64_t>& keys, bool parallel) {
        ComparisonData d;
        d.n1_ = n1;
        d.n2_ = n2;
        d.fields_ = std::move(fields);
        d.pairs_ = std::move(pairs);
        assign_patterns(d, keys, radices(d.fields_), parallel);
        index_columns(d);
        tally_levels(d);
        return d;
    }
};

ComparisonData ComparisonData::from_levels(std::size_t n1, std::size_t n2, std::vector<FieldLevels> fields,
                                           std::vector<MatchPair> pairs, const std::vector<std::int8_t>& levels) {
    const std::size_t F = fields.size();
    if (levels.size() != pairs.size() * F) throw ValidationError("levels size does not match pairs x fields");
    for (const auto& f : fields) {
        if (f.num_levels < 1 || f.num_levels > 100) throw ConfigError("field '" + f.name + "' has invalid level count");
    }
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pairs[a] < pairs[b]; });

    const auto mult = ComparisonBuilder::radices(fields);
    std::vector<MatchPair> sorted(pairs.size());
    std::vector<std::uint64_t> keys(pairs.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto src = order[k];
        sorted[k] = pairs[src];
        if (sorted[k].i >= n1 || sorted[k].j >= n2) throw ValidationError("pair index out of range");
        if (k > 0 && sorted[k] == sorted[k - 1]) throw ValidationError("duplicate pair");
        std::uint64_t key = 0;
        for (std::size_t f = 0; f < F; ++f) {
            const int l = levels[src * F + f];
            if (l < -1 || l >= fields[f].num_levels) throw ValidationError("level out of range");
            key += static_cast<std::uint64_t>(l + 1) * mult[f];
        }
        keys[k] = key;
    }
    return ComparisonBuilder::finish(n1, n2, std::move(fields), std::move(sorted), keys, false);
}

std::optional<std::uint64_t> ComparisonData::find_pair(std::size_t i, std::size_t j) const {
    if (j >= n2_) return std::nullopt;
    auto col = column(j);
    auto it = std::lower_bound(col.begin(), col.end(), i, [](const Candidate& c, std::size_t v) { return c.i < v; });
    if (it == col.end() || it->i != i) return std::nullopt;
    return it->pair;
}

ComparisonData ComparisonData::with_unobserved_field(const std::string& name, int num_levels) const {
    ComparisonData d = *this;
    const std::size_t F = fields_.size();
    d.fields_.push_back({name, num_levels});
    ComparisonBuilder::radices(d.fields_);  // capacity check
    d.pattern_levels_.clear();
    for (std::size_t p = 0; p < num_patterns(); ++p) {
        for (std::size_t f = 0; f < F; ++f) d.pattern_levels_.push_back(pattern_levels_[p * F + f]);
        d.pattern_levels_.push_back(kMissing);
    }
    d.level_totals_.push_back(std::vector<std::uint64_t>(num_levels, 0));
    return d;
}

bool operator==(const ComparisonData& a, const ComparisonData& b) {
    if (a.n1_ != b.n1_ || a.n2_ != b.n2_ || a.fields_.size() != b.fields_.size()) return false;
    for (std::size_t f = 0; f < a.fields_.size(); ++f) {
        if (a.fields_[f].name != b.fields_[f].name || a.fields_[f].num_levels != b.fields_[f].num_levels) return false;
    }
    return a.pairs_ == b.pairs_ && a.pattern_of_pair_ == b.pattern_of_pair_ && a.pattern_levels_ == b.pattern_levels_ &&
           a.pattern_counts_ == b.pattern_counts_ && a.col_offsets_ == b.col_offsets_ &&
           a.level_totals_ == b.level_totals_;
}

// -------------------------------------------------------------------------
//     Candidate pairs and building
// -------------------------------------------------------------------------

namespace {

std::optional<std::string> block_key(const DataFile& file, std::size_t r, const std::vector<std::size_t>& fields) {
    std::string key;
    for (auto f : fields) {
        const auto& v = file.value(r, f);
        if (!v) return std::nullopt;
        key += *v;
        key += '\x1f';
    }
    return key;
}

struct ResolvedSpecs {
    std::vector<FieldLevels> fields;
    std::vector<std::size_t> col1, col2;
};

ResolvedSpecs resolve(const DataFile& f1, const DataFile& f2, const std::vector<ComparatorSpec>& specs) {
    if (specs.empty()) throw ConfigError("no comparison fields configured");
    ResolvedSpecs r;
    for (const auto& s : specs) {
        s.validate();
        r.col1.push_back(f1.require_field(s.field));
        r.col2.push_back(f2.require_field(s.field));
        r.fields.push_back({s.field, s.num_levels()});
    }
    return r;
}

}  // namespace

std::vector<MatchPair> candidate_pairs(const DataFile& f1, const DataFile& f2,
                                       const std::optional<BlockingSpec>& blocking) {
    std::vector<MatchPair> pairs;
    const auto n1 = static_cast<std::uint32_t>(f1.size());
    const auto n2 = static_cast<std::uint32_t>(f2.size());
    if (!blocking || blocking->fields.empty()) {
        pairs.reserve(static_cast<std::size_t>(n1) * n2);
        for (std::uint32_t i = 0; i < n1; ++i) {
            for (std::uint32_t j = 0; j < n2; ++j) pairs.push_back({i, j});
        }
        return pairs;
    }
    std::vector<std::size_t> k1, k2;
    for (const auto& name : blocking->fields) {
        k1.push_back(f1.require_field(name));
        k2.push_back(f2.require_field(name));
    }
    std::unordered_map<std::string, std::vector<std::uint32_t>> blocks;
    for (std::uint32_t j = 0; j < n2; ++j) {
        if (auto key = block_key(f2, j, k2)) blocks[*key].push_back(j);
    }
    for (std::uint32_t i = 0; i < n1; ++i) {
        auto key = block_key(f1, i, k1);
        if (!key) continue;
        auto it = blocks.find(*key);
        if (it == blocks.end()) continue;
        for (auto j : it->second) pairs.push_back({i, j});
    }
    return pairs;
}

ComparisonData build_comparison_data_serial(const DataFile& f1, const DataFile& f2,
                                            const std::vector<ComparatorSpec>& specs,
                                            const std::optional<BlockingSpec>& blocking) {
    auto r = resolve(f1, f2, specs);
    auto pairs = candidate_pairs(f1, f2, blocking);
    if (pairs.empty()) throw ValidationError("empty candidate set");
    const auto mult = ComparisonBuilder::radices(r.fields);
    std::vector<std::uint64_t> keys(pairs.size(), 0);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        for (std::size_t f = 0; f < specs.size(); ++f) {
            const auto c = compare_field(specs[f], f1.value(pairs[k].i, r.col1[f]), f2.value(pairs[k].j, r.col2[f]));
            if (c.observed) keys[k] += static_cast<std::uint64_t>(*c.level + 1) * mult[f];
        }
    }
    return ComparisonBuilder::finish(f1.size(), f2.size(), std::move(r.fields), std::move(pairs), keys, false);
}

namespace {

/// Distinct values of one field, with per-record ids (-1 for missing).
struct Interned {
    std::vector<std::string> values;
    std::vector<std::int32_t> id_of_record;
};

Interned intern(const DataFile& file, std::size_t col) {
    Interned out;
    std::unordered_map<std::string, std::int32_t> ids;
    out.id_of_record.resize(file.size(), -1);
    for (std::size_t r = 0; r < file.size(); ++r) {
        const auto& v = file.value(r, col);
        if (!v) continue;
        auto [it, inserted] = ids.emplace(*v, static_cast<std::int32_t>(out.values.size()));
        if (inserted) out.values.push_back(*v);
        out.id_of_record[r] = it->second;
    }
    return out;
}

class FirstError {
  public:
    void capture() {
        std::lock_guard lock(mutex_);
        if (!error_) error_ = std::current_exception();
    }
    void rethrow() const {
        if (error_) std::rethrow_exception(error_);
    }

  private:
    std::mutex mutex_;
    std::exception_ptr error_;
};

}  // namespace

ComparisonData build_comparison_data(const DataFile& f1, const DataFile& f2, const std::vector<ComparatorSpec>& specs,
                                     const std::optional<BlockingSpec>& blocking) {
    auto r = resolve(f1, f2, specs);
    auto pairs = candidate_pairs(f1, f2, blocking);
    if (pairs.empty()) throw ValidationError("empty candidate set");
    const auto mult = ComparisonBuilder::radices(r.fields);
    const std::size_t n = pairs.size();
    std::vector<std::uint64_t> keys(n, 0);
    FirstError error;

    for (std::size_t f = 0; f < specs.size(); ++f) {
        const auto a = intern(f1, r.col1[f]);
        const auto b = intern(f2, r.col2[f]);
        const std::size_t na = a.values.size();
        const std::size_t nb = b.values.size();
        // Memoize over distinct value pairs when that is cheaper than comparing every pair.
        const bool memo = na * nb <= n;
        std::vector<std::int8_t> table;
        if (memo) {
            table.assign(na * nb, 0);
#pragma omp parallel for schedule(dynamic, 16)
            for (std::size_t x = 0; x < na; ++x) {
                try {
                    for (std::size_t y = 0; y < nb; ++y) {
                        table[x * nb + y] = static_cast<std::int8_t>(
                            bin_similarity(specs[f], field_similarity(specs[f], a.values[x], b.values[y])));
                    }
                } catch (...) {
                    error.capture();
                }
            }
            error.rethrow();
        }
#pragma omp parallel for schedule(static)
        for (std::size_t k = 0; k < n; ++k) {
            try {
                const auto x = a.id_of_record[pairs[k].i];
                const auto y = b.id_of_record[pairs[k].j];
                if (x < 0 || y < 0) continue;
                const int level = memo ? table[static_cast<std::size_t>(x) * nb + y]
                                       : bin_similarity(specs[f], field_similarity(specs[f], a.values[x], b.values[y]));
                keys[k] += static_cast<std::uint64_t>(level + 1) * mult[f];
            } catch (...) {
                error.capture();
            }
        }
        error.rethrow();
    }
    return ComparisonBuilder::finish(f1.size(), f2.size(), std::move(r.fields), std::move(pairs), keys, true);
}

}  // namespace rlink
