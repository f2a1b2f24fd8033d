#include "rlink/io.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace rlink {

namespace fs = std::filesystem;

namespace {

std::string fmt(double x) {
    std::ostringstream out;
    out << std::setprecision(17) << x;
    return out.str();
}

std::size_t parse_index(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ValidationError(what + ": '" + s + "' is not a non-negative integer");
    }
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(what + ": '" + s + "' is not a number");
    }
}

/// Splits off leading "#" comment lines.
std::pair<std::vector<std::string>, std::string> split_comments(const std::string& text) {
    std::vector<std::string> comments;
    std::size_t pos = 0;
    while (pos < text.size() && text[pos] == '#') {
        auto end = text.find('\n', pos);
        if (end == std::string::npos) end = text.size();
        comments.push_back(text.substr(pos + 1, end - pos - 1));
        pos = end + 1;
    }
    return {comments, pos < text.size() ? text.substr(pos) : std::string()};
}

}  // namespace

std::vector<std::vector<std::string>> parse_delimited(const std::string& text, char delimiter) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false, any = false;
    for (std::size_t k = 0; k < text.size(); ++k) {
        const char c = text[k];
        if (quoted) {
            if (c == '"') {
                if (k + 1 < text.size() && text[k + 1] == '"') {
                    field += '"';
                    ++k;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"') {
            quoted = true;
            any = true;
        } else if (c == delimiter) {
            row.push_back(std::move(field));
            field.clear();
            any = true;
        } else if (c == '\n' || c == '\r') {
            if (c == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
            if (any || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            row.clear();
            field.clear();
            any = false;
        } else {
            field += c;
            any = true;
        }
    }
    if (quoted) throw ValidationError("unterminated quoted field");
    if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::string quote_field(const std::string& value, char delimiter) {
    if (value.find_first_of(std::string("\"\r\n") + delimiter) == std::string::npos) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    const auto tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write '" + path + "'");
        out << text;
        if (!out) throw std::runtime_error("write failed for '" + path + "'");
    }
    fs::rename(tmp, path);
}

// -------------------------------------------------------------------------
//     Configuration
// -------------------------------------------------------------------------

FieldKind LinkageConfig::kind_of(const std::string& name) const {
    for (const auto& f : field_kinds) {
        if (f.name == name) return f.kind;
    }
    return FieldKind::String;
}

std::shared_ptr<AdjacencyMap> load_adjacency(const std::string& path) {
    auto map = std::make_shared<AdjacencyMap>();
    for (const auto& row : parse_delimited(read_text(path))) {
        if (row.size() < 2 || (!row[0].empty() && row[0][0] == '#')) continue;
        map->add_edge(row[0], row[1]);
    }
    return map;
}

namespace {

std::vector<double> default_bounds(SimilarityKind kind) {
    switch (kind) {
        case SimilarityKind::NormalizedLevenshtein:
        case SimilarityKind::ModifiedLevenshtein: return {0.0, 0.25, 0.5, 1.0};
        case SimilarityKind::AbsoluteDifference: return {0.0, 1.0, 2.0, std::numeric_limits<double>::infinity()};
        case SimilarityKind::BinaryAgreement: return {0.0, 1.0};
        case SimilarityKind::Adjacency: return {0.0, 1.0, 2.0};
    }
    return {};
}

double bound_from_json(const Json& v) {
    if (v.is_null()) return std::numeric_limits<double>::infinity();
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s == "inf" || s == "Inf" || s == "infinity") return std::numeric_limits<double>::infinity();
        throw ConfigError("threshold '" + s + "' is not a number");
    }
    if (!v.is_number()) throw ConfigError("thresholds must be numbers");
    return v.get<double>();
}

}  // namespace

LinkageConfig parse_config(const Json& doc, const std::string& base_dir) {
    LinkageConfig cfg;
    try {
        cfg.missing_token = doc.value("missing_token", std::string());
        if (doc.contains("id_column") && !doc["id_column"].is_null()) cfg.id_column = doc["id_column"].get<std::string>();
        const auto delim = doc.value("delimiter", std::string(","));
        if (delim.size() != 1) throw ConfigError("delimiter must be a single character");
        cfg.delimiter = delim[0];

        std::shared_ptr<AdjacencyMap> adjacency;
        if (doc.contains("adjacency_file")) {
            auto p = fs::path(doc["adjacency_file"].get<std::string>());
            if (p.is_relative()) p = fs::path(base_dir) / p;
            adjacency = load_adjacency(p.string());
        }
        if (!doc.contains("fields") || !doc["fields"].is_array() || doc["fields"].empty()) {
            throw ConfigError("configuration needs a non-empty 'fields' list");
        }
        for (const auto& f : doc["fields"]) {
            const auto name = f.at("name").get<std::string>();
            const auto kind = field_kind_from_string(f.value("kind", std::string("string")));
            cfg.field_kinds.push_back({name, kind});
            if (!f.value("compare", true)) continue;
            std::string default_cmp = kind == FieldKind::String ? "normalized-levenshtein" : "binary-agreement";
            ComparatorSpec spec;
            spec.field = name;
            spec.kind = similarity_kind_from_string(f.value("comparator", default_cmp));
            if (f.contains("thresholds")) {
                for (const auto& b : f["thresholds"]) spec.upper_bounds.push_back(bound_from_json(b));
            } else {
                spec.upper_bounds = default_bounds(spec.kind);
            }
            if (spec.kind == SimilarityKind::Adjacency) {
                if (!adjacency) throw ConfigError("field '" + name + "' uses adjacency but no adjacency_file is given");
                spec.adjacency = adjacency;
            }
            spec.validate();
            cfg.comparators.push_back(std::move(spec));
        }
        if (cfg.comparators.empty()) throw ConfigError("no field is compared");
        if (doc.contains("blocking") && !doc["blocking"].empty()) {
            cfg.blocking = BlockingSpec{doc["blocking"].get<std::vector<std::string>>()};
        }
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    return cfg;
}

LinkageConfig load_config(const std::string& path) {
    Json doc;
    try {
        doc = Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
        throw ConfigError("configuration '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, fs::path(path).parent_path().string().empty() ? "." : fs::path(path).parent_path().string());
}

LinkageConfig synthetic_config() {
    LinkageConfig cfg;
    cfg.field_kinds = {{"given_name", FieldKind::String},
                       {"family_name", FieldKind::String},
                       {"age", FieldKind::Categorical},
                       {"occupation", FieldKind::Categorical}};
    cfg.comparators = {ComparatorSpec::levenshtein("given_name"), ComparatorSpec::levenshtein("family_name"),
                       ComparatorSpec::binary("age"), ComparatorSpec::binary("occupation")};
    return cfg;
}

Json config_to_json(const LinkageConfig& cfg) {
    Json doc;
    doc["missing_token"] = cfg.missing_token;
    if (cfg.id_column) doc["id_column"] = *cfg.id_column;
    doc["delimiter"] = std::string(1, cfg.delimiter);
    Json fields = Json::array();
    for (const auto& f : cfg.field_kinds) {
        Json jf{{"name", f.name}, {"kind", std::string(to_string(f.kind))}};
        bool compared = false;
        for (const auto& c : cfg.comparators) {
            if (c.field != f.name) continue;
            compared = true;
            jf["comparator"] = std::string(to_string(c.kind));
            Json bounds = Json::array();
            for (double b : c.upper_bounds) bounds.push_back(std::isinf(b) ? Json("inf") : Json(b));
            jf["thresholds"] = bounds;
        }
        if (!compared) jf["compare"] = false;
        fields.push_back(jf);
    }
    doc["fields"] = fields;
    if (cfg.blocking) doc["blocking"] = cfg.blocking->fields;
    return doc;
}

// -------------------------------------------------------------------------
//     Datafiles
// -------------------------------------------------------------------------

DataFile parse_datafile(const std::string& text, const LinkageConfig& cfg) {
    auto rows = parse_delimited(text, cfg.delimiter);
    if (rows.empty()) throw ValidationError("datafile has no header row");
    const auto& header = rows[0];
    std::optional<std::size_t> id_col;
    std::vector<FieldSchema> schema;
    std::vector<std::size_t> cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (cfg.id_column && header[c] == *cfg.id_column) {
            id_col = c;
            continue;
        }
        schema.push_back({header[c], cfg.kind_of(header[c])});
        cols.push_back(c);
    }
    if (cfg.id_column && !id_col) throw ConfigError("id column '" + *cfg.id_column + "' not in header");
    std::vector<Record> records;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw ValidationError("row " + std::to_string(r + 1) + " has " + std::to_string(row.size()) +
                                  " values, header has " + std::to_string(header.size()));
        }
        Record rec;
        if (id_col) rec.id = row[*id_col];
        for (auto c : cols) {
            if (row[c] == cfg.missing_token) rec.values.emplace_back(std::nullopt);
            else rec.values.emplace_back(row[c]);
        }
        records.push_back(std::move(rec));
    }
    return DataFile(std::move(schema), std::move(records));
}

DataFile read_datafile(const std::string& path, const LinkageConfig& cfg) {
    try {
        return parse_datafile(read_text(path), cfg);
    } catch (const ValidationError& e) {
        throw ValidationError("'" + path + "': " + e.what());
    }
}

std::string format_datafile(const DataFile& file, const LinkageConfig& cfg) {
    std::ostringstream out;
    const char d = cfg.delimiter;
    const std::string id_name = cfg.id_column.value_or("");
    if (cfg.id_column) out << quote_field(id_name, d);
    for (std::size_t f = 0; f < file.num_fields(); ++f) {
        if (f > 0 || cfg.id_column) out << d;
        out << quote_field(file.schema()[f].name, d);
    }
    out << '\n';
    for (const auto& rec : file.records()) {
        if (cfg.id_column) out << quote_field(rec.id, d);
        for (std::size_t f = 0; f < rec.values.size(); ++f) {
            if (f > 0 || cfg.id_column) out << d;
            out << quote_field(rec.values[f].value_or(cfg.missing_token), d);
        }
        out << '\n';
    }
    return out.str();
}

void write_datafile(const std::string& path, const DataFile& file, const LinkageConfig& cfg) {
    write_text(path, format_datafile(file, cfg));
}

// -------------------------------------------------------------------------
//     Comparison data
// -------------------------------------------------------------------------

std::string format_comparison(const ComparisonData& data, bool swapped) {
    Json meta{{"n1", data.n1()}, {"n2", data.n2()}, {"swapped", swapped}};
    Json fields = Json::array();
    for (const auto& f : data.fields()) fields.push_back({{"name", f.name}, {"levels", f.num_levels}});
    meta["fields"] = fields;
    std::string out = "#" + meta.dump() + "\ni,j";
    for (const auto& f : data.fields()) out += "," + quote_field(f.name);
    out += '\n';
    out.reserve(out.size() + data.num_pairs() * (12 + 2 * data.num_fields()));
    for (std::size_t k = 0; k < data.num_pairs(); ++k) {
        const auto p = data.pair(k);
        out += std::to_string(p.i + 1);
        out += ',';
        out += std::to_string(p.j + 1);
        for (auto l : data.pattern(data.pattern_of(k))) {
            out += ',';
            if (l < 0) out += "NA";
            else out += std::to_string(l);
        }
        out += '\n';
    }
    return out;
}

ComparisonFile parse_comparison(const std::string& text) {
    auto [comments, body] = split_comments(text);
    if (comments.empty()) throw ValidationError("comparison file lacks its metadata line");
    Json meta;
    try {
        meta = Json::parse(comments[0]);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("comparison metadata is not valid JSON: ") + e.what());
    }
    const std::size_t n1 = meta.at("n1").get<std::size_t>();
    const std::size_t n2 = meta.at("n2").get<std::size_t>();
    std::vector<FieldLevels> fields;
    for (const auto& f : meta.at("fields")) fields.push_back({f.at("name").get<std::string>(), f.at("levels").get<int>()});
    const auto rows = parse_delimited(body);
    if (rows.empty()) throw ValidationError("comparison file has no header");
    const std::size_t F = fields.size();
    std::vector<MatchPair> pairs;
    std::vector<std::int8_t> levels;
    pairs.reserve(rows.size());
    levels.reserve(rows.size() * F);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 2 + F) throw ValidationError("comparison row " + std::to_string(r) + " has wrong width");
        const auto i = parse_index(row[0], "record index"), j = parse_index(row[1], "record index");
        if (i == 0 || j == 0) throw ValidationError("record indices are 1-based");
        pairs.push_back({static_cast<std::uint32_t>(i - 1), static_cast<std::uint32_t>(j - 1)});
        for (std::size_t f = 0; f < F; ++f) {
            if (row[2 + f] == "NA") levels.push_back(ComparisonData::kMissing);
            else levels.push_back(static_cast<std::int8_t>(parse_index(row[2 + f], "level")));
        }
    }
    return {ComparisonData::from_levels(n1, n2, std::move(fields), std::move(pairs), levels),
            meta.value("swapped", false)};
}

void write_comparison(const std::string& path, const ComparisonData& data, bool swapped) {
    write_text(path, format_comparison(data, swapped));
}

ComparisonFile read_comparison(const std::string& path) { return parse_comparison(read_text(path)); }

// -------------------------------------------------------------------------
//     Parameters and outputs
// -------------------------------------------------------------------------

Json phi_to_json(const PhiParams& phi, const std::vector<FieldLevels>& fields) {
    Json doc;
    Json fs_ = Json::array();
    for (std::size_t f = 0; f < fields.size(); ++f) fs_.push_back({{"name", fields[f].name}, {"m", phi.m[f]}, {"u", phi.u[f]}});
    doc["fields"] = fs_;
    if (phi.p) doc["p"] = *phi.p;
    return doc;
}

PhiParams phi_from_json(const Json& doc, const std::vector<FieldLevels>& fields) {
    PhiParams phi;
    try {
        const auto& fs_ = doc.at("fields");
        if (fs_.size() != fields.size()) throw ValidationError("parameter file has a different number of fields");
        for (std::size_t f = 0; f < fields.size(); ++f) {
            if (fs_[f].at("name").get<std::string>() != fields[f].name) {
                throw ValidationError("parameter field '" + fs_[f].at("name").get<std::string>() + "' does not match '" +
                                      fields[f].name + "'");
            }
            phi.m.push_back(fs_[f].at("m").get<std::vector<double>>());
            phi.u.push_back(fs_[f].at("u").get<std::vector<double>>());
        }
        if (doc.contains("p")) phi.p = doc["p"].get<double>();
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("malformed parameter file: ") + e.what());
    }
    phi.validate(fields, 1e-9);
    return phi;
}

std::string format_weights(const ComparisonData& data, const std::vector<double>& weights) {
    std::string out = "i,j,weight\n";
    for (std::size_t k = 0; k < data.num_pairs(); ++k) {
        out += std::to_string(data.pair(k).i + 1) + "," + std::to_string(data.pair(k).j + 1) + "," + fmt(weights[k]) + "\n";
    }
    return out;
}

std::string format_posterior(const PosteriorSummary& posterior) {
    std::string out = "i,j,prob\n";
    for (std::size_t j = 0; j < posterior.n2(); ++j) {
        for (const auto& e : posterior.column(j)) {
            out += std::to_string(e.i + 1) + "," + std::to_string(j + 1) + "," + fmt(e.prob) + "\n";
        }
    }
    return out;
}

PosteriorSummary parse_posterior(const std::string& text, std::size_t n1, std::size_t n2) {
    const auto rows = parse_delimited(text);
    std::vector<MatchPair> pairs;
    std::vector<double> probs;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 3) throw ValidationError("posterior row " + std::to_string(r) + " must have 3 columns");
        const auto i = parse_index(rows[r][0], "posterior i"), j = parse_index(rows[r][1], "posterior j");
        if (i == 0 || j == 0) throw ValidationError("posterior indices are 1-based");
        pairs.push_back({static_cast<std::uint32_t>(i - 1), static_cast<std::uint32_t>(j - 1)});
        probs.push_back(parse_double(rows[r][2], "posterior probability"));
    }
    return PosteriorSummary::from_probabilities(n1, n2, pairs, probs);
}

std::string format_overlap(const PosteriorSummary& posterior) {
    std::string out;
    for (auto k : posterior.overlap_samples()) out += std::to_string(k) + "\n";
    return out;
}

std::string format_draws(const PosteriorSummary& posterior) {
    std::string out;
    const auto n1 = posterior.n1();
    for (const auto& z : posterior.samples()) {
        for (std::size_t j = 0; j < z.size(); ++j) {
            if (j) out += ',';
            out += std::to_string(z[j] >= 0 ? std::size_t(z[j]) + 1 : n1 + j + 1);
        }
        out += '\n';
    }
    return out;
}

std::vector<std::vector<std::int32_t>> parse_draws(const std::string& text, std::size_t n1) {
    std::vector<std::vector<std::int32_t>> out;
    for (const auto& row : parse_delimited(text)) {
        std::vector<std::int32_t> z(row.size());
        for (std::size_t j = 0; j < row.size(); ++j) {
            const auto label = parse_index(row[j], "draw label");
            if (label >= 1 && label <= n1) z[j] = static_cast<std::int32_t>(label - 1);
            else if (label == n1 + j + 1) z[j] = -1;
            else throw ValidationError("draw label " + row[j] + " is invalid for record " + std::to_string(j + 1));
        }
        out.push_back(std::move(z));
    }
    return out;
}

Json chain_to_json(const PosteriorSummary& posterior, const PriorConfig& prior) {
    const auto& c = posterior.chain();
    return Json{{"n1", posterior.n1()},
                {"n2", posterior.n2()},
                {"iterations", c.iterations},
                {"burn_in", c.burn_in},
                {"seed", c.seed},
                {"chains", c.chains},
                {"random_scan", c.random_scan},
                {"retained", posterior.num_samples()},
                {"alpha_pi", prior.alpha_pi},
                {"beta_pi", prior.beta_pi},
                {"alpha", prior.alpha},
                {"beta", prior.beta},
                {"flat_matching_prior", prior.flat_matching_prior}};
}

std::string format_estimate(const LinkageEstimate& est, bool swapped) {
    Json meta{{"estimator", est.estimator}, {"loss", est.loss.to_string()}, {"n1", est.n1}, {"n2", est.n2()},
              {"swapped", swapped}};
    std::string out = "#" + meta.dump() + "\nfile1_record,file2_record,decision,probability,expected_loss\n";
    for (std::size_t j = 0; j < est.n2(); ++j) {
        const auto& e = est.entries[j];
        const std::string target = e.i ? std::to_string(*e.i + 1) : "";
        const std::string own = std::to_string(j + 1);
        out += swapped ? own + "," + target : target + "," + own;
        out += "," + std::string(to_string(e.decision)) + "," + fmt(e.prob) + "," + fmt(e.expected_loss) + "\n";
    }
    return out;
}

EstimateFile parse_estimate(const std::string& text) {
    auto [comments, body] = split_comments(text);
    if (comments.empty()) throw ValidationError("estimate file lacks its metadata line");
    Json meta;
    try {
        meta = Json::parse(comments[0]);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("estimate metadata is not valid JSON: ") + e.what());
    }
    EstimateFile out;
    out.swapped = meta.value("swapped", false);
    auto& est = out.estimate;
    est.n1 = meta.at("n1").get<std::size_t>();
    est.estimator = meta.value("estimator", std::string());
    est.loss = LossConfig::parse(meta.value("loss", std::string("1,1,2")));
    const auto n2 = meta.at("n2").get<std::size_t>();
    est.entries.resize(n2);
    std::vector<bool> seen(n2, false);
    const auto rows = parse_delimited(body);
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 5) throw ValidationError("estimate row " + std::to_string(r) + " must have 5 columns");
        const std::string own = out.swapped ? row[0] : row[1];
        const std::string target = out.swapped ? row[1] : row[0];
        const auto j = parse_index(own, "estimate record") - 1;
        if (j >= n2 || seen[j]) throw ValidationError("estimate record index invalid or repeated");
        seen[j] = true;
        auto& e = est.entries[j];
        const auto& d = row[2];
        if (d == "link") e.decision = Decision::Link;
        else if (d == "non-link") e.decision = Decision::NonLink;
        else if (d == "reject") e.decision = Decision::Reject;
        else throw ValidationError("unknown decision '" + d + "'");
        if (!target.empty()) e.i = static_cast<std::uint32_t>(parse_index(target, "link target") - 1);
        e.prob = parse_double(row[3], "probability");
        e.expected_loss = parse_double(row[4], "expected loss");
    }
    for (std::size_t j = 0; j < n2; ++j) {
        if (!seen[j]) throw ValidationError("estimate is missing record " + std::to_string(j + 1));
    }
    est.validate();
    return out;
}

std::string format_truth(const MatchingLabeling& z) {
    std::string out = "j,z\n";
    const auto labels = z.labels();
    for (std::size_t j = 0; j < labels.size(); ++j) out += std::to_string(j + 1) + "," + std::to_string(labels[j]) + "\n";
    return out;
}

MatchingLabeling parse_truth(const std::string& text, std::size_t n1) {
    const auto rows = parse_delimited(text);
    std::vector<std::size_t> labels;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        if (rows[r].size() != 2) throw ValidationError("truth row must have 2 columns");
        if (parse_index(rows[r][0], "truth j") != r) throw ValidationError("truth rows must be ordered by j");
        labels.push_back(parse_index(rows[r][1], "truth label"));
    }
    return MatchingLabeling::from_labels(n1, labels);
}

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

Json interval_to_json(const IntervalSummary& s) {
    return Json{{"mean", s.mean}, {"median", s.median}, {"lower", s.lower}, {"upper", s.upper}};
}

}  // namespace

Json report_to_json(const EvalReport& r) {
    return Json{{"n2", r.n2},
                {"true_matches", r.true_matches},
                {"links", r.links},
                {"correct_links", r.correct_links},
                {"nonlinks", r.nonlinks},
                {"correct_nonlinks", r.correct_nonlinks},
                {"rejections", r.rejections},
                {"precision", optional_number(r.precision)},
                {"recall", optional_number(r.recall)},
                {"ppv", optional_number(r.ppv)},
                {"npv", optional_number(r.npv)},
                {"rejection_rate", optional_number(r.rejection_rate)}};
}

Json overlap_to_json(const OverlapSummary& s) {
    return Json{{"level", s.level},
                {"quantile_convention", std::string(to_string(s.convention))},
                {"overlap", interval_to_json(s.overlap)},
                {"proportion", interval_to_json(s.proportion)},
                {"union_size", interval_to_json(s.union_size)}};
}

void write_meta(const std::string& out, const std::string& stage, Json details) {
    details["stage"] = stage;
    details["version"] = kVersion;
    details["written_at"] = std::chrono::duration_cast<std::chrono::seconds>(
                                std::chrono::system_clock::now().time_since_epoch())
                                .count();
    write_text(out + ".meta.json", details.dump(2) + "\n");
}

}  // namespace rlink
