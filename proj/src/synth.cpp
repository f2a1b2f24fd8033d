#include "rlink/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace rlink {

namespace {

const char* const kGivenNames[] = {
    "JACK", "OLIVER", "WILLIAM", "NOAH", "THOMAS", "JAMES", "LUCAS", "HENRY", "ETHAN", "SAMUEL",
    "LIAM", "MASON", "ALEXANDER", "MAX", "LACHLAN", "BENJAMIN", "JOSHUA", "CHARLIE", "LEO", "HARRISON",
    "DANIEL", "RYAN", "JACOB", "MATTHEW", "ISAAC", "RILEY", "COOPER", "HUDSON", "SEBASTIAN", "ARCHIE",
    "OSCAR", "LOGAN", "HUNTER", "ZACHARY", "TYLER", "NATHAN", "CALEB", "LUKE", "AIDEN", "HARRY",
    "JOSEPH", "DYLAN", "CONNOR", "NICHOLAS", "MICHAEL", "ANDREW", "DAVID", "PATRICK", "OWEN", "SEAN",
    "ROBERT", "JOHN", "PETER", "MARK", "PAUL", "STEPHEN", "CHRISTOPHER", "ANTHONY", "RICHARD", "GEORGE",
    "EDWARD", "FREDERICK", "ARTHUR", "ALBERT", "FRANCIS", "HUGH", "IAN", "KEITH", "KEVIN", "BRUCE",
    "GRAHAM", "NEIL", "DOUGLAS", "GORDON", "ROSS", "SCOTT", "CRAIG", "SHANE", "TROY", "WAYNE",
    "BRADLEY", "DARREN", "GLENN", "GARY", "BARRY", "TREVOR", "COLIN", "DEAN", "JASON", "JUSTIN",
    "ADAM", "AARON", "BLAKE", "CAMERON", "DECLAN", "ELI", "FINN", "GABRIEL", "IVAN", "JAMIE",
    "CHARLOTTE", "OLIVIA", "AMELIA", "ISLA", "MIA", "AVA", "GRACE", "CHLOE", "SOPHIE", "EMILY",
    "ZOE", "RUBY", "ELLA", "SOPHIA", "LILY", "HARPER", "EVIE", "MATILDA", "SCARLETT", "ISABELLA",
    "EMMA", "ABIGAIL", "ALICE", "LUCY", "SIENNA", "CHELSEA", "HANNAH", "JESSICA", "SARAH", "REBECCA",
    "LAURA", "REBEKAH", "ASHLEY", "BROOKE", "KAYLA", "JADE", "TAYLOR", "MADISON", "GEORGIA", "ERIN",
    "MARY", "MARGARET", "ELIZABETH", "PATRICIA", "JENNIFER", "LINDA", "BARBARA", "SUSAN", "DOROTHY", "HELEN",
    "JUDITH", "KATHLEEN", "CAROL", "JANET", "JOYCE", "DIANE", "JULIE", "KAREN", "LISA", "MICHELLE",
    "NICOLE", "KYLIE", "TRACEY", "MELISSA", "NATALIE", "AMANDA", "BELINDA", "CASSANDRA", "DANIELLE", "FIONA",
    "GEMMA", "HOLLY", "IMOGEN", "JASMINE", "KATE", "LEAH", "MEGAN", "NAOMI", "PAIGE", "PHOEBE",
    "ROSE", "STELLA", "TESS", "VIOLET", "WILLOW", "ANNA", "BELLA", "CLAIRE", "ELEANOR", "FREYA",
    "HAZEL", "IVY", "JUNE", "LOUISE", "MAUREEN", "NORA", "PENELOPE", "RACHEL", "THEA", "VANESSA",
};

const char* const kFamilyNames[] = {
    "SMITH", "JONES", "WILLIAMS", "BROWN", "WILSON", "TAYLOR", "JOHNSON", "WHITE", "MARTIN", "ANDERSON",
    "THOMPSON", "NGUYEN", "THOMAS", "WALKER", "HARRIS", "LEE", "RYAN", "ROBINSON", "KELLY", "KING",
    "DAVIS", "WRIGHT", "EVANS", "ROBERTS", "GREEN", "HALL", "WOOD", "JACKSON", "CLARKE", "PATEL",
    "KHAN", "LEWIS", "JAMES", "PHILLIPS", "MASON", "MITCHELL", "ROSE", "DAVIES", "RODRIGUEZ", "COX",
    "ALEXANDER", "MORRIS", "MORGAN", "HUGHES", "EDWARDS", "COOPER", "CAMPBELL", "MURPHY", "YOUNG", "STEWART",
    "BELL", "MILLER", "SCOTT", "WATSON", "BAKER", "MORRISON", "REID", "PARKER", "ALLEN", "HILL",
    "WARD", "TURNER", "COLLINS", "BENNETT", "GRAHAM", "SHAW", "COOK", "RICHARDSON", "ROSS", "MURRAY",
    "HAMILTON", "FERGUSON", "HUNTER", "PATTERSON", "OCONNOR", "MCDONALD", "MCKENZIE", "SULLIVAN", "DUNN", "BURKE",
    "FITZGERALD", "GALLAGHER", "OBRIEN", "DOYLE", "WALSH", "BYRNE", "HEALY", "QUINN", "LYNCH", "CARROLL",
    "FOSTER", "GRAY", "HOWARD", "KENNEDY", "LAWSON", "MARSHALL", "OWEN", "PRICE", "RUSSELL", "SIMPSON",
    "TUCKER", "WEBB", "WELLS", "WEST", "FORD", "GIBSON", "GRANT", "HAYES", "HOLMES", "HOPKINS",
    "JENKINS", "KNIGHT", "LANE", "MATTHEWS", "MILLS", "PAYNE", "PEARSON", "PERRY", "POWELL", "REYNOLDS",
    "RICE", "SANDERS", "SPENCER", "STEVENS", "SUTTON", "WATTS", "WEBSTER", "WOODS", "ATKINSON", "BARNES",
    "BARKER", "BLACK", "BOYD", "BRADLEY", "BURNS", "BUTLER", "CHAPMAN", "CLARK", "COLE", "CRAWFORD",
    "DAY", "DIXON", "DUNCAN", "ELLIS", "FISHER", "FLETCHER", "FOX", "GARDNER", "GORDON", "GRIFFITHS",
    "HARDY", "HARPER", "HART", "HENDERSON", "HOLLAND", "HUNT", "JOHNSTON", "KERR", "LAMBERT", "LLOYD",
    "LONG", "MARTINEZ", "MAY", "MOORE", "MOSS", "NEWMAN", "NICHOLS", "OLIVER", "PALMER", "PIERCE",
    "PORTER", "REEVES", "RILEY", "ROGERS", "SHARP", "SHERIDAN", "SIMMONS", "STONE", "SUMMERS", "SWEENEY",
    "TRAN", "LE", "PHAM", "CHEN", "WANG", "ZHANG", "LIU", "LI", "HUANG", "WONG",
    "SINGH", "KUMAR", "SHARMA", "ROSSI", "RUSSO", "ESPOSITO", "BIANCHI", "ROMANO", "COSTA", "PAPADOPOULOS",
    "NIKOLAOU", "GEORGIOU", "KOVAC", "NOVAK", "SCHMIDT", "MULLER", "SCHNEIDER", "FISCHER", "WEBER", "MEYER",
    "WAGNER", "BECKER", "HOFFMANN", "SCHULZ", "KOCH", "RICHTER", "KLEIN", "WOLF", "SCHRODER", "NEUMANN",
    "PHELPS", "CHALMERS", "CHRISTIE", "BUCHANAN", "CAMERON", "DOUGLAS", "FRASER", "GILLESPIE", "HAMMOND", "IRWIN",
    "JARVIS", "KEANE", "LOCKWOOD", "MACKAY", "NASH", "OSBORNE", "PRESTON", "RANDALL", "SHELTON", "THORNTON",
    "UNDERWOOD", "VAUGHAN", "WHITTAKER", "YATES", "ABBOTT", "BLACKWELL", "CHANDLER", "DRISCOLL", "EATON", "FARRELL",
};

/// Joint weights of age band (rows) and occupation (columns).
constexpr double kAgeOccupation[8][8] = {
    {40, 2, 1, 1, 8, 30, 1, 2},   {12, 10, 6, 8, 14, 20, 6, 9}, {6, 16, 12, 12, 12, 8, 10, 14},
    {5, 18, 14, 12, 10, 5, 12, 15}, {5, 17, 14, 12, 10, 4, 12, 14}, {6, 14, 12, 10, 9, 4, 10, 12},
    {10, 8, 8, 6, 6, 3, 6, 8},    {30, 2, 2, 2, 2, 2, 2, 3},
};

struct OcrPair {
    const char* a;
    const char* b;
};
constexpr OcrPair kOcr[] = {{"O", "0"}, {"I", "1"}, {"L", "1"}, {"S", "5"}, {"B", "8"},
                            {"RN", "M"}, {"CL", "D"}, {"G", "6"}, {"Z", "2"}};

struct Rule {
    const char* from;
    const char* to;
};
constexpr Rule kPhonetic[] = {
    {"PH", "F"},  {"F", "PH"},   {"LL", "L"},  {"CK", "K"},  {"C", "K"},   {"K", "C"},  {"TH", "T"},
    {"GH", "G"},  {"EE", "EA"},  {"EA", "EE"}, {"IE", "Y"},  {"Y", "IE"},  {"OU", "OO"}, {"Z", "S"},
    {"S", "Z"},   {"X", "KS"},   {"KS", "X"},  {"MB", "M"},  {"WR", "R"},  {"KN", "N"}, {"AE", "E"},
    {"SCH", "SH"}, {"TT", "T"},  {"NN", "N"},
};

const char* const kKeyboardRows[] = {"1234567890", "qwertyuiop", "asdfghjkl", "zxcvbnm"};

std::size_t weighted_pick(const std::vector<double>& cumulative, Rng& rng) {
    const double u = uniform01(rng) * cumulative.back();
    return static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
}

template <std::size_t N>
std::vector<double> rank_weights(const char* const (&)[N]) {
    std::vector<double> c(N);
    double s = 0.0;
    for (std::size_t r = 0; r < N; ++r) {
        s += 1.0 / (double(r) + 20.0);
        c[r] = s;
    }
    return c;
}

std::string random_edit(const std::string& value, Rng& rng) {
    std::string s = value;
    const char letter = static_cast<char>('A' + uniform_index(rng, 26));
    const auto op = s.empty() ? 0 : uniform_index(rng, 3);
    if (op == 0) {
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, s.size() + 1)), letter);
    } else if (op == 1) {
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, s.size())));
    } else {
        const auto pos = uniform_index(rng, s.size());
        char c = letter;
        if (c == s[pos]) c = static_cast<char>('A' + (c - 'A' + 1 + uniform_index(rng, 25)) % 26);
        s[pos] = c;
    }
    return s;
}

std::string keyboard_error(const std::string& value, Rng& rng) {
    std::vector<std::size_t> positions;
    for (std::size_t k = 0; k < value.size(); ++k) {
        if (!keyboard_neighbors(value[k]).empty()) positions.push_back(k);
    }
    if (positions.empty()) return random_edit(value, rng);
    const auto pos = positions[uniform_index(rng, positions.size())];
    const auto nb = keyboard_neighbors(value[pos]);
    char c = nb[uniform_index(rng, nb.size())];
    if (std::isupper(static_cast<unsigned char>(value[pos]))) c = static_cast<char>(std::toupper(c));
    std::string s = value;
    s[pos] = c;
    return s;
}

/// Replaces a random occurrence among all (from -> to) rewrites that apply.
template <class Rewrites>
std::optional<std::string> rewrite(const std::string& value, const Rewrites& options, Rng& rng) {
    struct Hit {
        std::size_t pos, len;
        std::string to;
    };
    std::vector<Hit> hits;
    for (const auto& [from, to] : options) {
        const std::string f(from);
        for (auto pos = value.find(f); pos != std::string::npos; pos = value.find(f, pos + 1)) {
            hits.push_back({pos, f.size(), to});
        }
    }
    if (hits.empty()) return std::nullopt;
    const auto& h = hits[uniform_index(rng, hits.size())];
    std::string s = value;
    s.replace(h.pos, h.len, h.to);
    return s;
}

std::string ocr_error(const std::string& value, Rng& rng) {
    std::vector<std::pair<std::string, std::string>> options;
    for (const auto& p : kOcr) {
        options.emplace_back(p.a, p.b);
        options.emplace_back(p.b, p.a);
    }
    if (auto s = rewrite(value, options, rng)) return *s;
    return random_edit(value, rng);
}

std::string phonetic_error(const std::string& value, Rng& rng) {
    std::vector<std::pair<std::string, std::string>> options;
    for (const auto& r : kPhonetic) options.emplace_back(r.from, r.to);
    if (auto s = rewrite(value, options, rng)) return *s;
    return random_edit(value, rng);
}

struct CleanRecord {
    std::string given, family, age, occupation;
};

CleanRecord clean_record(Rng& rng) {
    static const auto given_w = rank_weights(kGivenNames);
    static const auto family_w = rank_weights(kFamilyNames);
    static const auto joint_w = [] {
        std::vector<double> c;
        double s = 0.0;
        for (const auto& row : kAgeOccupation) {
            for (double w : row) c.push_back(s += w);
        }
        return c;
    }();
    CleanRecord r;
    r.given = kGivenNames[weighted_pick(given_w, rng)];
    r.family = kFamilyNames[weighted_pick(family_w, rng)];
    const auto cell = weighted_pick(joint_w, rng);
    r.age = std::to_string(cell / 8 + 1);
    r.occupation = std::to_string(cell % 8 + 1);
    return r;
}

Record to_record(const CleanRecord& c) { return {"", {c.given, c.family, c.age, c.occupation}}; }

std::vector<FieldSchema> synthetic_schema() {
    return {{"given_name", FieldKind::String},
            {"family_name", FieldKind::String},
            {"age", FieldKind::Categorical},
            {"occupation", FieldKind::Categorical}};
}

}  // namespace

std::string_view to_string(CorruptionKind k) {
    switch (k) {
        case CorruptionKind::Missing: return "missing";
        case CorruptionKind::Edit: return "edit";
        case CorruptionKind::Ocr: return "ocr";
        case CorruptionKind::Keyboard: return "keyboard";
        case CorruptionKind::Phonetic: return "phonetic";
    }
    return "edit";
}

std::string_view field_name(SynthField f) {
    switch (f) {
        case SynthField::GivenName: return "given_name";
        case SynthField::FamilyName: return "family_name";
        case SynthField::Age: return "age";
        case SynthField::Occupation: return "occupation";
    }
    return "given_name";
}

bool applicable(CorruptionKind kind, SynthField field) {
    const bool name = field == SynthField::GivenName || field == SynthField::FamilyName;
    switch (kind) {
        case CorruptionKind::Missing: return !name;
        case CorruptionKind::Edit:
        case CorruptionKind::Ocr:
        case CorruptionKind::Phonetic: return name;
        case CorruptionKind::Keyboard: return true;
    }
    return false;
}

std::vector<CorruptionKind> applicable_kinds(SynthField field) {
    std::vector<CorruptionKind> out;
    for (auto k : {CorruptionKind::Missing, CorruptionKind::Edit, CorruptionKind::Ocr, CorruptionKind::Keyboard,
                   CorruptionKind::Phonetic}) {
        if (applicable(k, field)) out.push_back(k);
    }
    return out;
}

std::string keyboard_neighbors(char c) {
    const char lc = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    std::string out;
    for (int r = 0; r < 4; ++r) {
        const std::string row = kKeyboardRows[r];
        const auto pos = row.find(lc);
        if (pos == std::string::npos) continue;
        // Same row neighbours, then the rows above and below at the same and next offset.
        if (pos > 0) out += row[pos - 1];
        if (pos + 1 < row.size()) out += row[pos + 1];
        for (int dr : {-1, 1}) {
            if (r + dr < 0 || r + dr > 3) continue;
            const std::string other = kKeyboardRows[r + dr];
            const long base = static_cast<long>(pos) + (dr < 0 ? 0 : -1);
            for (long k = base; k <= base + 1; ++k) {
                if (k >= 0 && k < static_cast<long>(other.size())) out += other[k];
            }
        }
        break;
    }
    return out;
}

std::optional<std::string> corrupt_value(CorruptionKind kind, SynthField field, const std::string& value, Rng& rng) {
    if (!applicable(kind, field)) {
        throw ConfigError(std::string(to_string(kind)) + " errors do not apply to field " + std::string(field_name(field)));
    }
    switch (kind) {
        case CorruptionKind::Missing: return std::nullopt;
        case CorruptionKind::Edit: return random_edit(value, rng);
        case CorruptionKind::Ocr: return ocr_error(value, rng);
        case CorruptionKind::Keyboard: return keyboard_error(value, rng);
        case CorruptionKind::Phonetic: return phonetic_error(value, rng);
    }
    return value;
}

void GeneratorConfig::validate() const {
    if (records_per_file == 0) throw ConfigError("records_per_file must be positive");
    if (!(overlap >= 0.0 && overlap <= 1.0)) throw ConfigError("overlap must lie in [0,1]");
    if (erroneous_fields > kNumSynthFields) throw ConfigError("erroneous_fields exceeds the number of fields");
    if (max_errors_per_field < 1 || max_errors_per_field > 3) throw ConfigError("max_errors_per_field must be 1..3");
    if (!(distorted_fraction >= 0.0 && distorted_fraction <= 1.0)) throw ConfigError("distorted_fraction must lie in [0,1]");
}

std::size_t GeneratorConfig::num_matches() const {
    return static_cast<std::size_t>(std::llround(overlap * double(records_per_file)));
}

SyntheticPair generate_pair(const GeneratorConfig& cfg) {
    cfg.validate();
    const std::size_t n = cfg.records_per_file;
    const std::size_t n12 = cfg.num_matches();
    constexpr std::uint64_t kFile1 = 0, kFile2 = 1ULL << 32, kLayout = 1ULL << 40;

    std::vector<CleanRecord> clean1(n), clean2(n);
    const auto nn = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < nn; ++r) {
        auto rng = make_stream(cfg.seed, kFile1 + r);
        clean1[r] = clean_record(rng);
    }

    // Layout: which file-1 records reappear in file 2, and where file-2 records land.
    auto layout = make_stream(cfg.seed, kLayout);
    std::vector<std::uint32_t> source(n);
    std::iota(source.begin(), source.end(), 0u);
    std::shuffle(source.begin(), source.end(), layout);
    std::vector<std::uint32_t> position(n);
    std::iota(position.begin(), position.end(), 0u);
    std::shuffle(position.begin(), position.end(), layout);
    const auto n_distorted = static_cast<std::size_t>(std::llround(cfg.distorted_fraction * double(n)));

    std::vector<std::optional<std::uint32_t>> truth(n);
    std::vector<Record> records2(n);
    std::vector<std::array<std::uint8_t, kNumSynthFields>> errors(n);
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < nn; ++t) {
        auto rng = make_stream(cfg.seed, kFile2 + t);
        const auto j = position[t];
        CleanRecord base;
        if (static_cast<std::size_t>(t) < n12) {
            base = clean1[source[t]];
            truth[j] = source[t];
        } else {
            base = clean_record(rng);
        }
        Record rec = to_record(base);
        errors[j].fill(0);
        if (j < n_distorted) {
            std::array<std::size_t, kNumSynthFields> fields{0, 1, 2, 3};
            std::shuffle(fields.begin(), fields.end(), rng);
            for (std::size_t e = 0; e < cfg.erroneous_fields; ++e) {
                const auto f = fields[e];
                const auto field = static_cast<SynthField>(f);
                const auto kinds = applicable_kinds(field);
                const auto count = 1 + uniform_index(rng, cfg.max_errors_per_field);
                for (std::size_t c = 0; c < count && rec.values[f]; ++c) {
                    rec.values[f] = corrupt_value(kinds[uniform_index(rng, kinds.size())], field, *rec.values[f], rng);
                    ++errors[j][f];
                }
            }
        }
        records2[j] = std::move(rec);
    }

    std::vector<Record> records1;
    records1.reserve(n);
    for (const auto& c : clean1) records1.push_back(to_record(c));
    SyntheticPair out{DataFile(synthetic_schema(), std::move(records1)), DataFile(synthetic_schema(), std::move(records2)),
                      MatchingLabeling::from_matches(n, truth), std::move(errors)};
    return out;
}

std::vector<ComparatorSpec> synthetic_comparators() {
    return {ComparatorSpec::levenshtein("given_name"), ComparatorSpec::levenshtein("family_name"),
            ComparatorSpec::binary("age"), ComparatorSpec::binary("occupation")};
}

}  // namespace rlink
