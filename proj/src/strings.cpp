#include "rlink/strings.hpp"

#include <algorithm>
#include <numeric>

#include "rlink/lsap.hpp"

namespace rlink {

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t k = 0;
    while (k < s.size()) {
        const auto c = static_cast<unsigned char>(s[k]);
        std::size_t len = 0;
        char32_t cp = 0;
        if (c < 0x80) {
            len = 1;
            cp = c;
        } else if ((c & 0xE0) == 0xC0) {
            len = 2;
            cp = c & 0x1F;
        } else if ((c & 0xF0) == 0xE0) {
            len = 3;
            cp = c & 0x0F;
        } else if ((c & 0xF8) == 0xF0) {
            len = 4;
            cp = c & 0x07;
        }
        bool ok = len > 0 && k + len <= s.size();
        for (std::size_t t = 1; ok && t < len; ++t) {
            const auto cc = static_cast<unsigned char>(s[k + t]);
            if ((cc & 0xC0) != 0x80) ok = false;
            cp = (cp << 6) | (cc & 0x3F);
        }
        if (!ok) {
            out.push_back(c);
            ++k;
        } else {
            out.push_back(cp);
            k += len;
        }
    }
    return out;
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    // Two-row DP over the shorter string.
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t x = 1; x <= a.size(); ++x) {
        cur[0] = x;
        for (std::size_t y = 1; y <= b.size(); ++y) {
            const std::size_t sub = prev[y - 1] + (a[x - 1] == b[y - 1] ? 0 : 1);
            cur[y] = std::min({prev[y] + 1, cur[y - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

namespace {

double normalized_levenshtein_cp(std::u32string_view a, std::u32string_view b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 0.0;
    return static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

}  // namespace

double normalized_levenshtein(std::string_view a, std::string_view b) {
    return normalized_levenshtein_cp(decode_utf8(a), decode_utf8(b));
}

std::vector<std::string> split_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t k = 0;
    while (k < s.size()) {
        while (k < s.size() && (s[k] == ' ' || s[k] == '\t')) ++k;
        const std::size_t start = k;
        while (k < s.size() && s[k] != ' ' && s[k] != '\t') ++k;
        if (k > start) tokens.emplace_back(s.substr(start, k - start));
    }
    return tokens;
}

double modified_levenshtein(std::string_view a, std::string_view b) {
    auto ta = split_tokens(a);
    auto tb = split_tokens(b);
    if (ta.empty() && tb.empty()) return 0.0;
    if (ta.empty() || tb.empty()) return 1.0;
    if (ta.size() > tb.size()) std::swap(ta, tb);

    std::vector<std::u32string> ca, cb;
    for (const auto& t : ta) ca.push_back(decode_utf8(t));
    for (const auto& t : tb) cb.push_back(decode_utf8(t));

    CostMatrix cost(ca.size(), cb.size());
    for (std::size_t r = 0; r < ca.size(); ++r) {
        for (std::size_t c = 0; c < cb.size(); ++c) cost(r, c) = normalized_levenshtein_cp(ca[r], cb[c]);
    }
    const auto assignment = solve_lsap(cost);
    return assignment.cost / static_cast<double>(ca.size());
}

}  // namespace rlink
