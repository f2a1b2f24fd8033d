#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace rlink {

/// Decodes UTF-8 into code points. Invalid bytes are passed through as single code points.
std::u32string decode_utf8(std::string_view s);

/// Minimum number of insertions, deletions and substitutions turning `a` into `b`.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// Edit distance divided by the length of the longer string; 0 = identical, 1 = nothing shared.
/// Two empty strings compare as 0. Operates on code points.
double normalized_levenshtein(std::string_view a, std::string_view b);

std::vector<std::string> split_tokens(std::string_view s);

/// Token-aligned name distance for multi-part names.
///
/// Tokens of the shorter name are aligned one-to-one with tokens of the longer
/// name so that the summed per-token normalized Levenshtein distance is minimal;
/// the result is the mean distance over aligned tokens. Tokens without a partner
/// (missing name pieces) are ignored. An empty side against a non-empty one is 1.
double modified_levenshtein(std::string_view a, std::string_view b);

}  // namespace rlink
