#include <doctest.h>

#include "oracles.hpp"
#include "rlink/random.hpp"
#include "rlink/strings.hpp"

using namespace rlink;

TEST_SUITE("strings") {

TEST_CASE("normalized levenshtein examples") {
    CHECK(normalized_levenshtein("abc", "abc") == 0.0);
    CHECK(normalized_levenshtein("kitten", "sitting") == doctest::Approx(3.0 / 7.0).epsilon(1e-15));
    CHECK(normalized_levenshtein("", "abc") == 1.0);
    CHECK(normalized_levenshtein("", "") == 0.0);
}

TEST_CASE("levenshtein agrees with the recursive oracle") {
    Rng rng(11);
    const std::string alphabet = "abcde";
    for (int rep = 0; rep < 300; ++rep) {
        std::string a, b;
        for (auto n = uniform_index(rng, 8); n > 0; --n) a += alphabet[uniform_index(rng, alphabet.size())];
        for (auto n = uniform_index(rng, 8); n > 0; --n) b += alphabet[uniform_index(rng, alphabet.size())];
        const auto d = oracle::edit_distance(a, b);
        CHECK(levenshtein(decode_utf8(a), decode_utf8(b)) == d);
        CHECK(levenshtein(decode_utf8(b), decode_utf8(a)) == d);
        const double norm = a.empty() && b.empty() ? 0.0 : double(d) / double(std::max(a.size(), b.size()));
        CHECK(normalized_levenshtein(a, b) == norm);
    }
}

TEST_CASE("code points, not bytes") {
    CHECK(decode_utf8("PÉREZ").size() == 5);
    CHECK(normalized_levenshtein("PÉREZ", "PEREZ") == doctest::Approx(0.2));
}

TEST_CASE("modified levenshtein") {
    CHECK(modified_levenshtein("JOSE PEREZ", "JOSE PEREZ") == 0.0);
    CHECK(modified_levenshtein("JOSE LUIS PEREZ", "JOSE PEREZ") == 0.0);
    CHECK(modified_levenshtein("PEREZ JOSE", "JOSE PEREZ") == 0.0);
    // No shared characters: edit distance 5 over length 5.
    CHECK(modified_levenshtein("JOSE", "MARIA") == 1.0);
    CHECK(modified_levenshtein("", "JOSE") == 1.0);
    CHECK(modified_levenshtein("", "") == 0.0);
    // Single tokens reduce to the normalized distance.
    CHECK(modified_levenshtein("KITTEN", "SITTING") == doctest::Approx(3.0 / 7.0));
    CHECK(modified_levenshtein("ANA MARIA", "MARIA ANNA") ==
          doctest::Approx((0.0 + oracle::edit_distance("ANA", "ANNA") / 4.0) / 2.0));
}

TEST_CASE("token split") {
    CHECK(split_tokens("  A  B\tC ") == std::vector<std::string>{"A", "B", "C"});
    CHECK(split_tokens("   ").empty());
}

}  // TEST_SUITE
