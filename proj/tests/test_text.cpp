#include <catch2/catch_amalgamated.hpp>

#include "spectrace/fsutil.hpp"
#include "spectrace/hash.hpp"
#include "spectrace/text.hpp"

using namespace spectrace;

TEST_CASE("tokens split snake_case parts and keep the joined form") {
    auto t = tokens("nfcService_Init");
    CHECK(std::count(t.begin(), t.end(), "nfcservice_init") == 1);
    CHECK(std::count(t.begin(), t.end(), "init") == 1);
    // camel boundary inside the first segment
    CHECK(std::count(t.begin(), t.end(), "nfc") == 1);
    CHECK(std::count(t.begin(), t.end(), "service") == 1);
}

TEST_CASE("tokens handle acronym-to-word camel boundaries") {
    auto t = tokens("phTmlNfc_I2COpen");
    CHECK(std::count(t.begin(), t.end(), "ph") == 1);
    CHECK(std::count(t.begin(), t.end(), "tml") == 1);
    CHECK(std::count(t.begin(), t.end(), "nfc") == 1);
    CHECK(std::count(t.begin(), t.end(), "i2c") == 1);
    CHECK(std::count(t.begin(), t.end(), "open") == 1);
}

TEST_CASE("tokens keep duplicates for term frequency") {
    auto t = tokens("init init INIT");
    CHECK(std::count(t.begin(), t.end(), "init") == 3);
}

TEST_CASE("single characters are dropped") {
    auto t = tokens("a b nfc_service.c");
    CHECK(std::count(t.begin(), t.end(), "a") == 0);
    CHECK(std::count(t.begin(), t.end(), "c") == 0);
    CHECK(std::count(t.begin(), t.end(), "nfc") == 1);
}

TEST_CASE("jaccard basics") {
    auto a = token_set("alpha beta gamma");
    auto b = token_set("beta gamma delta");
    CHECK(jaccard(a, b) == Catch::Approx(2.0 / 4.0));
    CHECK(jaccard(a, a) == Catch::Approx(1.0));
    CHECK(jaccard(a, token_set("zz yy")) == 0.0);
    CHECK(jaccard({}, {}) == 0.0);
}

TEST_CASE("sentence spans cover the text exactly") {
    std::string text = "First sentence. Second one? Third!\n\nNew paragraph here. Tail";
    auto spans = sentence_spans(text);
    REQUIRE(!spans.empty());
    std::string rebuilt;
    std::size_t prev_end = 0;
    for (auto [a, b] : spans) {
        CHECK(a == prev_end);
        CHECK(a < b);
        rebuilt += text.substr(a, b - a);
        prev_end = b;
    }
    CHECK(rebuilt == text);
    CHECK(prev_end == text.size());
}

TEST_CASE("sentence spans on empty and terminator-free text") {
    CHECK(sentence_spans("").empty());
    auto spans = sentence_spans("no terminator at all");
    REQUIRE(spans.size() == 1);
    CHECK(spans[0].first == 0);
}

TEST_CASE("token estimate is ceil(chars/4)") {
    CHECK(estimate_tokens("") == 0);
    CHECK(estimate_tokens("abcd") == 1);
    CHECK(estimate_tokens("abcde") == 2);
}

TEST_CASE("normative language detection") {
    CHECK(has_normative_language("The DH SHALL establish the link."));
    CHECK(has_normative_language("Implementations must retry."));
    CHECK_FALSE(has_normative_language("DH: Device Host. NFCC: the controller."));
}

TEST_CASE("fnv fingerprints are order sensitive and stable") {
    CHECK(fnv1a64("abc") == fnv1a64("abc"));
    CHECK(fnv1a64("abc") != fnv1a64("acb"));
    CHECK(fnv_combine(1, 2) != fnv_combine(2, 1));
    CHECK(to_hex(0x1234abcdull, 8) == "1234abcd");
}

TEST_CASE("glob matching") {
    CHECK(glob_match("**/build/**", "src/build/gen/x.o"));
    CHECK(glob_match("**/build/**", "build/x.o"));
    CHECK_FALSE(glob_match("**/build/**", "builds/x.o"));
    CHECK(glob_match("*.c", "main.c"));
    CHECK_FALSE(glob_match("*.c", "src/main.c")); // '*' stays inside one segment
    CHECK(glob_match("src/**", "src/a/b/c.h"));
    CHECK(glob_match("?.c", "a.c"));
    CHECK_FALSE(glob_match("?.c", "ab.c"));
    CHECK(matches_any_glob({"**/build/**"}, "build")); // the directory itself
}

TEST_CASE("path helpers") {
    CHECK(normalize_rel("./src//service/") == "src/service");
    CHECK(parent_folder("src/service/a.c") == "src/service");
    CHECK(parent_folder("a.c") == "");
    CHECK(base_name("src/service/a.c") == "a.c");
    CHECK(is_proper_ancestor("src", "src/service"));
    CHECK(is_proper_ancestor("", "src"));
    CHECK_FALSE(is_proper_ancestor("src", "src"));
    CHECK_FALSE(is_proper_ancestor("src/se", "src/service"));
}
