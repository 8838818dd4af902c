#include <catch2/catch_amalgamated.hpp>

#include "helpers.hpp"
#include "spectrace/spec_corpus.hpp"

using namespace spectrace;

TEST_CASE("single heading document") {
    SpecDocument doc = parse_spec_markdown("# Intro\nabc");
    REQUIRE(doc.sections.size() == 1);
    CHECK(doc.sections[0].id == "1");
    CHECK(doc.sections[0].title == "Intro");
    CHECK(doc.sections[0].body == "abc");
    CHECK(doc.sections[0].order == 0);
}

TEST_CASE("numeric prefixes become ids") {
    SpecDocument doc = parse_spec_markdown("# 1 Introduction / Initialization\ntext\n"
                                           "## 4.2 File Discovery\nmore");
    REQUIRE(doc.sections.size() == 2);
    CHECK(doc.sections[0].id == "1");
    CHECK(doc.sections[0].title == "Introduction / Initialization");
    CHECK(doc.sections[1].id == "4.2");
    CHECK(doc.sections[1].title == "File Discovery");
}

TEST_CASE("no headings raises EmptyDocument") {
    CHECK_THROWS_AS(parse_spec_markdown("just prose\nwithout headings"), EmptyDocument);
}

TEST_CASE("body excludes child text and deep headings fold into the parent") {
    std::string md = "# 1 Top\nparent body\n## 1.1 Child\nchild body\n"
                     "##### Deep\ndeep text stays in child\n## 1.2 Next\nx";
    SpecDocument doc = parse_spec_markdown(md);
    REQUIRE(doc.sections.size() == 3);
    CHECK(doc.sections[0].body == "parent body");
    CHECK(doc.sections[1].id == "1.1");
    CHECK(doc.sections[1].body.find("deep text stays in child") != std::string::npos);
    CHECK(doc.sections[1].body.find("##### Deep") != std::string::npos);
    CHECK(doc.sections[2].id == "1.2");
}

TEST_CASE("synthesized ids follow heading nesting") {
    SpecDocument doc = parse_spec_markdown("# A\n\n## B\n\n## C\n\n# D\n\n## E\n");
    REQUIRE(doc.sections.size() == 5);
    CHECK(doc.sections[0].id == "1");
    CHECK(doc.sections[1].id == "1.1");
    CHECK(doc.sections[2].id == "1.2");
    CHECK(doc.sections[3].id == "2");
    CHECK(doc.sections[4].id == "2.1");
}

TEST_CASE("duplicate explicit ids are disambiguated") {
    SpecDocument doc = parse_spec_markdown("# 1 First\nx\n# 1 Again\ny");
    REQUIRE(doc.sections.size() == 2);
    CHECK(doc.sections[0].id == "1");
    CHECK(doc.sections[1].id == "1_2");
}

TEST_CASE("orders are consecutive from zero") {
    SpecDocument doc = parse_spec_markdown(read_text_file(testutil::nfc_spec()), "fixture");
    for (std::size_t i = 0; i < doc.sections.size(); ++i)
        CHECK(doc.sections[i].order == int(i));
}

TEST_CASE("fixture spec has ten sections with ids 1..10") {
    SpecDocument doc = parse_spec_markdown(read_text_file(testutil::nfc_spec()), "fixture");
    REQUIRE(doc.sections.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(doc.sections[std::size_t(i)].id == std::to_string(i + 1));
}

TEST_CASE("sectioning idempotence: parse(render(parse(x))) == parse(x)") {
    auto check_roundtrip = [](const std::string& md) {
        SpecDocument a = parse_spec_markdown(md);
        SpecDocument b = parse_spec_markdown(render_spec_markdown(a));
        REQUIRE(a.sections.size() == b.sections.size());
        for (std::size_t i = 0; i < a.sections.size(); ++i) {
            CHECK(a.sections[i].id == b.sections[i].id);
            CHECK(a.sections[i].title == b.sections[i].title);
            CHECK(a.sections[i].body == b.sections[i].body);
        }
    };
    check_roundtrip("# Alpha\nbody a\n## Beta\nbody b\n### 3.9 Gamma\nbody c\n");
    check_roundtrip(read_text_file(testutil::nfc_spec()));
}

TEST_CASE("query terms rank technical tokens first") {
    SpecSection sec;
    sec.title = "Introduction / Initialization";
    sec.body = "The DH SHALL use the NCI interface to reach the NFCC and any NFCEE. "
               "A logical connection precedes the RF interface setup. "
               "interface interface interface";
    auto terms = extract_query_terms(sec, 12);
    auto has = [&](const std::string& t) {
        return std::find(terms.begin(), terms.end(), t) != terms.end();
    };
    CHECK(has("NCI"));
    CHECK(has("DH"));
    CHECK(has("NFCC"));
    CHECK(has("NFCEE"));
    CHECK(has("RF"));
    CHECK(has("interface"));
    CHECK(has("logical"));
    CHECK(has("connection"));
    // acronyms come before plain frequency words
    auto idx = [&](const std::string& t) {
        return std::find(terms.begin(), terms.end(), t) - terms.begin();
    };
    CHECK(idx("NCI") < idx("interface"));
}

TEST_CASE("stopword-only body yields no terms") {
    SpecSection sec;
    sec.title = "the";
    sec.body = "the of and";
    CHECK(extract_query_terms(sec, 10).empty());
}

TEST_CASE("acronym priority keeps I2C on top") {
    SpecSection sec;
    sec.title = "I2C bus timing";
    sec.body = "Timing constraints for the I2C bus apply to every transfer on the bus.";
    auto terms = extract_query_terms(sec, 6);
    REQUIRE(!terms.empty());
    CHECK(terms[0] == "I2C");
}

TEST_CASE("query term extraction is deterministic") {
    SpecSection sec;
    sec.title = "Transport";
    sec.body = "The TML transport exchanges NCI packets over the I2C bus via reads and writes.";
    auto a = extract_query_terms(sec, 8);
    auto b = extract_query_terms(sec, 8);
    CHECK(a == b);
    CHECK(a.size() <= 8);
}

TEST_CASE("max_terms caps the list") {
    SpecSection sec;
    sec.body = "alpha beta gamma delta epsilon zeta eta theta iota kappa";
    CHECK(extract_query_terms(sec, 3).size() == 3);
}

// --- semantic chunking ---

TEST_CASE("threshold zero yields a single chunk") {
    auto embed = make_hash_embedder(64);
    std::string text = "One topic here. Something different there. Yet another thing.";
    auto chunks = semantic_chunk(text, embed, 2, 0.0);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].text == text);
    CHECK(chunks[0].start_offset == 0);
    CHECK(chunks[0].end_offset == text.size());
}

TEST_CASE("empty text yields no chunks") {
    auto embed = make_hash_embedder(64);
    CHECK(semantic_chunk("", embed, 3, 0.5).empty());
}

TEST_CASE("two-topic text splits exactly at the seam") {
    auto embed = make_hash_embedder(64);
    // hardware-pin prose then crypto prose, three sentences each
    std::string text = "The gpio pin header drives the pin voltage. "
                       "Each gpio pin maps to a pin register. "
                       "Pin voltage levels follow the gpio header spec. "
                       "The cipher key digest uses a hash rounds schedule. "
                       "Key digest rounds rotate the cipher state. "
                       "The hash schedule mixes the cipher key digest.";
    const double threshold = 0.5;
    const int window = 3;

    // brute force: every adjacent-window cosine, exactly one below threshold
    auto spans = sentence_spans(text);
    REQUIRE(spans.size() == 6);
    int below = 0;
    std::size_t seam = 999;
    for (std::size_t g = 0; g + 1 < spans.size(); ++g) {
        std::size_t lo = g + 1 >= std::size_t(window) ? g + 1 - std::size_t(window) : 0;
        std::size_t hi = std::min(spans.size() - 1, g + std::size_t(window));
        std::string left(text.substr(spans[lo].first, spans[g].second - spans[lo].first));
        std::string right(text.substr(spans[g + 1].first, spans[hi].second - spans[g + 1].first));
        double sim = std::max(0.0, cosine(embed(left), embed(right)));
        if (sim < threshold) {
            ++below;
            seam = g;
        }
    }
    REQUIRE(below == 1);
    REQUIRE(seam == 2); // between sentence 3 and 4

    auto chunks = semantic_chunk(text, embed, window, threshold);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].end_offset == spans[2].second);
    CHECK(chunks[1].start_offset == spans[3].first);
}

TEST_CASE("chunk coverage reconstructs the input exactly") {
    auto embed = make_hash_embedder(32);
    std::string text = read_text_file(testutil::nfc_spec());
    for (double threshold : {0.0, 0.3, 0.55, 0.9}) {
        auto chunks = semantic_chunk(text, embed, 3, threshold);
        std::string rebuilt;
        std::size_t prev = 0;
        for (const auto& c : chunks) {
            CHECK(c.start_offset == prev);
            CHECK(c.start_offset < c.end_offset);
            CHECK(c.text == text.substr(c.start_offset, c.end_offset - c.start_offset));
            rebuilt += c.text;
            prev = c.end_offset;
        }
        CHECK(rebuilt == text);
    }
}

TEST_CASE("embedding failure propagates") {
    EmbedFn failing = [](std::string_view) -> std::vector<double> {
        throw EmbeddingFailure("backend down");
    };
    CHECK_THROWS_AS(semantic_chunk("a. b. c. d.", failing, 1, 0.5), EmbeddingFailure);
}
