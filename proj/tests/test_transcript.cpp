#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "satkit/transcript.hpp"

using namespace satkit;

TEST_CASE("parse: single segment") {
    const auto t = parse_transcript("[0.00] - [2.10] [SPEAKER_00]\nbonjour madame", "r1");
    REQUIRE(t.segments.size() == 1);
    CHECK(t.segments[0].start == 0.0);
    CHECK(t.segments[0].end == 2.10);
    CHECK(t.segments[0].speaker == "SPEAKER_00");
    CHECK(t.segments[0].text == "bonjour madame");
    CHECK(t.recording_id == "r1");
}

TEST_CASE("parse: empty input") {
    CHECK(parse_transcript("", "r1").segments.empty());
    CHECK(parse_transcript("\n\n\n", "r1").segments.empty());
}

TEST_CASE("parse: blank lines between records are skipped") {
    const auto t = parse_transcript(
        "[0.00] - [1.00] [A]\nun\n\n\n[1.50] - [2.00] [B]\ndeux\n", "r1");
    REQUIRE(t.segments.size() == 2);
    CHECK(t.segments[0].text == "un");
    CHECK(t.segments[1].speaker == "B");
}

TEST_CASE("parse: empty text line is a valid segment") {
    const auto t = parse_transcript("[0.00] - [1.00] [A]\n\n", "r1");
    REQUIRE(t.segments.size() == 1);
    CHECK(t.segments[0].text.empty());
}

TEST_CASE("parse: text line may look like a header") {
    const auto t =
        parse_transcript("[0.00] - [1.00] [A]\n[9.00] - [9.50] [X]\n", "r1");
    REQUIRE(t.segments.size() == 1);
    CHECK(t.segments[0].text == "[9.00] - [9.50] [X]");
}

TEST_CASE("parse: errors carry line numbers") {
    SECTION("inverted interval") {
        try {
            parse_transcript("[2.0] - [1.0] [SPEAKER_00]\nx", "r1");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::InvertedInterval);
            CHECK(e.line() == 1);
        }
    }
    SECTION("malformed header") {
        try {
            parse_transcript("[0.00] - [1.00] [A]\nok\nnot a header\nx", "r1");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::MalformedHeader);
            CHECK(e.line() == 3);
        }
    }
    SECTION("bad timestamp") {
        try {
            parse_transcript("[zero] - [1.00] [A]\nx", "r1");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::BadTimestamp);
            CHECK(e.line() == 1);
        }
    }
    SECTION("negative timestamp is rejected") {
        CHECK_THROWS_AS(parse_transcript("[-1.0] - [1.00] [A]\nx", "r1"),
                        FormatError);
    }
    SECTION("missing text line") {
        try {
            parse_transcript("[0.00] - [1.00] [A]\n", "r1");
            FAIL("expected FormatError");
        } catch (const FormatError& e) {
            CHECK(e.kind() == FormatError::Kind::MissingTextLine);
            CHECK(e.line() == 1);
        }
    }
    SECTION("empty label") {
        CHECK_THROWS_AS(parse_transcript("[0.00] - [1.00] []\nx", "r1"),
                        FormatError);
    }
}

TEST_CASE("parse: label containing brackets round-trips") {
    Transcript t;
    t.recording_id = "r1";
    t.segments.push_back({0.0, 1.0, "A] [B", "texte"});
    const auto back = parse_transcript(serialize_transcript(t), "r1");
    REQUIRE(back.segments.size() == 1);
    CHECK(back.segments[0].speaker == "A] [B");
}

TEST_CASE("parse: CRLF input is tolerated") {
    const auto t = parse_transcript(
        "[0.00] - [1.00] [A]\r\nbonjour\r\n\r\n[1.50] - [2.00] [B]\r\noui\r\n", "r1");
    REQUIRE(t.segments.size() == 2);
    CHECK(t.segments[0].text == "bonjour");
    CHECK(t.segments[1].speaker == "B");
}

TEST_CASE("parse: out-of-order starts are kept but flagged") {
    const auto t = parse_transcript(
        "[5.00] - [6.00] [A]\nx\n[1.00] - [2.00] [B]\ny\n", "r1");
    REQUIRE(t.segments.size() == 2);
    CHECK(t.segments[0].start == 5.0);
    CHECK_FALSE(t.time_ordered());
}

TEST_CASE("serialize: fixed two-decimal timestamps, one record per segment") {
    Transcript t;
    t.recording_id = "r1";
    t.segments.push_back({0.0, 2.1, "SPEAKER_00", "bonjour madame"});
    CHECK(serialize_transcript(t) == "[0.00] - [2.10] [SPEAKER_00]\nbonjour madame\n");
    CHECK(serialize_transcript(Transcript{"r1", {}, {}}) == "");
}

TEST_CASE("round-trip: parse(serialize(t)) == t on randomized transcripts") {
    std::mt19937_64 rng(42);
    for (int iter = 0; iter < 500; ++iter) {
        const auto t = testutil::random_transcript(rng);
        const auto back = parse_transcript(serialize_transcript(t), t.recording_id);
        REQUIRE(back == t);
    }
}

TEST_CASE("normalize: case and punctuation") {
    CHECK(normalize("Bonjour, Madame !") == std::vector<std::string>{"bonjour", "madame"});
    CHECK(normalize("j'ai euh… mal") == std::vector<std::string>{"j'ai", "euh", "mal"});
    CHECK(normalize("").empty());
    CHECK(normalize("   \t  ").empty());
}

TEST_CASE("normalize: French accents, NFC, and curly apostrophes") {
    // decomposed e + combining acute equals precomposed é
    CHECK(normalize("déjà") == normalize("déjà"));
    CHECK(normalize("Épilepsie") == std::vector<std::string>{"épilepsie"});
    CHECK(normalize("l’hôpital") == std::vector<std::string>{"l'hôpital"});
    CHECK(normalize("ŒUVRE") == std::vector<std::string>{"œuvre"});
    CHECK(normalize("Ça va-t-il ?") == std::vector<std::string>{"ça", "va-t-il"});
}

TEST_CASE("normalize: edge joiners and markers") {
    CHECK(normalize("'allo") == std::vector<std::string>{"allo"});
    CHECK(normalize("--") == std::vector<std::string>{});
    CHECK(normalize("(.) oui /") == std::vector<std::string>{"oui"});
    CHECK(normalize("x… « guillemets »") ==
          std::vector<std::string>{"x", "guillemets"});
}

TEST_CASE("normalize: idempotence on randomized lines") {
    std::mt19937_64 rng(7);
    for (int iter = 0; iter < 300; ++iter) {
        const auto text = testutil::random_text(rng);
        const auto once = normalize(text);
        CHECK(normalize(join_tokens(once)) == once);
    }
}

TEST_CASE("flatten: speakers attach to every token") {
    Transcript t;
    t.recording_id = "r";
    t.segments.push_back({0, 1, "SPEAKER_00", "bonjour madame"});
    const auto words = flatten(t);
    REQUIRE(words.size() == 2);
    CHECK(words[0] == TaggedWord{"bonjour", "SPEAKER_00", 0});
    CHECK(words[1] == TaggedWord{"madame", "SPEAKER_00", 0});

    Transcript empty_texts;
    empty_texts.segments.push_back({0, 1, "A", ""});
    empty_texts.segments.push_back({1, 2, "B", ""});
    CHECK(flatten(empty_texts).empty());
}

TEST_CASE("flatten: length equals independent per-segment token count") {
    std::mt19937_64 rng(11);
    for (int iter = 0; iter < 100; ++iter) {
        const auto t = testutil::random_transcript(rng);
        std::size_t expected = 0;
        for (const auto& s : t.segments) expected += normalize(s.text).size();
        CHECK(flatten(t).size() == expected);
    }
}

TEST_CASE("chunk: sizes and partition property") {
    Transcript t;
    t.recording_id = "r";
    for (int i = 0; i < 1200; ++i) {
        t.segments.push_back({double(i), double(i) + 0.5, "A", "mot"});
    }
    const auto chunks = chunk(t, 500);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].segments.size() == 500);
    CHECK(chunks[1].segments.size() == 500);
    CHECK(chunks[2].segments.size() == 200);
    CHECK(chunks[2].index == 2);
    CHECK(assemble(t.recording_id, chunks) == t);

    Transcript exact;
    exact.recording_id = "r";
    exact.segments.assign(t.segments.begin(), t.segments.begin() + 500);
    CHECK(chunk(exact, 500).size() == 1);

    CHECK(chunk(Transcript{"r", {}, {}}, 500).empty());
    CHECK_THROWS_AS(chunk(t, 0), ConfigError);
}

TEST_CASE("chunk: partition property on randomized transcripts") {
    std::mt19937_64 rng(3);
    for (int iter = 0; iter < 100; ++iter) {
        const auto t = testutil::random_transcript(rng, 40);
        const std::size_t size = 1 + rng() % 10;
        CHECK(assemble(t.recording_id, chunk(t, size)) == t);
    }
}

TEST_CASE("audio_duration: explicit field, fallback, error") {
    Transcript t;
    t.recording_id = "r";
    t.audio_duration = 1311.0;
    CHECK(audio_duration(t) == 1311.0);

    Transcript no_field;
    no_field.recording_id = "r";
    no_field.segments.push_back({0, 2098.5, "A", "x"});
    no_field.segments.push_back({1, 7.0, "B", "y"});
    CHECK(audio_duration(no_field) == 2098.5);

    CHECK_THROWS_AS(audio_duration(Transcript{"r", {}, {}}), EmptyTranscript);
}

TEST_CASE("fuzz: malformed inputs always raise FormatError with a line") {
    std::mt19937_64 rng(99);
    const std::string charset =
        "[]-. 0123456789abcXYZ\né\n\n[0.00] - [1.00] [A]\n";
    int parsed = 0, rejected = 0;
    for (int iter = 0; iter < 2000; ++iter) {
        std::string s;
        const std::size_t len = rng() % 80;
        for (std::size_t i = 0; i < len; ++i) s += charset[rng() % charset.size()];
        try {
            (void)parse_transcript(s, "fuzz");
            ++parsed;
        } catch (const FormatError& e) {
            CHECK(e.line() >= 1);
            ++rejected;
        }
    }
    CHECK(parsed + rejected == 2000);
    CHECK(rejected > 0);
}
