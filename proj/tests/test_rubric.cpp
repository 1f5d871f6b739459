#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "mpo/errors.hpp"
#include "mpo/rubric.hpp"
#include "support.hpp"

using namespace mpo;
using test_support::read_file;

namespace {

Rubric load_fixture(const std::string& name) {
    return parse_rubric(read_file(test_support::data_dir() + "/rubrics/" + name));
}

// Random rubric whose descriptor text never opens a line with a level marker,
// so the canonical rendering is unambiguous.
Rubric random_rubric(std::mt19937_64& rng) {
    static const std::vector<std::string> words = {
        "argument", "clarity", "evidence", "structure", "depth",  "tone",
        "quality",  "support", "logic",    "style",     "detail", "focus"};
    auto word = [&]() { return words[rng() % words.size()]; };

    Rubric rubric;
    int items = 1 + static_cast<int>(rng() % 5);
    for (int i = 0; i < items; ++i) {
        RubricItem item;
        item.name = word() + " " + word() + " " + std::to_string(i);
        item.max_points = 1 + static_cast<int>(rng() % 10);
        item.explicit_points = rng() % 2 == 0;

        // Strictly decreasing levels from max_points to 0.
        std::vector<int> levels;
        for (int lv = item.max_points; lv >= 0; --lv)
            if (lv == item.max_points || lv == 0 || rng() % 2 == 0) levels.push_back(lv);
        for (int lv : levels) {
            std::string text;
            int sentences = static_cast<int>(rng() % 3);
            for (int s2 = 0; s2 < sentences; ++s2) text += word() + " " + word() + ". ";
            if (rng() % 4 == 0 && !text.empty())
                text += "\n  - Example: \"" + word() + " " + word() + "\"";
            item.descriptors.push_back({lv, text});
        }
        rubric.items.push_back(std::move(item));
    }
    return rubric;
}

}  // namespace

TEST_CASE("first-refinement essay fixture: 6 items, 5 points each, total 30") {
    Rubric r = load_fixture("essay_v1.txt");
    REQUIRE(r.items.size() == 6);
    for (const auto& item : r.items) {
        CHECK(item.max_points == 5);
        CHECK(item.descriptors.size() == 6);
        CHECK(item.descriptors.front().level == 5);
        CHECK(item.descriptors.back().level == 0);
        CHECK_FALSE(item.explicit_points);
    }
    CHECK(total_attainable(r) == 30);
    CHECK(r.items[0].name == "Task Alignment and Argument Clarity");
    CHECK(r.items[5].name == "Language and Mechanics");
}

TEST_CASE("mature essay fixture: 6 items, explicit 10 points, total 60") {
    Rubric r = load_fixture("essay_v40.txt");
    REQUIRE(r.items.size() == 6);
    for (const auto& item : r.items) {
        CHECK(item.max_points == 10);
        CHECK(item.explicit_points);
        CHECK(item.descriptors.front().level == 10);
        CHECK(item.descriptors.back().level == 0);
    }
    CHECK(total_attainable(r) == 60);
    CHECK(r.items[0].name == "Task Alignment and Argument Clarity");
}

TEST_CASE("ethics fixtures parse with verdict tags treated as opaque text") {
    Rubric v1 = load_fixture("ethics_v1.txt");
    CHECK(v1.items.size() == 4);
    CHECK(total_attainable(v1) == 20);
    CHECK(v1.items[0].name == "Logical Coherence (0-5)");
    // The embedded example (verdict tags and all) stays verbatim in the text.
    CHECK(v1.items[0].descriptors[0].text.find("<verdict>WRONG</verdict>") !=
          std::string::npos);
    CHECK(v1.items[0].descriptors[0].text.find("- Example:") != std::string::npos);

    Rubric v20 = load_fixture("ethics_v20.txt");
    CHECK(v20.items.size() == 3);
    CHECK(total_attainable(v20) == 15);
    CHECK(v20.items[1].descriptors[0].text.find("<verdict>RIGHT</verdict>") !=
          std::string::npos);
}

TEST_CASE("expert rubric loads in lenient fixture mode only") {
    std::string text = read_file(test_support::data_dir() + "/rubrics/expert_essay.txt");
    CHECK_THROWS_AS(parse_rubric(text), ValidationError);  // scales stop at 1

    Rubric r = parse_rubric_lenient(text);
    REQUIRE(r.items.size() == 5);
    CHECK(r.items[0].name == "\"Ideas and Content\"");
    CHECK(r.items[0].max_points == 6);
    CHECK(r.items[4].max_points == 4);
    CHECK(total_attainable(r) == 28);
    CHECK(r.items[0].descriptors.front().level == 6);
    CHECK(r.items[0].descriptors.back().level == 1);
}

TEST_CASE("minimal rubric and parse errors") {
    Rubric minimal = parse_rubric("<rubric><item>X\n- 1: a\n- 0: b</item></rubric>");
    REQUIRE(minimal.items.size() == 1);
    CHECK(minimal.items[0].max_points == 1);
    CHECK(minimal.items[0].descriptors.size() == 2);

    CHECK_THROWS_AS(parse_rubric("no tags at all"), ParseError);
    try {
        parse_rubric("prefix <rubric><item>X\n- 1: a\n- 0: b</item>");
    } catch (const ParseError& e) {
        CHECK(e.byte_offset() == std::string("prefix <rubric><item>X\n- 1: a\n- 0: b</item>").size());
    }
    CHECK_THROWS_AS(parse_rubric("<rubric></rubric>"), ParseError);
    CHECK_THROWS_AS(parse_rubric("<rubric><item>X\n- 1: a</item>"), ParseError);

    // Non-monotone levels name the offending item.
    try {
        parse_rubric("<rubric><item>Weird\n- 2: a\n- 3: b\n- 0: c</item></rubric>");
        CHECK(false);
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("Weird") != std::string::npos);
    }
    // Explicit points must match the top level.
    CHECK_THROWS_AS(parse_rubric("<rubric><item>X (5 points)\n- 4: a\n- 0: b</item></rubric>"),
                    ValidationError);
    // Strict mode requires the scale to reach 0.
    CHECK_THROWS_AS(parse_rubric("<rubric><item>X\n- 2: a\n- 1: b</item></rubric>"),
                    ValidationError);
}

TEST_CASE("starred level markers parse like plain ones") {
    Rubric r = parse_rubric(
        "<rubric><item>Styled (10 points)\n- **10**: top\n- **5**: middle\n- **0**: bottom"
        "</item></rubric>");
    CHECK(r.items[0].max_points == 10);
    CHECK(r.items[0].descriptors.size() == 3);
    CHECK(r.items[0].descriptors[1].text == "middle");
}

TEST_CASE("render/parse round-trip on all strict fixtures") {
    for (const char* name : {"essay_v1.txt", "essay_v40.txt", "ethics_v1.txt",
                             "ethics_v20.txt", "essay_initial.txt"}) {
        Rubric first = load_fixture(name);
        Rubric second = parse_rubric(render_rubric(first));
        CHECK_MESSAGE(first.structurally_equal(second), name);
    }
}

TEST_CASE("render is deterministic and round-trips generated rubrics") {
    std::mt19937_64 rng(4242);
    for (int trial = 0; trial < 200; ++trial) {
        Rubric rubric = random_rubric(rng);
        std::string text = render_rubric(rubric);
        CHECK(text == render_rubric(rubric));
        Rubric back = parse_rubric(text);
        CHECK(rubric.structurally_equal(back));
    }
}

TEST_CASE("empty description text survives the round-trip") {
    Rubric r = parse_rubric("<rubric><item>X\n- 1:\n- 0: something</item></rubric>");
    CHECK(r.items[0].descriptors[0].text.empty());
    Rubric back = parse_rubric(render_rubric(r));
    CHECK(r.structurally_equal(back));
}

TEST_CASE("normalize_score bounds and monotonicity") {
    Rubric sixty = load_fixture("essay_v40.txt");
    CHECK(normalize_score(30, sixty) == doctest::Approx(0.5));
    CHECK(normalize_score(0, sixty) == doctest::Approx(0.0));
    CHECK_THROWS_AS(normalize_score(61, sixty), DomainError);
    CHECK_THROWS_AS(normalize_score(-1, sixty), DomainError);

    Rubric five = load_fixture("essay_initial.txt");
    CHECK(normalize_score(3, five) == doctest::Approx(0.6));

    double prev = -1.0;
    for (int total = 0; total <= 60; ++total) {
        double v = normalize_score(total, sixty);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("mean_item_length: hand case and fixture ordering") {
    Rubric two;
    RubricItem a;  // rendered: "alpha\n- 0: one two three four five six seven\n" = 10 tokens
    a.name = "alpha";
    a.max_points = 0;
    a.descriptors = {{0, "one two three four five six seven"}};
    RubricItem b;  // "beta gamma" + marker + 16 words = 20 tokens
    b.name = "beta gamma";
    b.max_points = 0;
    b.descriptors = {{0, "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10 w11 w12 w13 w14 w15 w16"}};
    two.items = {a, b};
    // validate() is not involved here; mean_item_length only counts tokens.
    CHECK(mean_item_length(two) == doctest::Approx(15.0));

    Rubric single;
    single.items = {a};
    CHECK(mean_item_length(single) == doctest::Approx(10.0));

    Rubric v1 = load_fixture("essay_v1.txt");
    Rubric v40 = load_fixture("essay_v40.txt");
    CHECK(mean_item_length(v40) > mean_item_length(v1));
}

TEST_CASE("rubric history JSONL round-trip and gap detection") {
    RubricHistoryEntry e0{0, 0, "initial", "<rubric>...</rubric>", 5, 12.0};
    RubricHistoryEntry e1{1, 10, "meta-merged", "<rubric>...</rubric>", 60, 80.5};
    std::stringstream file;
    file << to_json_line(e0) << "\n" << to_json_line(e1) << "\n";

    auto loaded = load_rubric_history(file);
    REQUIRE(loaded.size() == 2);
    CHECK(loaded[0].version == 0);
    CHECK(loaded[1].timestamp == 10);
    CHECK(loaded[1].total_attainable == 60);
    CHECK(loaded[1].mean_item_length == doctest::Approx(80.5));

    std::stringstream gapped;
    gapped << to_json_line(e0) << "\n";
    RubricHistoryEntry e2 = e1;
    e2.version = 2;
    gapped << to_json_line(e2) << "\n";
    CHECK_THROWS_AS(load_rubric_history(gapped), ValidationError);
}
