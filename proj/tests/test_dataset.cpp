#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "actrec/common.hpp"
#include "actrec/dataset.hpp"
#include "actrec/rng.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using actrec::Frame;
using actrec::Joint;
using actrec::LabelMap;
using actrec::SkeletonSequence;

namespace {

// One native CAD-60 row: frame number, 11 joints with orientation blocks,
// 4 joints with positions only. Coordinates encode (row, joint) so the test
// can verify which value landed where.
std::string cad60_row(int frame_number) {
    std::ostringstream out;
    out << frame_number;
    for (int j = 0; j < 11; ++j) {
        for (int k = 0; k < 9; ++k) out << ',' << 0.5;  // orientation, discarded
        out << ',' << 1;                                // orientation confidence, discarded
        out << ',' << (100 * frame_number + j) << ',' << (200 * frame_number + j) << ','
            << (300 * frame_number + j) << ',' << 1;
    }
    for (int j = 11; j < 15; ++j) {
        out << ',' << (100 * frame_number + j) << ',' << (200 * frame_number + j) << ','
            << (300 * frame_number + j) << ',' << 1;
    }
    return out.str();
}

SkeletonSequence random_sequence(std::size_t frames, const std::string& label,
                                 const std::string& source, std::uint64_t seed) {
    actrec::Rng rng(seed);
    SkeletonSequence seq;
    seq.label = label;
    seq.source_id = source;
    for (std::size_t f = 0; f < frames; ++f) {
        Frame frame;
        for (Joint& j : frame.joints) {
            j.x = rng.next_normal(0.0, 500.0);
            j.y = rng.next_normal(0.0, 500.0);
            j.z = rng.next_normal(0.0, 500.0);
            j.confidence = rng.next_double();
        }
        seq.frames.push_back(frame);
    }
    return seq;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
    fs::create_directories(p.parent_path());
    std::ofstream out(p);
    out << text;
}

}  // namespace

TEST_CASE("cad60 fixture parses with exact coordinates") {
    std::stringstream in(cad60_row(1) + "\n" + cad60_row(2) + "\nEND\n");
    const SkeletonSequence seq = actrec::parse_cad60(in, "fixture");
    REQUIRE(seq.frames.size() == 2);
    for (int f = 0; f < 2; ++f) {
        for (int j = 0; j < 15; ++j) {
            const Joint& joint = seq.frames[std::size_t(f)].joints[std::size_t(j)];
            REQUIRE(joint.x == double(100 * (f + 1) + j));
            REQUIRE(joint.y == double(200 * (f + 1) + j));
            REQUIRE(joint.z == double(300 * (f + 1) + j));
            REQUIRE(joint.confidence == 1.0);
        }
    }
}

TEST_CASE("cad60 rows may carry a trailing comma") {
    std::stringstream in(cad60_row(1) + ",\nEND\n");
    const SkeletonSequence seq = actrec::parse_cad60(in, "fixture");
    CHECK(seq.frames.size() == 1);
}

TEST_CASE("cad60 error cases") {
    SUBCASE("only END means zero frames") {
        std::stringstream in("END\n");
        CHECK_THROWS_AS(actrec::parse_cad60(in, "f"), actrec::ParseError);
    }
    SUBCASE("a deleted field is reported with its row") {
        std::string row = cad60_row(1);
        row.erase(row.rfind(','));  // drop the last field
        std::stringstream in(row + "\nEND\n");
        CHECK_THROWS_WITH_AS(actrec::parse_cad60(in, "f"),
                             doctest::Contains("row 1"), actrec::ParseError);
    }
    SUBCASE("a non-numeric field is rejected") {
        std::string row = cad60_row(1);
        row.replace(row.find("100"), 3, "abc");
        std::stringstream in(row + "\nEND\n");
        CHECK_THROWS_AS(actrec::parse_cad60(in, "f"), actrec::ParseError);
    }
}

TEST_CASE("cad60 missing END warns but still returns the frames") {
    testsup::WarnCapture warnings;
    std::stringstream in(cad60_row(1) + "\n");
    const SkeletonSequence seq = actrec::parse_cad60(in, "f");
    CHECK(seq.frames.size() == 1);
    CHECK(warnings.any_contains("END"));
}

TEST_CASE("cad60 clamps out-of-range confidence with a warning") {
    std::string row = cad60_row(1);
    // The final field is joint 15's position confidence.
    row.replace(row.rfind(",1") + 1, 1, "3");
    testsup::WarnCapture warnings;
    std::stringstream in(row + "\nEND\n");
    const SkeletonSequence seq = actrec::parse_cad60(in, "f");
    CHECK(seq.frames[0].joints[14].confidence == 1.0);
    CHECK(warnings.any_contains("clamped"));
}

TEST_CASE("canonical round trip is exact") {
    const SkeletonSequence seq = random_sequence(3, "talking", "talking/a.txt", 12);
    std::stringstream buf;
    actrec::write_canonical(buf, seq);
    const SkeletonSequence back = actrec::read_canonical(buf);
    CHECK(back == seq);
}

TEST_CASE("canonical header and field counts are enforced") {
    SUBCASE("declared frames exceed actual lines") {
        std::stringstream buf;
        actrec::write_canonical(buf, random_sequence(2, "x", "s", 1));
        std::string text = buf.str();
        text = text.substr(0, text.rfind('\n', text.size() - 2) + 1);  // drop last data line
        std::stringstream cut(text);
        CHECK_THROWS_AS(actrec::read_canonical(cut), actrec::ParseError);
    }
    SUBCASE("each line carries 60 fields") {
        std::stringstream buf;
        actrec::write_canonical(buf, random_sequence(1, "x", "s", 1));
        const std::string text = buf.str();
        const std::size_t header_end = text.find('\n');
        const std::string data = text.substr(header_end + 1);
        CHECK(std::count(data.begin(), data.end(), ',') == 59);
    }
    SUBCASE("bad header") {
        std::stringstream in("label=x frames=2 source=s\n");
        CHECK_THROWS_AS(actrec::read_canonical(in), actrec::ParseError);
    }
}

TEST_CASE("canonical labels may contain spaces") {
    const SkeletonSequence seq = random_sequence(2, "talking on the phone", "src 1", 3);
    std::stringstream buf;
    actrec::write_canonical(buf, seq);
    CHECK(actrec::read_canonical(buf) == seq);
}

TEST_CASE("standard label map applies the published merges") {
    const LabelMap map = LabelMap::standard();
    CHECK(map.consolidate("talking on the phone") == "talking");
    CHECK(map.consolidate("cereal") == "eating");
    CHECK(map.consolidate("unstacking") == "stacking");
    CHECK(map.consolidate("placing") == "stacking");
    CHECK(map.consolidate("brushing teeth") == "brushing teeth");  // passthrough
}

TEST_CASE("consolidate is idempotent for the shipped map") {
    const LabelMap map = LabelMap::standard();
    for (const auto& [raw, merged] : map.entries()) {
        CHECK(map.consolidate(map.consolidate(raw)) == map.consolidate(raw));
        CHECK(map.consolidate(merged) == merged);
    }
}

TEST_CASE("label map file format") {
    std::stringstream in(
        "# merges\n"
        "\n"
        "talking on the phone -> talking\n"
        "  cereal ->   eating\n");
    const LabelMap m = LabelMap::parse(in);
    CHECK(m.size() == 2);
    CHECK(m.consolidate("cereal") == "eating");

    std::stringstream bad("no arrow here\n");
    CHECK_THROWS_AS(LabelMap::parse(bad), actrec::ParseError);
}

TEST_CASE("load_corpus merges directories into consolidated classes") {
    TempDir tmp("actrec_test_corpus");
    auto put = [&](const std::string& dir, const std::string& name, std::uint64_t seed) {
        std::ostringstream buf;
        actrec::write_canonical(buf, random_sequence(2, "ignored", "ignored", seed));
        write_file(tmp.path / dir / name, buf.str());
    };
    put("talking on the phone", "a.txt", 1);
    put("talking on phone", "b.txt", 2);
    put("cereal", "c.txt", 3);

    const actrec::Corpus corpus = actrec::load_corpus(tmp.path, LabelMap::standard());
    REQUIRE(corpus.sequences.size() == 3);
    CHECK(corpus.classes == std::vector<std::string>{"eating", "talking"});
    int talking = 0;
    for (const auto& s : corpus.sequences) {
        talking += s.label == "talking" ? 1 : 0;
    }
    CHECK(talking == 2);

    const actrec::Corpus again = actrec::load_corpus(tmp.path, LabelMap::standard());
    CHECK(again.classes == corpus.classes);
    REQUIRE(again.sequences.size() == corpus.sequences.size());
    for (std::size_t i = 0; i < corpus.sequences.size(); ++i) {
        CHECK(again.sequences[i] == corpus.sequences[i]);
    }
}

TEST_CASE("load_corpus accepts native files and names classes by directory") {
    TempDir tmp("actrec_test_corpus_native");
    write_file(tmp.path / "cereal" / "s1.txt", cad60_row(1) + "\nEND\n");
    const actrec::Corpus corpus = actrec::load_corpus(tmp.path, LabelMap::standard());
    REQUIRE(corpus.sequences.size() == 1);
    CHECK(corpus.sequences[0].label == "eating");
    CHECK(corpus.classes == std::vector<std::string>{"eating"});
}

TEST_CASE("empty corpus root is an error") {
    TempDir tmp("actrec_test_corpus_empty");
    CHECK_THROWS_AS(actrec::load_corpus(tmp.path, LabelMap::standard()), actrec::CorpusError);
    CHECK_THROWS_AS(actrec::load_corpus(tmp.path / "missing", LabelMap::standard()),
                    actrec::CorpusError);
}

TEST_CASE("class_index is a sorted lookup") {
    const std::vector<std::string> classes{"eating", "stacking", "talking"};
    CHECK(actrec::class_index(classes, "eating") == 0);
    CHECK(actrec::class_index(classes, "talking") == 2);
    CHECK_THROWS_AS(actrec::class_index(classes, "jumping"), actrec::LabelError);
}
