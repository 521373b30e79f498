#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "actrec/common.hpp"

namespace actrec {

inline constexpr std::size_t kJointCount = 15;

// Canonical joint order; every Frame and every on-disk row follows it.
extern const std::array<const char*, kJointCount> kJointNames;

struct Joint {
    double x = 0.0;  // mm
    double y = 0.0;  // mm
    double z = 0.0;  // mm
    double confidence = 0.0;  // tracker certainty in [0,1]

    bool operator==(const Joint&) const = default;
};

struct Frame {
    std::array<Joint, kJointCount> joints{};

    bool operator==(const Frame&) const = default;
};

// One recording: ordered frames plus its activity label.
struct SkeletonSequence {
    std::vector<Frame> frames;
    std::string label;
    std::string source_id;

    bool operator==(const SkeletonSequence&) const = default;
};

// Ordered raw-label -> consolidated-label rewrites. Labels missing from the
// map pass through unchanged.
class LabelMap {
public:
    void add(std::string raw, std::string consolidated);
    std::string consolidate(const std::string& label) const;
    std::size_t size() const { return entries_.size(); }
    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    // The shipped default: the talking / eating / stacking merges.
    static LabelMap standard();

    // File format: one `raw_label -> consolidated_label` per line,
    // `#` comments and blank lines allowed.
    static LabelMap parse(std::istream& in);
    static LabelMap load(const std::filesystem::path& path);

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Parses a native CAD-60 skeleton dump (comma-separated rows, "END"
// sentinel). Orientation fields are read and discarded; positions and
// confidences populate the 15 joints. The result carries no label.
SkeletonSequence parse_cad60(std::istream& in, const std::string& source_id);

// Canonical interchange format:
//   header  `frames=<n> label=<s> source=<s>`
//   then n lines of 60 comma-separated floats, 15 joints x (x,y,z,conf)
// write/read round-trips every finite double exactly.
SkeletonSequence read_canonical(std::istream& in);
void write_canonical(std::ostream& out, const SkeletonSequence& seq);

struct Corpus {
    std::vector<SkeletonSequence> sequences;  // labels already consolidated
    std::vector<std::string> classes;         // sorted, duplicate-free
};

// Walks root/<activity>/<file>, parsing native or canonical files (sniffed by
// content). The directory name is the raw activity label; sequence order and
// class indices are fixed by sorted paths, so two loads of the same tree are
// identical.
Corpus load_corpus(const std::filesystem::path& root, const LabelMap& map);

// Index of label in the sorted class list; LabelError when absent.
std::size_t class_index(const std::vector<std::string>& classes, const std::string& label);

}  // namespace actrec
