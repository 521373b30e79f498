#include "actrec/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace actrec {

const std::array<const char*, kJointCount> kJointNames = {
    "head",          "neck",           "torso",
    "left_shoulder", "left_elbow",     "right_shoulder",
    "right_elbow",   "left_hip",       "left_knee",
    "right_hip",     "right_knee",     "left_hand",
    "right_hand",    "left_foot",      "right_foot",
};

namespace {

// Native CAD-60 row layout (field counts per the dataset's published README;
// kept in one place so a correction is a one-line change):
//   field 0                    frame number
//   fields 1 .. 154            joints 1-11, 14 fields each:
//                              9 orientation values, orientation confidence,
//                              x, y, z, position confidence
//   fields 155 .. 170          joints 12-15, 4 fields each: x, y, z, position confidence
// The file ends with a sentinel line "END"; rows may carry a trailing comma.
constexpr std::size_t kOriJoints = 11;
constexpr std::size_t kPosJoints = 4;
constexpr std::size_t kOriFieldsPerJoint = 14;
constexpr std::size_t kPosFieldsPerJoint = 4;
constexpr std::size_t kCad60RowFields =
    1 + kOriJoints * kOriFieldsPerJoint + kPosJoints * kPosFieldsPerJoint;  // 171

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv_row(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(cur);
    // A trailing comma produces one empty last field; drop it.
    if (fields.size() > 1 && trim(fields.back()).empty()) {
        fields.pop_back();
    }
    return fields;
}

double parse_field(const std::string& field, std::size_t row, std::size_t col,
                   const std::string& source) {
    const std::string t = trim(field);
    if (t.empty()) {
        throw ParseError(source + ": row " + std::to_string(row) + ", field " +
                         std::to_string(col) + " is empty");
    }
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size()) {
        throw ParseError(source + ": row " + std::to_string(row) + ", field " +
                         std::to_string(col) + " is not numeric: '" + t + "'");
    }
    return v;
}

double clamp_confidence(double c, std::size_t row, const std::string& source) {
    if (c < 0.0 || c > 1.0) {
        warn(source + ": row " + std::to_string(row) + ": confidence " +
             format_double(c) + " clamped to [0,1]");
        return std::clamp(c, 0.0, 1.0);
    }
    return c;
}

void require_finite_joint(const Joint& j, std::size_t row, const std::string& source) {
    if (!std::isfinite(j.x) || !std::isfinite(j.y) || !std::isfinite(j.z)) {
        throw ParseError(source + ": row " + std::to_string(row) + ": non-finite coordinate");
    }
}

}  // namespace

SkeletonSequence parse_cad60(std::istream& in, const std::string& source_id) {
    SkeletonSequence seq;
    seq.source_id = source_id;

    std::string line;
    std::size_t row = 0;
    bool saw_end = false;
    while (std::getline(in, line)) {
        const std::string t = trim(line);
        if (t.empty()) {
            continue;
        }
        if (t == "END") {
            saw_end = true;
            break;
        }
        ++row;
        const auto fields = split_csv_row(line);
        if (fields.size() != kCad60RowFields) {
            throw ParseError(source_id + ": row " + std::to_string(row) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(kCad60RowFields));
        }

        Frame frame;
        std::size_t col = 1;  // field 0 is the frame number; order is preserved, value unused
        parse_field(fields[0], row, 0, source_id);
        for (std::size_t j = 0; j < kOriJoints; ++j) {
            // 9 orientation values + orientation confidence: validated, then discarded
            for (std::size_t k = 0; k < 10; ++k, ++col) {
                parse_field(fields[col], row, col, source_id);
            }
            Joint& joint = frame.joints[j];
            joint.x = parse_field(fields[col], row, col, source_id); ++col;
            joint.y = parse_field(fields[col], row, col, source_id); ++col;
            joint.z = parse_field(fields[col], row, col, source_id); ++col;
            joint.confidence =
                clamp_confidence(parse_field(fields[col], row, col, source_id), row, source_id);
            ++col;
            require_finite_joint(joint, row, source_id);
        }
        for (std::size_t j = kOriJoints; j < kJointCount; ++j) {
            Joint& joint = frame.joints[j];
            joint.x = parse_field(fields[col], row, col, source_id); ++col;
            joint.y = parse_field(fields[col], row, col, source_id); ++col;
            joint.z = parse_field(fields[col], row, col, source_id); ++col;
            joint.confidence =
                clamp_confidence(parse_field(fields[col], row, col, source_id), row, source_id);
            ++col;
            require_finite_joint(joint, row, source_id);
        }
        seq.frames.push_back(frame);
    }

    if (seq.frames.empty()) {
        throw ParseError(source_id + ": no skeleton frames");
    }
    if (!saw_end) {
        warn(source_id + ": missing END sentinel; file may be truncated");
    }
    return seq;
}

void write_canonical(std::ostream& out, const SkeletonSequence& seq) {
    if (seq.frames.empty()) {
        throw ParamError("write_canonical: sequence has no frames");
    }
    out << "frames=" << seq.frames.size() << " label=" << seq.label
        << " source=" << seq.source_id << "\n";
    for (const Frame& f : seq.frames) {
        bool first = true;
        for (const Joint& j : f.joints) {
            for (double v : {j.x, j.y, j.z, j.confidence}) {
                if (!first) {
                    out << ',';
                }
                out << format_double(v);
                first = false;
            }
        }
        out << "\n";
    }
    if (!out) {
        throw IoError("write_canonical: stream failure");
    }
}

SkeletonSequence read_canonical(std::istream& in) {
    std::string header;
    if (!std::getline(in, header)) {
        throw ParseError("canonical: missing header line");
    }
    header = trim(header);
    if (header.rfind("frames=", 0) != 0) {
        throw ParseError("canonical: header must start with frames=");
    }
    const std::size_t label_pos = header.find(" label=");
    // labels may contain spaces, so anchor on the *last* " source=".
    const std::size_t source_pos = header.rfind(" source=");
    if (label_pos == std::string::npos || source_pos == std::string::npos ||
        source_pos < label_pos) {
        throw ParseError("canonical: header must be frames=<n> label=<s> source=<s>");
    }

    SkeletonSequence seq;
    const std::string count_str = header.substr(7, label_pos - 7);
    std::size_t count = 0;
    const auto [p, ec] = std::from_chars(count_str.data(), count_str.data() + count_str.size(), count);
    if (ec != std::errc{} || p != count_str.data() + count_str.size() || count == 0) {
        throw ParseError("canonical: bad frame count '" + count_str + "'");
    }
    seq.label = header.substr(label_pos + 7, source_pos - (label_pos + 7));
    seq.source_id = header.substr(source_pos + 8);

    constexpr std::size_t kFieldsPerLine = kJointCount * 4;  // 60
    std::string line;
    for (std::size_t r = 0; r < count; ++r) {
        if (!std::getline(in, line)) {
            throw ParseError("canonical: header declares " + std::to_string(count) +
                             " frames but file has " + std::to_string(r));
        }
        const auto fields = split_csv_row(line);
        if (fields.size() != kFieldsPerLine) {
            throw ParseError("canonical: row " + std::to_string(r + 1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(kFieldsPerLine));
        }
        Frame frame;
        std::size_t col = 0;
        for (Joint& j : frame.joints) {
            // Confidence is stored as-is: canonical files round-trip exactly,
            // so the [0,1] clamp applies only at native-format ingestion.
            j.x = parse_field(fields[col], r + 1, col, "canonical"); ++col;
            j.y = parse_field(fields[col], r + 1, col, "canonical"); ++col;
            j.z = parse_field(fields[col], r + 1, col, "canonical"); ++col;
            j.confidence = parse_field(fields[col], r + 1, col, "canonical"); ++col;
            require_finite_joint(j, r + 1, "canonical");
        }
        seq.frames.push_back(frame);
    }
    return seq;
}

void LabelMap::add(std::string raw, std::string consolidated) {
    entries_.emplace_back(std::move(raw), std::move(consolidated));
}

std::string LabelMap::consolidate(const std::string& label) const {
    for (const auto& [raw, merged] : entries_) {
        if (raw == label) {
            return merged;
        }
    }
    return label;
}

LabelMap LabelMap::standard() {
    LabelMap m;
    m.add("talking on the phone", "talking");
    m.add("talking on phone", "talking");
    m.add("cereal", "eating");
    m.add("unstacking", "stacking");
    m.add("placing", "stacking");
    return m;
}

LabelMap LabelMap::parse(std::istream& in) {
    LabelMap m;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        const std::size_t arrow = t.find("->");
        if (arrow == std::string::npos) {
            throw ParseError("label map line " + std::to_string(lineno) +
                             ": expected 'raw -> consolidated'");
        }
        const std::string raw = trim(t.substr(0, arrow));
        const std::string merged = trim(t.substr(arrow + 2));
        if (raw.empty() || merged.empty()) {
            throw ParseError("label map line " + std::to_string(lineno) + ": empty label");
        }
        m.add(raw, merged);
    }
    return m;
}

LabelMap LabelMap::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open label map: " + path.string());
    }
    return parse(in);
}

namespace {

bool looks_canonical(const std::filesystem::path& file) {
    std::ifstream in(file);
    std::string head(7, '\0');
    in.read(head.data(), 7);
    return in.gcount() == 7 && head == "frames=";
}

}  // namespace

Corpus load_corpus(const std::filesystem::path& root, const LabelMap& map) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(root)) {
        throw CorpusError("corpus root is not a directory: " + root.string());
    }

    std::vector<fs::path> activity_dirs;
    for (const auto& entry : fs::directory_iterator(root)) {
        if (entry.is_directory()) {
            activity_dirs.push_back(entry.path());
        }
    }
    std::sort(activity_dirs.begin(), activity_dirs.end());

    Corpus corpus;
    for (const auto& dir : activity_dirs) {
        const std::string raw_label = dir.filename().string();
        const std::string label = map.consolidate(raw_label);

        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file()) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());

        for (const auto& file : files) {
            std::ifstream in(file);
            if (!in) {
                throw CorpusError("cannot read corpus file: " + file.string());
            }
            SkeletonSequence seq;
            try {
                if (looks_canonical(file)) {
                    seq = read_canonical(in);
                    seq.source_id = fs::relative(file, root).string();
                } else {
                    seq = parse_cad60(in, fs::relative(file, root).string());
                }
            } catch (const ParseError& e) {
                throw CorpusError("while loading " + file.string() + ": " + e.what());
            }
            // The activity directory names the class, for canonical files too.
            seq.label = label;
            corpus.sequences.push_back(std::move(seq));
        }
    }

    if (corpus.sequences.empty()) {
        throw CorpusError("corpus is empty: " + root.string());
    }

    std::vector<std::string> classes;
    for (const auto& s : corpus.sequences) {
        classes.push_back(s.label);
    }
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    corpus.classes = std::move(classes);
    return corpus;
}

std::size_t class_index(const std::vector<std::string>& classes, const std::string& label) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label) {
        throw LabelError("unknown class label: " + label);
    }
    return static_cast<std::size_t>(it - classes.begin());
}

}  // namespace actrec
