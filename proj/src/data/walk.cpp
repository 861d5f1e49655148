#include "gaitformer/data/walk.hpp"

#include "gaitformer/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <regex>
#include <sstream>

namespace gaitformer::data {

namespace {

constexpr std::size_t kColumns = kChannelCount + 1;
constexpr double kTimeStep = 1.0 / kSampleRateHz;
constexpr double kTimeTolerance = 1e-6;

const std::regex& walk_name_pattern() {
    static const std::regex pattern(R"(^(Ga|Ju|Si)(Pt|Co)([0-9]+)_([0-9]+)\.txt$)");
    return pattern;
}

Study parse_study(const std::string& code) {
    if (code == "Ga") return Study::Ga;
    if (code == "Ju") return Study::Ju;
    return Study::Si;
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

} // namespace

std::string_view study_code(Study study) {
    switch (study) {
    case Study::Ga: return "Ga";
    case Study::Ju: return "Ju";
    case Study::Si: return "Si";
    }
    return "??";
}

std::string_view group_code(Group group) { return group == Group::parkinson ? "Pt" : "Co"; }

bool is_walk_filename(std::string_view filename) {
    return std::regex_match(std::string(filename), walk_name_pattern());
}

WalkName parse_walk_filename(std::string_view filename) {
    std::smatch m;
    const std::string name(filename);
    if (!std::regex_match(name, m, walk_name_pattern())) {
        throw ParseError("unparseable walk file name '" + name +
                         "' (expected <Ga|Ju|Si><Pt|Co><subject>_<walk>.txt)");
    }
    WalkName out;
    out.study = parse_study(m[1].str());
    out.group = m[2].str() == "Pt" ? Group::parkinson : Group::control;
    out.subject_digits = m[3].str();
    out.subject = std::stoi(out.subject_digits);
    out.walk = std::stoi(m[4].str());
    return out;
}

std::string format_walk_filename(Study study, Group group, int subject, int walk) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*s%.*s%02d_%02d.txt", 2, study_code(study).data(), 2,
                  group_code(group).data(), subject, walk);
    return buf;
}

std::string WalkRecord::walk_id() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "_%02zu", walk_index);
    return subject_id + buf;
}

WalkRecord parse_walk_file(const std::filesystem::path& path, std::string_view contents) {
    const std::string filename = path.filename().string();
    const WalkName name = parse_walk_filename(filename);

    WalkRecord walk;
    walk.study = name.study;
    walk.group = name.group;
    walk.subject_id = std::string(study_code(name.study)) + std::string(group_code(name.group)) +
                      name.subject_digits;
    walk.walk_index = static_cast<std::size_t>(name.walk);
    walk.channels.assign(kChannelCount, {});

    std::size_t line_no = 0;
    std::size_t pos = 0;
    double previous_time = 0.0;
    std::size_t rows = 0;
    std::array<double, kColumns> row{};
    while (pos < contents.size()) {
        std::size_t end = contents.find('\n', pos);
        if (end == std::string_view::npos) {
            end = contents.size();
        }
        const std::string_view line = contents.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        std::size_t col = 0;
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && is_space(line[i])) {
                ++i;
            }
            if (i >= line.size()) {
                break;
            }
            std::size_t j = i;
            while (j < line.size() && !is_space(line[j])) {
                ++j;
            }
            const std::string_view token = line.substr(i, j - i);
            if (col < kColumns) {
                double value = 0.0;
                const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
                if (ec != std::errc() || ptr != token.data() + token.size()) {
                    throw ParseError(filename + ":" + std::to_string(line_no) +
                                     ": non-numeric token '" + std::string(token) + "'");
                }
                row[col] = value;
            }
            ++col;
            i = j;
        }
        if (col == 0) {
            continue; // blank line
        }
        if (col != kColumns) {
            throw ParseError(filename + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(kColumns) + " columns, found " + std::to_string(col));
        }
        if (rows > 0 && std::abs(row[0] - previous_time - kTimeStep) > kTimeTolerance) {
            throw ParseError(filename + ":" + std::to_string(line_no) +
                             ": time stamp does not advance by 0.01 s");
        }
        previous_time = row[0];
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            walk.channels[c].push_back(row[c + 1]);
        }
        ++rows;
    }
    if (rows == 0) {
        throw ParseError(filename + ": no samples");
    }
    return walk;
}

WalkRecord read_walk_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open walk file " + path.string());
    }
    const std::string contents((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_walk_file(path, contents);
}

std::vector<WalkRecord> load_walk_directory(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw DataError("data directory " + dir.string() + " does not exist");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_walk_filename(entry.path().filename().string())) {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end(),
              [](const auto& a, const auto& b) { return a.filename() < b.filename(); });
    if (files.empty()) {
        throw DataError("no walk files found in " + dir.string());
    }
    std::vector<WalkRecord> walks;
    walks.reserve(files.size());
    for (const auto& f : files) {
        walks.push_back(read_walk_file(f));
    }
    return walks;
}

void write_walk_text(const WalkRecord& walk, std::ostream& out) {
    char buf[64];
    for (std::size_t t = 0; t < walk.duration_samples(); ++t) {
        std::snprintf(buf, sizeof buf, "%.2f", static_cast<double>(t) / walk.sample_rate);
        out << buf;
        for (std::size_t c = 0; c < kChannelCount; ++c) {
            std::snprintf(buf, sizeof buf, "\t%.3f", walk.channels[c][t]);
            out << buf;
        }
        out << '\n';
    }
}

std::filesystem::path write_walk_file(const WalkRecord& walk, const std::filesystem::path& dir) {
    const std::string digits = walk.subject_id.substr(4);
    const auto path = dir / format_walk_filename(walk.study, walk.group, std::stoi(digits),
                                                 static_cast<int>(walk.walk_index));
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
    write_walk_text(walk, out);
    return path;
}

} // namespace gaitformer::data
