#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace gaitformer::data {

inline constexpr std::size_t kChannelCount = 18;
inline constexpr double kSampleRateHz = 100.0;

// File column order after the time stamp.
inline constexpr std::array<std::string_view, kChannelCount> kChannelNames = {
    "L1", "L2", "L3", "L4", "L5", "L6", "L7", "L8", "R1",
    "R2", "R3", "R4", "R5", "R6", "R7", "R8", "totalL", "totalR"};

enum class Study { Ga, Ju, Si };
enum class Group { parkinson, control };

std::string_view study_code(Study study);
std::string_view group_code(Group group); // "Pt" or "Co"

// Decoded `<Study><Group><Subject>_<Walk>.txt`, e.g. GaPt03_01.txt.
struct WalkName {
    Study study = Study::Ga;
    Group group = Group::control;
    int subject = 0;
    int walk = 0;
    std::string subject_digits; // as written, e.g. "03"
};

// Throws ParseError for names outside the convention.
WalkName parse_walk_filename(std::string_view filename);
bool is_walk_filename(std::string_view filename);
std::string format_walk_filename(Study study, Group group, int subject, int walk);

struct WalkRecord {
    std::string subject_id; // e.g. "GaPt03"
    Study study = Study::Ga;
    Group group = Group::control;
    std::size_t walk_index = 0;
    double sample_rate = kSampleRateHz;
    std::vector<std::vector<double>> channels; // kChannelCount series of newtons

    std::size_t duration_samples() const { return channels.empty() ? 0 : channels.front().size(); }
    std::string walk_id() const; // e.g. "GaPt03_01"
    int label() const { return group == Group::parkinson ? 1 : 0; }
};

// Parses one walk from the text of a 19-column file (time stamp then 18
// forces). The file name supplies study, group, subject and walk.
WalkRecord parse_walk_file(const std::filesystem::path& path, std::string_view contents);

WalkRecord read_walk_file(const std::filesystem::path& path);

// Every convention-named walk file in `dir`, sorted by file name. Other files
// (demographics, checksums) are skipped.
std::vector<WalkRecord> load_walk_directory(const std::filesystem::path& dir);

// Writes the walk in the dataset's text layout under its canonical name.
std::filesystem::path write_walk_file(const WalkRecord& walk, const std::filesystem::path& dir);
void write_walk_text(const WalkRecord& walk, std::ostream& out);

} // namespace gaitformer::data
