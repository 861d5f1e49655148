#include "gaitformer/data/segment_store.hpp"

#include "gaitformer/errors.hpp"
#include "gaitformer/io/binary.hpp"

#include <fstream>
#include <iterator>

namespace gaitformer::data {

namespace {

constexpr char kMagic[8] = {'V', 'G', 'R', 'F', 'S', 'E', 'G', '\0'};

} // namespace

void write_segment_store(const std::filesystem::path& path, std::span<const Segment> segments) {
    io::ByteWriter w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kSegmentStoreVersion);
    w.u64(segments.size());
    const std::uint32_t channels = segments.empty() ? 0 : static_cast<std::uint32_t>(segments[0].channels);
    const std::uint32_t length = segments.empty() ? 0 : static_cast<std::uint32_t>(segments[0].length);
    w.u32(channels);
    w.u32(length);
    for (const auto& s : segments) {
        if (s.channels != channels || s.length != length || s.values.size() != channels * length) {
            throw ShapeError("segment store needs segments of one shape");
        }
    }
    for (const auto& s : segments) w.u8(static_cast<std::uint8_t>(s.label));
    for (const auto& s : segments) w.u64(s.start_sample);
    for (const auto& s : segments) w.str(s.walk_ref);
    for (const auto& s : segments) w.str(s.subject_ref);
    for (const auto& s : segments) {
        for (const double v : s.values) w.f64(v);
    }
    w.write_file(path);
}

std::vector<Segment> read_segment_store(const std::filesystem::path& path) {
    io::ByteReader r(io::read_file(path), path.string());
    char magic[8];
    r.bytes(magic, sizeof magic);
    if (!std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
        throw DataError(path.string() + ": not a segment store");
    }
    const std::uint32_t version = r.u32();
    if (version != kSegmentStoreVersion) {
        throw DataError(path.string() + ": unsupported segment store version " + std::to_string(version));
    }
    const std::uint64_t count = r.u64();
    const std::uint32_t channels = r.u32();
    const std::uint32_t length = r.u32();
    if (count > r.remaining()) {
        throw io::FormatError(path.string() + ": segment count exceeds file size");
    }
    r.require(count * (1 + 8 + 4 + 4 + 8ULL * channels * length));
    std::vector<Segment> segments(count);
    for (auto& s : segments) {
        s.channels = channels;
        s.length = length;
        s.label = r.u8();
    }
    for (auto& s : segments) s.start_sample = r.u64();
    for (auto& s : segments) s.walk_ref = r.str();
    for (auto& s : segments) s.subject_ref = r.str();
    for (auto& s : segments) {
        s.values.resize(static_cast<std::size_t>(channels) * length);
        for (auto& v : s.values) v = r.f64();
    }
    r.expect_end();
    return segments;
}

} // namespace gaitformer::data
