#include "gaitformer/model.hpp"

#include "gaitformer/errors.hpp"
#include "gaitformer/io/binary.hpp"
#include "gaitformer/random.hpp"

#include <algorithm>
#include <iterator>
#include <string_view>

namespace gaitformer::model {

namespace {

constexpr char kMagic[8] = {'G', 'A', 'I', 'T', 'F', 'M', 'R', '\0'};

std::uint64_t checksum(const unsigned char* data, std::size_t n) {
    return fnv1a64(std::string_view(reinterpret_cast<const char*>(data), n));
}

std::uint8_t variant_code(Variant v) {
    switch (v) {
    case Variant::full: return 0;
    case Variant::B: return 1;
    case Variant::C: return 2;
    }
    return 0xff;
}

} // namespace

void save_model(const GaitformerModel& model, const std::filesystem::path& path) {
    io::ByteWriter w;
    w.bytes(kMagic, sizeof kMagic);
    w.u32(kModelFileVersion);
    w.u8(variant_code(model.variant()));
    w.u64(model.seed());
    const auto& norm = model.normalization();
    w.u32(static_cast<std::uint32_t>(norm.min.size()));
    for (const double v : norm.min) w.f64(v);
    for (const double v : norm.max) w.f64(v);

    const auto params = model.parameters();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto& p : params) {
        w.str(p.name);
        w.u32(static_cast<std::uint32_t>(p.tensor.rank()));
        for (const auto d : p.tensor.shape()) w.u64(d);
    }
    for (const auto& p : params) {
        for (const double v : p.tensor.values()) w.f64(v);
    }
    const auto& buf = w.buffer();
    w.u64(checksum(buf.data(), buf.size()));
    try {
        w.write_file(path);
    } catch (const Error& e) {
        throw ModelFileError(ModelFileError::Kind::io, e.what());
    }
}

GaitformerModel load_model(const std::filesystem::path& path, std::optional<Variant> expected) {
    using Kind = ModelFileError::Kind;
    const std::string source = path.string();
    std::vector<unsigned char> bytes;
    try {
        bytes = io::read_file(path);
    } catch (const Error& e) {
        throw ModelFileError(Kind::io, e.what());
    }
    if (bytes.size() < sizeof kMagic + 4 ||
        !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
        throw ModelFileError(Kind::corrupt, source + ": not a model file (bad header)");
    }
    try {
        io::ByteReader header(std::vector<unsigned char>(bytes.begin(), bytes.begin() + sizeof kMagic + 4),
                              source);
        char magic[8];
        header.bytes(magic, sizeof magic);
        const std::uint32_t version = header.u32();
        if (version != kModelFileVersion) {
            throw ModelFileError(Kind::version, source + ": model file version " + std::to_string(version) +
                                                    ", this build reads version " +
                                                    std::to_string(kModelFileVersion));
        }
        if (bytes.size() < sizeof kMagic + 4 + 8) {
            throw io::FormatError(source + ": truncated");
        }
        const std::size_t body = bytes.size() - 8;
        io::ByteReader tail(std::vector<unsigned char>(bytes.begin() + static_cast<std::ptrdiff_t>(body), bytes.end()),
                            source);
        if (tail.u64() != checksum(bytes.data(), body)) {
            throw ModelFileError(Kind::corrupt, source + ": checksum mismatch (truncated or corrupt file)");
        }
        bytes.resize(body);

        io::ByteReader r(std::move(bytes), source);
        r.bytes(magic, sizeof magic);
        r.u32();
        const std::uint8_t code = r.u8();
        if (code > 2) {
            throw ModelFileError(Kind::corrupt, source + ": unknown variant code " + std::to_string(code));
        }
        const Variant variant = code == 0 ? Variant::full : code == 1 ? Variant::B : Variant::C;
        if (expected && *expected != variant) {
            throw ModelFileError(Kind::variant_mismatch,
                                 source + ": file holds variant " + std::string(variant_name(variant)) +
                                     ", expected " + std::string(variant_name(*expected)));
        }
        const std::uint64_t seed = r.u64();
        data::NormalizationStats norm;
        const std::uint32_t channels = r.u32();
        r.require(16ULL * channels);
        norm.min.resize(channels);
        norm.max.resize(channels);
        for (auto& v : norm.min) v = r.f64();
        for (auto& v : norm.max) v = r.f64();

        GaitformerModel model(variant, seed);
        model.set_normalization(std::move(norm));
        auto params = model.parameters();
        const std::uint32_t count = r.u32();
        if (count != params.size()) {
            throw ModelFileError(Kind::shape_mismatch, source + ": " + std::to_string(count) +
                                                           " tensors in file, variant " +
                                                           std::string(variant_name(variant)) + " has " +
                                                           std::to_string(params.size()));
        }
        for (const auto& p : params) {
            const std::string name = r.str();
            const std::uint32_t rank = r.u32();
            ad::Shape shape(rank);
            for (auto& d : shape) d = r.u64();
            if (name != p.name || shape != p.tensor.shape()) {
                throw ModelFileError(Kind::shape_mismatch,
                                     source + ": tensor '" + name + "' " + ad::shape_to_string(shape) +
                                         " does not match '" + p.name + "' " +
                                         ad::shape_to_string(p.tensor.shape()));
            }
        }
        for (auto& p : params) {
            for (auto& v : p.tensor.values()) v = r.f64();
        }
        r.expect_end();
        return model;
    } catch (const io::FormatError& e) {
        throw ModelFileError(Kind::corrupt, e.what());
    }
}

} // namespace gaitformer::model
