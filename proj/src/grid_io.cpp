#include "ambient/grid_io.hpp"

#include <zlib.h>

#include <cstring>
#include <fstream>

#include "ambient/errors.hpp"

namespace ambient {

namespace {

constexpr char kMagic[4] = {'I', 'G', 'R', 'D'};

void put_u32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
}

std::uint32_t get_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32le(std::vector<std::uint8_t>& out, float f) {
    std::uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32le(out, v);
}

float get_f32le(const std::uint8_t* p) {
    const std::uint32_t v = get_u32le(p);
    float f;
    std::memcpy(&f, &v, 4);
    return f;
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path.string());
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("write failed: " + path.string());
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary | std::ios::ate);
    if (!f) throw IoError("cannot open for reading: " + path.string());
    const auto n = f.tellg();
    f.seekg(0);
    std::vector<std::uint8_t> bytes(static_cast<size_t>(n));
    f.read(reinterpret_cast<char*>(bytes.data()), n);
    if (!f) throw IoError("read failed: " + path.string());
    return bytes;
}

}  // namespace

void write_grid(const std::filesystem::path& path, const ImageGrid& img) {
    check_valid(img, "write_grid");
    std::vector<std::uint8_t> bytes;
    bytes.reserve(16 + img.data.size() * 4);
    bytes.insert(bytes.end(), kMagic, kMagic + 4);
    put_u32le(bytes, static_cast<std::uint32_t>(img.width));
    put_u32le(bytes, static_cast<std::uint32_t>(img.height));
    put_u32le(bytes, 0u);  // flags
    for (float v : img.data) put_f32le(bytes, v);
    write_file(path, bytes);
}

ImageGrid read_grid(const std::filesystem::path& path) {
    const auto bytes = read_file(path);
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw IoError("not an IGRD file: " + path.string());
    const std::uint32_t w = get_u32le(&bytes[4]);
    const std::uint32_t h = get_u32le(&bytes[8]);
    if (bytes.size() != 16 + static_cast<size_t>(w) * h * 4)
        throw IoError("truncated IGRD file: " + path.string());
    ImageGrid img(static_cast<int>(w), static_cast<int>(h));
    for (size_t i = 0; i < img.data.size(); ++i) img.data[i] = get_f32le(&bytes[16 + i * 4]);
    return img;
}

void write_grid_png(const std::filesystem::path& path, const ImageGrid& img) {
    check_valid(img, "write_grid_png");
    const auto [lo, hi] = min_max(img);
    const float scale = (hi > lo) ? 255.0f / (hi - lo) : 0.0f;
    std::vector<std::uint8_t> px(img.data.size());
    for (size_t i = 0; i < px.size(); ++i) {
        float v = (img.data[i] - lo) * scale;
        if (v < 0.0f) v = 0.0f;
        if (v > 255.0f) v = 255.0f;
        px[i] = static_cast<std::uint8_t>(v + 0.5f);
    }
    write_png(path, img.width, img.height, 1, px);
}

void write_png(const std::filesystem::path& path, int width, int height, int channels,
               const std::vector<std::uint8_t>& pixels) {
    if (channels != 1 && channels != 3) throw ConfigError("write_png: channels must be 1 or 3");
    if (pixels.size() != static_cast<size_t>(width) * height * channels)
        throw ConfigError("write_png: pixel buffer size mismatch");

    // Scanlines with filter byte 0, then one zlib stream.
    const size_t stride = static_cast<size_t>(width) * channels;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * height);
    for (int y = 0; y < height; ++y) {
        raw.push_back(0);
        raw.insert(raw.end(), pixels.begin() + y * stride, pixels.begin() + (y + 1) * stride);
    }
    uLongf comp_cap = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> comp(comp_cap);
    if (compress2(comp.data(), &comp_cap, raw.data(), static_cast<uLong>(raw.size()), 6) != Z_OK)
        throw IoError("write_png: deflate failed");
    comp.resize(comp_cap);

    std::vector<std::uint8_t> out;
    const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    out.insert(out.end(), sig, sig + 8);

    auto put_be32 = [&out](std::uint32_t v) {
        out.push_back(static_cast<std::uint8_t>((v >> 24) & 0xFF));
        out.push_back(static_cast<std::uint8_t>((v >> 16) & 0xFF));
        out.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
        out.push_back(static_cast<std::uint8_t>(v & 0xFF));
    };
    auto chunk = [&](const char type[4], const std::vector<std::uint8_t>& body) {
        put_be32(static_cast<std::uint32_t>(body.size()));
        const size_t start = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), body.begin(), body.end());
        const uLong crc = crc32(crc32(0L, Z_NULL, 0), out.data() + start, static_cast<uInt>(4 + body.size()));
        put_be32(static_cast<std::uint32_t>(crc));
    };

    std::vector<std::uint8_t> ihdr;
    {
        std::vector<std::uint8_t> tmp;
        tmp.push_back(static_cast<std::uint8_t>((width >> 24) & 0xFF));
        tmp.push_back(static_cast<std::uint8_t>((width >> 16) & 0xFF));
        tmp.push_back(static_cast<std::uint8_t>((width >> 8) & 0xFF));
        tmp.push_back(static_cast<std::uint8_t>(width & 0xFF));
        tmp.push_back(static_cast<std::uint8_t>((height >> 24) & 0xFF));
        tmp.push_back(static_cast<std::uint8_t>((height >> 16) & 0xFF));
        tmp.push_back(static_cast<std::uint8_t>((height >> 8) & 0xFF));
        tmp.push_back(static_cast<std::uint8_t>(height & 0xFF));
        tmp.push_back(8);                                    // bit depth
        tmp.push_back(channels == 1 ? 0 : 2);                // gray / truecolor
        tmp.push_back(0);                                    // compression
        tmp.push_back(0);                                    // filter
        tmp.push_back(0);                                    // no interlace
        ihdr = tmp;
    }
    chunk("IHDR", ihdr);
    chunk("IDAT", comp);
    chunk("IEND", {});
    write_file(path, out);
}

}  // namespace ambient
