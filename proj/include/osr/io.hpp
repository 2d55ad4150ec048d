#pragma once

#include <zlib.h>

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "osr/error.hpp"
#include "osr/image.hpp"

namespace osr {

namespace detail_io {

inline std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Error::Kind::io, "cannot open file for reading: " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) fail(Error::Kind::io, "read failed: " + path);
    return bytes;
}

inline void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(Error::Kind::io, "cannot open file for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) fail(Error::Kind::io, "write failed: " + path);
}

// --- PPM/PGM (binary P5/P6, maxval 255) ---

// Skips whitespace and '#' comments between header tokens.
inline bool next_header_token(const std::vector<uint8_t>& b, size_t& pos, std::string& tok) {
    while (pos < b.size()) {
        if (std::isspace(b[pos])) {
            ++pos;
        } else if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else {
            break;
        }
    }
    tok.clear();
    while (pos < b.size() && !std::isspace(b[pos]) && b[pos] != '#') tok.push_back(char(b[pos++]));
    return !tok.empty();
}

inline int parse_header_int(const std::vector<uint8_t>& b, size_t& pos, const char* what) {
    std::string tok;
    if (!next_header_token(b, pos, tok)) fail(Error::Kind::format, std::string("malformed header: missing ") + what);
    for (char c : tok)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            fail(Error::Kind::format, std::string("malformed header: bad ") + what);
    long v = std::strtol(tok.c_str(), nullptr, 10);
    if (v <= 0 || v > 1 << 24) fail(Error::Kind::format, std::string("malformed header: out-of-range ") + what);
    return int(v);
}

inline ImageBuf load_pnm(const std::vector<uint8_t>& bytes, const std::string& path) {
    const int channels = bytes[1] == '5' ? 1 : 3;
    size_t pos = 2;
    const int w = parse_header_int(bytes, pos, "width");
    const int h = parse_header_int(bytes, pos, "height");
    const int maxval = parse_header_int(bytes, pos, "maxval");
    if (maxval != 255) fail(Error::Kind::format, "unsupported bit depth (maxval != 255): " + path);
    if (pos >= bytes.size() || !std::isspace(bytes[pos]))
        fail(Error::Kind::format, "malformed header: missing separator: " + path);
    ++pos;  // single whitespace after maxval
    const size_t need = size_t(w) * h * channels;
    if (bytes.size() - pos < need) fail(Error::Kind::format, "truncated pixel data: " + path);
    ImageBuf img(w, h, channels);
    for (size_t i = 0; i < need; ++i) img.data[i] = bytes[pos + i] / 255.0;
    return img;
}

inline void save_pnm(const ImageBuf& img, const std::string& path) {
    std::vector<uint8_t> out;
    std::string header = (img.channels == 1 ? "P5\n" : "P6\n") + std::to_string(img.width) + " " +
                         std::to_string(img.height) + "\n255\n";
    out.insert(out.end(), header.begin(), header.end());
    out.reserve(out.size() + img.data.size());
    for (double v : img.data) out.push_back(uint8_t(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
    write_file(path, out);
}

// --- PNG (8-bit gray / RGB, non-interlaced) ---

inline constexpr uint8_t kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

inline uint32_t be32(const uint8_t* p) {
    return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 | uint32_t(p[3]);
}

inline void push_be32(std::vector<uint8_t>& v, uint32_t x) {
    v.push_back(uint8_t(x >> 24));
    v.push_back(uint8_t(x >> 16));
    v.push_back(uint8_t(x >> 8));
    v.push_back(uint8_t(x));
}

inline ImageBuf load_png(const std::vector<uint8_t>& bytes, const std::string& path) {
    if (bytes.size() < 8 + 25 || std::memcmp(bytes.data(), kPngSig, 8) != 0)
        fail(Error::Kind::format, "malformed header: bad PNG signature: " + path);
    size_t pos = 8;
    int w = 0, h = 0, channels = 0;
    bool seen_ihdr = false, seen_iend = false;
    std::vector<uint8_t> idat;
    while (pos + 12 <= bytes.size() && !seen_iend) {
        const uint32_t len = be32(&bytes[pos]);
        if (pos + 12 + len > bytes.size()) fail(Error::Kind::format, "truncated PNG chunk: " + path);
        const char* type = reinterpret_cast<const char*>(&bytes[pos + 4]);
        const uint8_t* payload = &bytes[pos + 8];
        const uint32_t crc_stored = be32(&bytes[pos + 8 + len]);
        uint32_t crc = crc32(0, &bytes[pos + 4], len + 4);
        if (crc != crc_stored) fail(Error::Kind::format, "PNG chunk CRC mismatch: " + path);
        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) fail(Error::Kind::format, "malformed header: bad IHDR: " + path);
            w = int(be32(payload));
            h = int(be32(payload + 4));
            const int depth = payload[8], color = payload[9], interlace = payload[12];
            if (depth != 8) fail(Error::Kind::format, "unsupported bit depth (PNG depth != 8): " + path);
            if (color == 0)
                channels = 1;
            else if (color == 2)
                channels = 3;
            else
                fail(Error::Kind::format, "unsupported PNG color type (need gray or RGB): " + path);
            if (payload[10] != 0 || payload[11] != 0 || interlace != 0)
                fail(Error::Kind::format, "unsupported PNG encoding (interlace/filter method): " + path);
            if (w <= 0 || h <= 0) fail(Error::Kind::format, "malformed header: zero PNG size: " + path);
            seen_ihdr = true;
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            idat.insert(idat.end(), payload, payload + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            seen_iend = true;
        }
        pos += 12 + len;
    }
    if (!seen_ihdr || !seen_iend || idat.empty()) fail(Error::Kind::format, "malformed PNG structure: " + path);

    const size_t stride = size_t(w) * channels;
    std::vector<uint8_t> raw(size_t(h) * (stride + 1));
    uLongf raw_len = uLongf(raw.size());
    const int zrc = uncompress(raw.data(), &raw_len, idat.data(), uLong(idat.size()));
    if (zrc != Z_OK || raw_len != raw.size()) fail(Error::Kind::format, "corrupt PNG pixel data: " + path);

    // Undo per-scanline filters in place.
    const int bpp = channels;
    std::vector<uint8_t> prev(stride, 0);
    ImageBuf img(w, h, channels);
    std::vector<uint8_t> cur(stride);
    for (int y = 0; y < h; ++y) {
        const uint8_t* line = &raw[size_t(y) * (stride + 1)];
        const uint8_t ftype = line[0];
        const uint8_t* src = line + 1;
        for (size_t i = 0; i < stride; ++i) {
            const int a = i >= size_t(bpp) ? cur[i - bpp] : 0;
            const int b = prev[i];
            const int c = i >= size_t(bpp) ? prev[i - bpp] : 0;
            int x = src[i];
            switch (ftype) {
                case 0: break;
                case 1: x += a; break;
                case 2: x += b; break;
                case 3: x += (a + b) / 2; break;
                case 4: {
                    const int p = a + b - c;
                    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
                    x += (pa <= pb && pa <= pc) ? a : (pb <= pc ? b : c);
                    break;
                }
                default: fail(Error::Kind::format, "corrupt PNG scanline filter: " + path);
            }
            cur[i] = uint8_t(x);
        }
        for (size_t i = 0; i < stride; ++i) img.data[size_t(y) * stride + i] = cur[i] / 255.0;
        prev = cur;
    }
    return img;
}

inline void push_chunk(std::vector<uint8_t>& out, const char* type, const std::vector<uint8_t>& payload) {
    push_be32(out, uint32_t(payload.size()));
    const size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uint32_t crc = crc32(0, &out[start], uInt(4 + payload.size()));
    push_be32(out, crc);
}

inline void save_png(const ImageBuf& img, const std::string& path) {
    std::vector<uint8_t> out(kPngSig, kPngSig + 8);
    std::vector<uint8_t> ihdr;
    push_be32(ihdr, uint32_t(img.width));
    push_be32(ihdr, uint32_t(img.height));
    ihdr.push_back(8);                                    // bit depth
    ihdr.push_back(img.channels == 1 ? 0 : 2);            // color type
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);                                    // no interlace
    push_chunk(out, "IHDR", ihdr);

    const size_t stride = size_t(img.width) * img.channels;
    std::vector<uint8_t> raw(size_t(img.height) * (stride + 1));
    for (int y = 0; y < img.height; ++y) {
        uint8_t* line = &raw[size_t(y) * (stride + 1)];
        line[0] = 0;  // filter: none
        for (size_t i = 0; i < stride; ++i)
            line[1 + i] = uint8_t(std::lround(std::clamp(img.data[size_t(y) * stride + i], 0.0, 1.0) * 255.0));
    }
    uLongf bound = compressBound(uLong(raw.size()));
    std::vector<uint8_t> idat(bound);
    if (compress2(idat.data(), &bound, raw.data(), uLong(raw.size()), 6) != Z_OK)
        fail(Error::Kind::io, "PNG compression failed: " + path);
    idat.resize(bound);
    push_chunk(out, "IDAT", idat);
    push_chunk(out, "IEND", {});
    write_file(path, out);
}

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace detail_io

// Loads an 8-bit PNG or binary PPM/PGM; format detected from content.
// Samples are byte/255 exactly; 1 channel for grayscale, 3 for color.
inline ImageBuf load_image(const std::string& path) {
    const auto bytes = detail_io::read_file(path);
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return detail_io::load_pnm(bytes, path);
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), detail_io::kPngSig, 8) == 0)
        return detail_io::load_png(bytes, path);
    fail(Error::Kind::format, "unsupported image format (need PNG or binary PPM/PGM): " + path);
}

// Writes round(sample*255); container chosen by extension (.png/.ppm/.pgm).
inline void save_image(const ImageBuf& img, const std::string& path) {
    require(!img.data.empty(), Error::Kind::argument, "save_image: empty image");
    if (detail_io::ends_with(path, ".png")) {
        detail_io::save_png(img, path);
    } else if (detail_io::ends_with(path, ".ppm")) {
        require(img.channels == 3, Error::Kind::dimension, "save_image: .ppm requires 3 channels");
        detail_io::save_pnm(img, path);
    } else if (detail_io::ends_with(path, ".pgm")) {
        require(img.channels == 1, Error::Kind::dimension, "save_image: .pgm requires 1 channel");
        detail_io::save_pnm(img, path);
    } else {
        fail(Error::Kind::argument, "save_image: unsupported extension (use .png/.ppm/.pgm): " + path);
    }
}

}  // namespace osr
