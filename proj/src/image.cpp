#include "fer/image.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "fer/errors.hpp"

namespace fer {

namespace {

// Pulls the next whitespace-separated token out of a PGM header, skipping
// '#' comments that run to end of line.
class HeaderScanner {
public:
    HeaderScanner(std::span<const std::uint8_t> bytes, std::size_t pos)
        : bytes_(bytes), pos_(pos) {}

    unsigned next_uint(const char* field) {
        skip_separators();
        if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
            throw ValidationError(std::string("malformed PGM header: expected ") + field);
        unsigned long v = 0;
        while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1000000) throw ValidationError(std::string("malformed PGM header: ") +
                                                   field + " out of range");
            ++pos_;
        }
        return static_cast<unsigned>(v);
    }

    // After the maxval token exactly one whitespace byte separates the
    // header from binary pixel data.
    std::size_t binary_payload_start() {
        if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
            throw ValidationError("malformed PGM header: missing separator before pixel data");
        return pos_ + 1;
    }

    std::size_t pos() const { return pos_; }

private:
    void skip_separators() {
        while (pos_ < bytes_.size()) {
            if (std::isspace(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                return;
            }
        }
    }

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_;
};

}  // namespace

GrayImage decode_pgm(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw ValidationError("malformed PGM header: missing P2/P5 magic");
    const bool binary = bytes[1] == '5';

    HeaderScanner scan(bytes, 2);
    const unsigned width = scan.next_uint("width");
    const unsigned height = scan.next_uint("height");
    const unsigned maxval = scan.next_uint("maxval");
    if (width == 0 || height == 0)
        throw ValidationError("malformed PGM header: zero dimension");
    if (maxval == 0 || maxval > 255)
        throw ValidationError("unsupported PGM maxval " + std::to_string(maxval) +
                              " (must be 1..255)");

    GrayImage img;
    img.width = width;
    img.height = height;
    img.pixels.resize(static_cast<std::size_t>(width) * height);

    if (binary) {
        const std::size_t start = scan.binary_payload_start();
        if (bytes.size() - start < img.pixels.size())
            throw ValidationError("unexpected end of pixel data");
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            const std::uint8_t v = bytes[start + i];
            if (v > maxval)
                throw ValidationError("PGM pixel value exceeds declared maxval");
            img.pixels[i] = v;
        }
    } else {
        HeaderScanner body(bytes, scan.pos());
        for (std::size_t i = 0; i < img.pixels.size(); ++i) {
            unsigned v;
            try {
                v = body.next_uint("pixel");
            } catch (const ValidationError&) {
                throw ValidationError("unexpected end of pixel data");
            }
            if (v > maxval)
                throw ValidationError("PGM pixel value exceeds declared maxval");
            img.pixels[i] = static_cast<std::uint8_t>(v);
        }
    }
    return img;
}

GrayImage decode_pgm(const std::string& bytes) {
    return decode_pgm(std::span<const std::uint8_t>(
        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
    char header[64];
    const int n = std::snprintf(header, sizeof header, "P5\n%zu %zu\n255\n", img.width,
                                img.height);
    std::vector<std::uint8_t> out(header, header + n);
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open image file: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return decode_pgm(bytes);
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write image file: " + path);
    const auto bytes = encode_pgm(img);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ValidationError("short write on image file: " + path);
}

GrayImage center_crop(const GrayImage& img, std::size_t w, std::size_t h) {
    if (w == 0 || h == 0 || w > img.width || h > img.height)
        throw ValidationError("center_crop: window " + std::to_string(w) + "x" +
                              std::to_string(h) + " does not fit in " +
                              std::to_string(img.width) + "x" + std::to_string(img.height));
    const std::size_t x0 = (img.width - w) / 2;
    const std::size_t y0 = (img.height - h) / 2;
    GrayImage out;
    out.width = w;
    out.height = h;
    out.pixels.resize(w * h);
    for (std::size_t y = 0; y < h; ++y)
        for (std::size_t x = 0; x < w; ++x) out.at(x, y) = img.at(x0 + x, y0 + y);
    return out;
}

GrayImage resize_bilinear(const GrayImage& img, std::size_t w, std::size_t h) {
    if (w == 0 || h == 0)
        throw ValidationError("resize_bilinear: target dimensions must be positive");

    GrayImage out;
    out.width = w;
    out.height = h;
    out.pixels.resize(w * h);

    const double sx = static_cast<double>(img.width) / static_cast<double>(w);
    const double sy = static_cast<double>(img.height) / static_cast<double>(h);

    auto source = [](std::size_t dst, double scale, std::size_t limit) {
        double s = (static_cast<double>(dst) + 0.5) * scale - 0.5;
        if (s < 0.0) s = 0.0;
        const double last = static_cast<double>(limit - 1);
        if (s > last) s = last;
        return s;
    };

    for (std::size_t y = 0; y < h; ++y) {
        const double fy = source(y, sy, img.height);
        const std::size_t y0 = static_cast<std::size_t>(fy);
        const std::size_t y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - static_cast<double>(y0);
        for (std::size_t x = 0; x < w; ++x) {
            const double fx = source(x, sx, img.width);
            const std::size_t x0 = static_cast<std::size_t>(fx);
            const std::size_t x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - static_cast<double>(x0);

            const double top = (1.0 - wx) * img.at(x0, y0) + wx * img.at(x1, y0);
            const double bot = (1.0 - wx) * img.at(x0, y1) + wx * img.at(x1, y1);
            const double v = (1.0 - wy) * top + wy * bot;
            out.at(x, y) = static_cast<std::uint8_t>(std::lround(v));
        }
    }
    return out;
}

}  // namespace fer
