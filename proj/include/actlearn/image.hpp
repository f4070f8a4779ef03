#pragma once

#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace actlearn {

// 8-bit RGB raster, row-major, interleaved channels.
struct Image {
    int width = 0;
    int height = 0;
    std::vector<uint8_t> pixels;  // size = width * height * 3

    Image() = default;
    Image(int w, int h) : width(w), height(h), pixels(static_cast<size_t>(w) * h * 3, 0) {}

    uint8_t& at(int u, int v, int c) {
        return pixels[(static_cast<size_t>(v) * width + u) * 3 + c];
    }
    uint8_t at(int u, int v, int c) const {
        return pixels[(static_cast<size_t>(v) * width + u) * 3 + c];
    }

    bool in_bounds(int u, int v) const {
        return u >= 0 && u < width && v >= 0 && v < height;
    }

    // Clamp-to-edge read, the border policy for patch extraction.
    uint8_t at_clamped(int u, int v, int c) const {
        if (u < 0) u = 0;
        if (u >= width) u = width - 1;
        if (v < 0) v = 0;
        if (v >= height) v = height - 1;
        return at(u, v, c);
    }

    double mean_intensity() const {
        double sum = 0.0;
        for (uint8_t p : pixels) sum += p;
        return pixels.empty() ? 0.0 : sum / static_cast<double>(pixels.size());
    }
};

inline void write_ppm(const Image& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "P6\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw std::runtime_error("short write: " + path);
}

inline Image read_ppm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string magic;
    in >> magic;
    if (magic != "P6") throw std::runtime_error("not a P6 ppm: " + path);
    int w = 0, h = 0, maxval = 0;
    in >> w >> h >> maxval;
    if (!in || w <= 0 || h <= 0 || maxval != 255)
        throw std::runtime_error("bad ppm header: " + path);
    in.get();  // single whitespace after header
    Image img(w, h);
    in.read(reinterpret_cast<char*>(img.pixels.data()),
            static_cast<std::streamsize>(img.pixels.size()));
    if (!in) throw std::runtime_error("truncated ppm: " + path);
    return img;
}

}  // namespace actlearn
