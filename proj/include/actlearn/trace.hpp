#pragma once

#include <string>

#include "actlearn/geometry.hpp"
#include "actlearn/io.hpp"

namespace actlearn {

// Line-oriented training trace, buffered and written once. Every labeled
// example corresponds to exactly one "label=" line, which tests cross-check
// against dataset sizes.
struct TraceLog {
    std::string text;

    void line(const std::string& s) {
        text += s;
        text += '\n';
    }

    static std::string fmt_point(const Vec3& p) {
        return "(" + format_f(p.x()) + "," + format_f(p.y()) + "," + format_f(p.z()) + ")";
    }

    void pick(int pose, const std::string& behavior, const Vec3& point, double dist, int label,
              size_t pool_size) {
        line("pick pose=" + std::to_string(pose) + " behavior=" + behavior +
             " point=" + fmt_point(point) + " dist=" + format_f(dist) +
             " label=" + (label > 0 ? std::string("+1") : std::string("-1")) +
             " pool=" + std::to_string(pool_size));
    }

    void save(const std::string& path) const { write_file(path, text); }

    size_t count(const std::string& needle) const {
        size_t n = 0, pos = 0;
        while ((pos = text.find(needle, pos)) != std::string::npos) {
            n++;
            pos += needle.size();
        }
        return n;
    }
};

}  // namespace actlearn
