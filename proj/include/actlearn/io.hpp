#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace actlearn {

// Little-endian binary serialization over streams. All file formats in this
// project share the magic + version framing implemented here.
static_assert(std::endian::native == std::endian::little,
              "serializers assume a little-endian host");

inline void write_bytes(std::ostream& out, const void* p, size_t n) {
    out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!out) throw std::runtime_error("binary write failed");
}

inline void read_bytes(std::istream& in, void* p, size_t n) {
    in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!in || static_cast<size_t>(in.gcount()) != n)
        throw std::runtime_error("binary read failed (truncated input)");
}

template <typename T>
void write_pod(std::ostream& out, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    write_bytes(out, &v, sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
    static_assert(std::is_trivially_copyable_v<T>);
    T v;
    read_bytes(in, &v, sizeof(T));
    return v;
}

inline void write_magic(std::ostream& out, const char magic[8]) {
    write_bytes(out, magic, 8);
}

inline void expect_magic(std::istream& in, const char magic[8], const char* what) {
    char got[8];
    read_bytes(in, got, 8);
    if (std::memcmp(got, magic, 8) != 0)
        throw std::runtime_error(std::string("bad magic, not a ") + what + " file");
}

inline void expect_version(std::istream& in, uint32_t want, const char* what) {
    uint32_t got = read_pod<uint32_t>(in);
    if (got != want)
        throw std::runtime_error(std::string("unsupported ") + what + " version " +
                                 std::to_string(got));
}

inline void write_string(std::ostream& out, const std::string& s) {
    write_pod<uint32_t>(out, static_cast<uint32_t>(s.size()));
    write_bytes(out, s.data(), s.size());
}

inline std::string read_string(std::istream& in) {
    uint32_t n = read_pod<uint32_t>(in);
    if (n > (1u << 28)) throw std::runtime_error("unreasonable string length in binary file");
    std::string s(n, '\0');
    if (n) read_bytes(in, s.data(), n);
    return s;
}

inline void write_f64_array(std::ostream& out, const double* p, size_t n) {
    write_bytes(out, p, n * sizeof(double));
}

inline void read_f64_array(std::istream& in, double* p, size_t n) {
    read_bytes(in, p, n * sizeof(double));
}

inline std::ofstream open_binary_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

inline std::ifstream open_binary_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write: " + path);
}

// Fixed decimal float formatting used by traces and reports so that reruns
// with the same seed produce byte-identical text output.
inline std::string format_f(double v, int precision = 6) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", precision, v);
    // Avoid the two representations of zero.
    std::string s(buf);
    if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
    return s;
}

// Shortest round-trip representation, for CSV rows that feed back into loads.
inline std::string format_g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
}

}  // namespace actlearn
