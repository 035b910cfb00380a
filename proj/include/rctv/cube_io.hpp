#pragma once

// Native ".hsic" cube format: one UTF-8 JSON header line terminated by '\n',
//   {"magic":"HSIC1","height":M,"width":N,"bands":B,"dtype":"f32le","layout":"bsq-colmajor"}
// followed immediately by M*N*B little-endian IEEE-754 binary32 values in
// band-sequential, column-major-plane order (the HsiCube memory order).

#include <array>
#include <bit>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rctv/cube.hpp"

namespace rctv {

inline constexpr const char* kHsicMagic = "HSIC1";
inline constexpr const char* kHsicDtype = "f32le";
inline constexpr const char* kHsicLayout = "bsq-colmajor";

struct HsicHeader {
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t bands = 0;
};

namespace detail {

inline std::size_t header_dim(const nlohmann::json& h, const char* key) {
    if (!h.contains(key)) throw FormatError(std::string("hsic header missing \"") + key + "\"");
    const auto& v = h.at(key);
    if (!v.is_number_integer()) throw FormatError(std::string("hsic header field \"") + key + "\" is not an integer");
    if (v.is_number_unsigned()) {
        const auto u = v.get<std::uint64_t>();
        if (u == 0) throw FormatError(std::string("hsic header field \"") + key + "\" must be positive");
        return static_cast<std::size_t>(u);
    }
    const auto s = v.get<std::int64_t>();
    if (s <= 0) throw FormatError(std::string("hsic header field \"") + key + "\" must be positive");
    return static_cast<std::size_t>(s);
}

inline void expect_string(const nlohmann::json& h, const char* key, const char* value) {
    if (!h.contains(key) || !h.at(key).is_string() || h.at(key).get<std::string>() != value) {
        throw FormatError(std::string("hsic header field \"") + key + "\" must be \"" + value + "\"");
    }
}

} // namespace detail

inline HsicHeader parse_hsic_header(const std::string& line) {
    nlohmann::json h;
    try {
        h = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(std::string("hsic header is not valid JSON: ") + e.what());
    }
    if (!h.is_object()) throw FormatError("hsic header must be a JSON object");
    detail::expect_string(h, "magic", kHsicMagic);
    detail::expect_string(h, "dtype", kHsicDtype);
    detail::expect_string(h, "layout", kHsicLayout);
    HsicHeader hdr{detail::header_dim(h, "height"), detail::header_dim(h, "width"),
                   detail::header_dim(h, "bands")};
    // Payload byte count must be representable.
    constexpr std::size_t max_values = std::numeric_limits<std::size_t>::max() / 4;
    if (hdr.height > max_values / hdr.width || hdr.height * hdr.width > max_values / hdr.bands) {
        throw FormatError("hsic header dimensions overflow");
    }
    return hdr;
}

inline std::string format_hsic_header(const HsicHeader& hdr) {
    nlohmann::ordered_json h;
    h["magic"] = kHsicMagic;
    h["height"] = hdr.height;
    h["width"] = hdr.width;
    h["bands"] = hdr.bands;
    h["dtype"] = kHsicDtype;
    h["layout"] = kHsicLayout;
    return h.dump();
}

inline HsiCube read_cube(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw FormatError("hsic stream is empty");
    const HsicHeader hdr = parse_hsic_header(line);

    const std::size_t count = hdr.height * hdr.width * hdr.bands;
    std::vector<unsigned char> bytes(count * 4);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != bytes.size()) {
        throw FormatError("hsic payload truncated: expected " + std::to_string(count) + " values, found " +
                          std::to_string(got / 4) + (got % 4 ? " and a partial value" : ""));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw FormatError("hsic payload has trailing bytes");
    }

    HsiCube cube(hdr.height, hdr.width, hdr.bands);
    double* out = cube.data();
    for (std::size_t k = 0; k < count; ++k) {
        const unsigned char* p = &bytes[4 * k];
        const std::uint32_t u = std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
                                (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
        const float f = std::bit_cast<float>(u);
        if (!std::isfinite(f)) {
            throw FormatError("hsic payload value " + std::to_string(k) + " is not finite");
        }
        out[k] = static_cast<double>(f);
    }
    return cube;
}

inline HsiCube read_cube(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    return read_cube(in);
}

inline void write_cube(const HsiCube& cube, std::ostream& out) {
    out << format_hsic_header({cube.height(), cube.width(), cube.bands()}) << '\n';
    const std::size_t count = cube.size();
    std::vector<unsigned char> bytes(count * 4);
    const double* src = cube.data();
    for (std::size_t k = 0; k < count; ++k) {
        const auto u = std::bit_cast<std::uint32_t>(static_cast<float>(src[k]));
        bytes[4 * k + 0] = static_cast<unsigned char>(u & 0xffu);
        bytes[4 * k + 1] = static_cast<unsigned char>((u >> 8) & 0xffu);
        bytes[4 * k + 2] = static_cast<unsigned char>((u >> 16) & 0xffu);
        bytes[4 * k + 3] = static_cast<unsigned char>((u >> 24) & 0xffu);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("failed writing hsic payload");
}

inline void write_cube(const HsiCube& cube, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    write_cube(cube, out);
}

/// One band as CSV: M lines (row i), N comma-separated values (column j).
inline void write_band_csv(const HsiCube& cube, std::size_t band, std::ostream& out) {
    if (band >= cube.bands()) {
        throw DomainError("band " + std::to_string(band) + " out of range [0, " +
                          std::to_string(cube.bands()) + ")");
    }
    const auto plane = cube.band(band);
    out << std::setprecision(std::numeric_limits<float>::max_digits10);
    for (Eigen::Index i = 0; i < plane.rows(); ++i) {
        for (Eigen::Index j = 0; j < plane.cols(); ++j) {
            if (j) out << ',';
            out << plane(i, j);
        }
        out << '\n';
    }
}

} // namespace rctv
