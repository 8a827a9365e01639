// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "tubal/tensor3.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <vector>

namespace tubal {

namespace detail {

inline std::vector<unsigned char> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint64_t load_le64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | p[b];
    return v;
}

inline void store_le64(std::uint64_t v, std::string& out) {
    for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xffu));
}

}  // namespace detail

inline constexpr std::array<char, 4> kTnsMagic{'T', 'N', 'S', '1'};
inline constexpr std::size_t kTnsHeaderBytes = 28;

/// TNS1: "TNS1", three little-endian u64 dims, then binary64 little-endian
/// values in linear-offset order. No padding, no checksum.
inline void save_tns(const Tensor3& x, const std::filesystem::path& path) {
    std::string bytes(kTnsMagic.begin(), kTnsMagic.end());
    bytes.reserve(kTnsHeaderBytes + 8 * x.size());
    detail::store_le64(x.rows(), bytes);
    detail::store_le64(x.cols(), bytes);
    detail::store_le64(x.tubes(), bytes);
    for (double v : x.values()) detail::store_le64(std::bit_cast<std::uint64_t>(v), bytes);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

inline Tensor3 load_tns(const std::filesystem::path& path) {
    const std::vector<unsigned char> bytes = detail::read_file(path);
    if (bytes.size() < kTnsMagic.size() || std::memcmp(bytes.data(), kTnsMagic.data(), kTnsMagic.size()) != 0) {
        throw Error(ErrorCode::BadMagic, path.string() + " does not start with TNS1");
    }
    if (bytes.size() < kTnsHeaderBytes) throw Error(ErrorCode::TruncatedFile, path.string() + " has a short header");

    const std::uint64_t n1 = detail::load_le64(bytes.data() + 4);
    const std::uint64_t n2 = detail::load_le64(bytes.data() + 12);
    const std::uint64_t n3 = detail::load_le64(bytes.data() + 20);
    constexpr std::uint64_t max_count = std::numeric_limits<std::uint64_t>::max() / 8;
    std::uint64_t count = 0;
    if (__builtin_mul_overflow(n1, n2, &count) || __builtin_mul_overflow(count, n3, &count) || count > max_count ||
        count > std::numeric_limits<std::size_t>::max() / 8) {
        throw Error(ErrorCode::DimOverflow, path.string() + " declares an unrepresentable element count");
    }
    const std::uint64_t payload = bytes.size() - kTnsHeaderBytes;
    if (payload < 8 * count) {
        throw Error(ErrorCode::TruncatedFile, path.string() + " holds " + std::to_string(payload) +
                                                  " payload bytes, header needs " + std::to_string(8 * count));
    }
    if (payload > 8 * count) throw Error(ErrorCode::BadHeader, path.string() + " has trailing bytes");

    std::vector<double> values(count);
    for (std::size_t n = 0; n < count; ++n) {
        values[n] = std::bit_cast<double>(detail::load_le64(bytes.data() + kTnsHeaderBytes + 8 * n));
    }
    Tensor3 x(Dims{n1, n2, n3}, std::move(values));
    if (!x.all_finite()) throw Error(ErrorCode::NonFinite, path.string() + " contains NaN or Inf");
    return x;
}

/// 8-bit binary PGM ("P5") image, row-major pixels.
struct GrayImage {
    std::size_t width = 0;
    std::size_t height = 0;
    std::vector<unsigned char> pixels;
};

inline GrayImage read_pgm(const std::filesystem::path& path) {
    const std::vector<unsigned char> bytes = detail::read_file(path);
    std::size_t pos = 0;
    const auto bad = [&path](const std::string& why) { return Error(ErrorCode::BadHeader, path.string() + ": " + why); };
    const auto skip_space = [&] {
        while (pos < bytes.size()) {
            if (bytes[pos] == '#') {
                while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            } else if (std::isspace(bytes[pos]) != 0) {
                ++pos;
            } else {
                break;
            }
        }
    };
    const auto read_uint = [&]() -> std::size_t {
        skip_space();
        if (pos >= bytes.size() || std::isdigit(bytes[pos]) == 0) throw bad("expected an integer");
        std::size_t v = 0;
        while (pos < bytes.size() && std::isdigit(bytes[pos]) != 0) {
            v = v * 10 + static_cast<std::size_t>(bytes[pos++] - '0');
            if (v > (std::size_t{1} << 31)) throw bad("header value too large");
        }
        return v;
    };

    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw bad("not a binary PGM (P5)");
    pos = 2;
    GrayImage img;
    img.width = read_uint();
    img.height = read_uint();
    const std::size_t maxval = read_uint();
    if (img.width == 0 || img.height == 0) throw bad("zero image size");
    if (maxval == 0 || maxval > 255) throw bad("only 8-bit PGM is supported");
    if (pos >= bytes.size() || std::isspace(bytes[pos]) == 0) throw bad("missing separator before pixel data");
    ++pos;
    const std::size_t n = img.width * img.height;
    if (bytes.size() - pos < n) throw bad("pixel data is truncated");
    img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos),
                      bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
    return img;
}

inline void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot create " + path.string());
    out << "P5\n" << img.width << ' ' << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixels.size()));
    if (!out) throw Error(ErrorCode::IoFailure, "short write to " + path.string());
}

/// The *.pgm files of a directory in lexicographic order.
inline std::vector<std::filesystem::path> list_pgm_files(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::directory_iterator it(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot list " + dir.string());
    std::vector<std::filesystem::path> files;
    for (const auto& entry : it) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    return files;
}

/// Stacks equally sized grayscale images into a height x width x count
/// tensor: x(r, c, k) is pixel (row r, column c) of image k, divided by 255.
inline Tensor3 load_pgm_stack(const std::filesystem::path& dir) {
    const auto files = list_pgm_files(dir);
    if (files.empty()) throw Error(ErrorCode::EmptyDir, dir.string() + " contains no .pgm files");

    Tensor3 out;
    for (std::size_t k = 0; k < files.size(); ++k) {
        const GrayImage img = read_pgm(files[k]);
        if (k == 0) {
            out = Tensor3(img.height, img.width, files.size());
        } else if (img.height != out.rows() || img.width != out.cols()) {
            throw Error(ErrorCode::InconsistentDims, files[k].string() + " is " + std::to_string(img.width) + "x" +
                                                         std::to_string(img.height) + ", expected " +
                                                         std::to_string(out.cols()) + "x" + std::to_string(out.rows()));
        }
        for (std::size_t r = 0; r < img.height; ++r) {
            for (std::size_t c = 0; c < img.width; ++c) out(r, c, k) = img.pixels[r * img.width + c] / 255.0;
        }
    }
    return out;
}

/// Frontal slice k as an 8-bit image, clamped to [0, 1] before quantizing.
inline GrayImage slice_to_image(const Tensor3& x, std::size_t k) {
    GrayImage img{x.cols(), x.rows(), std::vector<unsigned char>(x.rows() * x.cols())};
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
            const double v = std::clamp(x(r, c, k), 0.0, 1.0);
            img.pixels[r * x.cols() + c] = static_cast<unsigned char>(std::lround(v * 255.0));
        }
    }
    return img;
}

}  // namespace tubal
