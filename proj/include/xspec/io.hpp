#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "xspec/image.hpp"

namespace xspec {

// Binary PGM (P5). Samples are mapped linearly between [0, maxval] and [0, 1].
Image read_pgm(const std::filesystem::path& path);
Image decode_pgm(std::string_view bytes);

// Values are clamped to [0, 1] and rounded to the nearest level.
void write_pgm(const std::filesystem::path& path, const Image& img, int bits = 16);
std::string encode_pgm(const Image& img, int bits = 16);

// Raw tensor: "XSPT", u16 version, u8 dtype tag, u8 rank, rank x u64 dims,
// row-major payload. All integers and samples little-endian.
enum class DType : std::uint8_t { f32 = 1, f64 = 2 };

inline constexpr std::uint16_t kTensorFormatVersion = 1;

void write_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype = DType::f64);
Tensor read_tensor(const std::filesystem::path& path);
std::string encode_tensor(const Tensor& t, DType dtype = DType::f64);
Tensor decode_tensor(std::string_view bytes);

// Shortest text that parses back to the same double (at most 17 significant digits).
std::string format_double(double v);
double parse_double(std::string_view s);
long long parse_int(std::string_view s);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Plain comma-separated rows; fields never contain commas or quotes.
std::vector<std::string> split_csv_line(std::string_view line);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    // Column index by name; throws Error(format) if absent.
    std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

// Little-endian primitives shared by the binary formats.
namespace le {
void put_u16(std::string& out, std::uint16_t v);
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f32(std::string& out, float v);
void put_f64(std::string& out, double v);

class Reader {
public:
    Reader(std::string_view bytes, std::string what) : bytes_(bytes), what_(std::move(what)) {}

    std::string_view take(std::size_t n);
    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    double f64();
    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

private:
    std::string_view bytes_;
    std::size_t pos_ = 0;
    std::string what_;
};
}  // namespace le

}  // namespace xspec
