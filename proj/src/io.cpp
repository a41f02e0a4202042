#include "xspec/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "xspec/error.hpp"

namespace xspec {

namespace le {

void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }
void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::string_view Reader::take(std::size_t n) {
    if (remaining() < n) fail(ErrorKind::format, what_ + ": truncated file");
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
}

std::uint8_t Reader::u8() { return static_cast<std::uint8_t>(take(1)[0]); }

std::uint16_t Reader::u16() {
    auto s = take(2);
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(s[0]) | (static_cast<std::uint8_t>(s[1]) << 8));
}

std::uint32_t Reader::u32() {
    auto s = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[i]);
    return v;
}

std::uint64_t Reader::u64() {
    auto s = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(s[i]);
    return v;
}

float Reader::f32() { return std::bit_cast<float>(u32()); }
double Reader::f64() { return std::bit_cast<double>(u64()); }

}  // namespace le

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorKind::io, "cannot open '" + path.string() + "' for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) fail(ErrorKind::io, "write to '" + path.string() + "' failed");
}

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string_view pgm_token(std::string_view bytes, std::size_t& pos) {
    for (;;) {
        while (pos < bytes.size() && std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
        if (pos < bytes.size() && bytes[pos] == '#') {
            while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
            continue;
        }
        break;
    }
    std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    if (start == pos) fail(ErrorKind::format, "PGM header truncated");
    return bytes.substr(start, pos - start);
}

}  // namespace

Image decode_pgm(std::string_view bytes) {
    std::size_t pos = 0;
    if (pgm_token(bytes, pos) != "P5") fail(ErrorKind::format, "not a binary PGM (P5) file");
    const long long width = parse_int(pgm_token(bytes, pos));
    const long long height = parse_int(pgm_token(bytes, pos));
    const long long maxval = parse_int(pgm_token(bytes, pos));
    require(width > 0 && height > 0, ErrorKind::format, "PGM has non-positive dimensions");
    require(maxval > 0 && maxval < 65536, ErrorKind::format, "PGM maxval out of range");
    if (pos >= bytes.size()) fail(ErrorKind::format, "PGM raster missing");
    ++pos;  // single whitespace before the raster

    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    const std::size_t bytes_per = maxval < 256 ? 1 : 2;
    require(bytes.size() - pos >= n * bytes_per, ErrorKind::format, "PGM raster truncated");
    std::vector<double> data(n);
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
    for (std::size_t k = 0; k < n; ++k) {
        const unsigned v = bytes_per == 1 ? p[k] : (static_cast<unsigned>(p[2 * k]) << 8) | p[2 * k + 1];
        data[k] = static_cast<double>(v) / static_cast<double>(maxval);
    }
    return Image(static_cast<std::size_t>(height), static_cast<std::size_t>(width), std::move(data));
}

Image read_pgm(const std::filesystem::path& path) {
    try {
        return decode_pgm(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::format) fail(ErrorKind::format, path.string() + ": " + e.what());
        throw;
    }
}

std::string encode_pgm(const Image& img, int bits) {
    require(bits == 8 || bits == 16, ErrorKind::invalid_argument, "PGM bit depth must be 8 or 16");
    const unsigned maxval = bits == 8 ? 255u : 65535u;
    std::string out = "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n" +
                      std::to_string(maxval) + "\n";
    out.reserve(out.size() + img.size() * (bits / 8));
    for (double v : img.pixels()) {
        const double c = std::clamp(v, 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(c * maxval));
        if (bits == 16) out.push_back(static_cast<char>(q >> 8));
        out.push_back(static_cast<char>(q & 0xff));
    }
    return out;
}

void write_pgm(const std::filesystem::path& path, const Image& img, int bits) {
    write_file(path, encode_pgm(img, bits));
}

std::string encode_tensor(const Tensor& t, DType dtype) {
    require(t.data.size() == element_count(t.shape), ErrorKind::shape_mismatch, "tensor data does not match shape");
    require(t.rank() < 256, ErrorKind::invalid_argument, "tensor rank too large");
    std::string out = "XSPT";
    le::put_u16(out, kTensorFormatVersion);
    out.push_back(static_cast<char>(dtype));
    out.push_back(static_cast<char>(t.rank()));
    for (std::size_t d : t.shape) le::put_u64(out, d);
    out.reserve(out.size() + t.size() * (dtype == DType::f32 ? 4 : 8));
    for (double v : t.data) {
        if (dtype == DType::f32) {
            le::put_f32(out, static_cast<float>(v));
        } else {
            le::put_f64(out, v);
        }
    }
    return out;
}

Tensor decode_tensor(std::string_view bytes) {
    le::Reader r(bytes, "tensor");
    if (r.take(4) != "XSPT") fail(ErrorKind::format, "tensor: bad magic");
    const std::uint16_t version = r.u16();
    require(version == kTensorFormatVersion, ErrorKind::format,
            "tensor: unsupported version " + std::to_string(version));
    const auto dtype = static_cast<DType>(r.u8());
    require(dtype == DType::f32 || dtype == DType::f64, ErrorKind::format, "tensor: unknown dtype tag");
    const std::size_t rank = r.u8();
    std::vector<std::size_t> shape(rank);
    for (auto& d : shape) d = static_cast<std::size_t>(r.u64());
    const std::size_t n = element_count(shape);
    const std::size_t width = dtype == DType::f32 ? 4 : 8;
    require(r.remaining() == n * width, ErrorKind::format, "tensor: payload size does not match shape");
    std::vector<double> data(n);
    for (auto& v : data) v = dtype == DType::f32 ? static_cast<double>(r.f32()) : r.f64();
    return Tensor(std::move(shape), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t, DType dtype) {
    write_file(path, encode_tensor(t, dtype));
}

Tensor read_tensor(const std::filesystem::path& path) {
    try {
        return decode_tensor(read_file(path));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::format) fail(ErrorKind::format, path.string() + ": " + e.what());
        throw;
    }
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        fail(ErrorKind::format, "not a number: '" + std::string(s) + "'");
    }
    return v;
}

long long parse_int(std::string_view s) {
    long long v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        fail(ErrorKind::format, "not an integer: '" + std::string(s) + "'");
    }
    return v;
}

std::vector<std::string> split_csv_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
        std::size_t end = line.find(',', start);
        if (end == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            return fields;
        }
        fields.emplace_back(line.substr(start, end - start));
        start = end + 1;
    }
}

std::size_t CsvTable::column(std::string_view name) const {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::format, "CSV column '" + std::string(name) + "' missing");
    return static_cast<std::size_t>(it - header.begin());
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::format, path.string() + ": empty CSV file");
    table.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        auto row = split_csv_line(line);
        require(row.size() == table.header.size(), ErrorKind::format,
                path.string() + ": row has " + std::to_string(row.size()) + " fields, header has " +
                    std::to_string(table.header.size()));
        table.rows.push_back(std::move(row));
    }
    return table;
}

}  // namespace xspec
