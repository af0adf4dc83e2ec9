#include "vrpca/dataset_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "vrpca/errors.hpp"

namespace vrpca {

namespace {

constexpr std::array<char, 4> kMagic{'V', 'R', 'P', 'C'};

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

DataMatrix read_csv(std::istream& in) {
  std::vector<double> values;
  std::size_t d = 0;
  std::size_t n = 0;
  std::size_t line_no = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string row = trim(line);
    if (row.empty()) continue;
    std::size_t fields = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = row.find(',', pos);
      const std::string field =
          trim(row.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos));
      double v = 0.0;
      const char* begin = field.data();
      const char* end = field.data() + field.size();
      if (!field.empty() && *begin == '+') ++begin;
      const auto res = std::from_chars(begin, end, v);
      if (field.empty() || res.ec != std::errc() || res.ptr != end) {
        throw ParseError("csv line " + std::to_string(line_no) + ": bad number '" + field + "'",
                         line_no);
      }
      if (!std::isfinite(v)) {
        throw ParseError("csv line " + std::to_string(line_no) + ": non-finite value", line_no);
      }
      values.push_back(v);
      ++fields;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (n == 0) {
      d = fields;
    } else if (fields != d) {
      throw ParseError("csv line " + std::to_string(line_no) + ": expected " + std::to_string(d) +
                           " values, found " + std::to_string(fields),
                       line_no);
    }
    ++n;
  }
  if (n == 0) throw ParseError("csv: no data rows", line_no);
  Matrix x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  std::memcpy(x.data(), values.data(), values.size() * sizeof(double));
  return DataMatrix(std::move(x));
}

std::uint32_t decode_u32(const unsigned char* b) {
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void encode_u32(std::uint32_t v, unsigned char* b) {
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xffU);
}

double decode_f64(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | b[i];
  return std::bit_cast<double>(bits);
}

void encode_f64(double v, unsigned char* b) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    b[i] = static_cast<unsigned char>(bits & 0xffU);
    bits >>= 8;
  }
}

DataMatrix read_binary(std::istream& in) {
  std::array<unsigned char, 12> header{};
  in.read(reinterpret_cast<char*>(header.data()), header.size());
  const auto got = static_cast<std::size_t>(in.gcount());
  if (got < 4 || std::memcmp(header.data(), kMagic.data(), 4) != 0) {
    throw ParseError("f64le: magic mismatch (expected \"VRPC\")", 0);
  }
  if (got < header.size()) throw ParseError("f64le: truncated header", got);
  const std::uint32_t d = decode_u32(header.data() + 4);
  const std::uint32_t n = decode_u32(header.data() + 8);
  if (d == 0 || n == 0) throw ParseError("f64le: zero dimension in header", 4);

  const std::size_t count = static_cast<std::size_t>(d) * n;
  std::vector<unsigned char> payload(count * 8);
  in.read(reinterpret_cast<char*>(payload.data()), static_cast<std::streamsize>(payload.size()));
  const auto read = static_cast<std::size_t>(in.gcount());
  if (read != payload.size()) {
    throw ParseError("f64le: truncated payload (" + std::to_string(read) + " of " +
                         std::to_string(payload.size()) + " bytes)",
                     header.size() + read);
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError("f64le: trailing bytes after payload", header.size() + payload.size());
  }
  Matrix x(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < count; ++i) {
    const double v = decode_f64(payload.data() + 8 * i);
    if (!std::isfinite(v)) throw ParseError("f64le: non-finite value", header.size() + 8 * i);
    x.data()[i] = v;
  }
  return DataMatrix(std::move(x));
}

}  // namespace

DataFormat parse_format(const std::string& name) {
  if (name == "csv") return DataFormat::csv;
  if (name == "f64le" || name == "bin" || name == "vrpc") return DataFormat::f64le;
  throw ParseError("unknown dataset format '" + name + "' (expected csv or f64le)", 0);
}

const char* format_name(DataFormat format) { return format == DataFormat::csv ? "csv" : "f64le"; }

DataMatrix read_dataset(std::istream& in, DataFormat format) {
  return format == DataFormat::csv ? read_csv(in) : read_binary(in);
}

void write_dataset(std::ostream& out, const Matrix& columns, DataFormat format) {
  if (format == DataFormat::csv) {
    std::array<char, 32> buf{};
    for (Eigen::Index i = 0; i < columns.cols(); ++i) {
      for (Eigen::Index j = 0; j < columns.rows(); ++j) {
        if (j > 0) out.put(',');
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), columns(j, i));
        out.write(buf.data(), res.ptr - buf.data());
      }
      out.put('\n');
    }
    return;
  }
  if (columns.rows() > std::numeric_limits<std::uint32_t>::max() ||
      columns.cols() > std::numeric_limits<std::uint32_t>::max()) {
    throw ContractViolation("f64le: dimensions exceed u32");
  }
  std::array<unsigned char, 12> header{};
  std::memcpy(header.data(), kMagic.data(), 4);
  encode_u32(static_cast<std::uint32_t>(columns.rows()), header.data() + 4);
  encode_u32(static_cast<std::uint32_t>(columns.cols()), header.data() + 8);
  out.write(reinterpret_cast<const char*>(header.data()), header.size());
  std::vector<unsigned char> payload(static_cast<std::size_t>(columns.size()) * 8);
  for (Eigen::Index i = 0; i < columns.size(); ++i) {
    encode_f64(columns.data()[i], payload.data() + 8 * i);
  }
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

DataMatrix load_dataset(const std::string& path, DataFormat format) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path, 0);
  return read_dataset(in, format);
}

void save_dataset(const std::string& path, const Matrix& columns, DataFormat format) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path, 0);
  write_dataset(out, columns, format);
  if (!out) throw ParseError("write failed for " + path, 0);
}

}  // namespace vrpca
