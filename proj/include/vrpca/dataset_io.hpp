#pragma once

#include <iosfwd>
#include <string>

#include "vrpca/matrix_core.hpp"

namespace vrpca {

enum class DataFormat { csv, f64le };

/// "csv" or "f64le"; throws ParseError otherwise.
DataFormat parse_format(const std::string& name);
const char* format_name(DataFormat format);

/// CSV: one data point per line, d comma-separated decimals, no header.
/// f64le: "VRPC", u32 d, u32 n (little-endian), then n*d little-endian doubles,
/// one column after another. Errors carry a line number (CSV) or byte offset.
DataMatrix read_dataset(std::istream& in, DataFormat format);
void write_dataset(std::ostream& out, const Matrix& columns, DataFormat format);

DataMatrix load_dataset(const std::string& path, DataFormat format);
void save_dataset(const std::string& path, const Matrix& columns, DataFormat format);

}  // namespace vrpca
