#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "reglsl/forward_model.hpp"

namespace reglsl {

struct RomMatrices;

/// Shortest text that parses back to exactly `value` is not required; every
/// number is written with 17 significant digits, which always round-trips.
std::string format_double(double value);

// Dataset container: one `key = value` pair per line, '#' comments. Blocks are
// written row-major as `F <j> = ...` and `dF <j> = ...`.
void write_dataset(std::ostream& out, const TransferDataset& data);
void write_dataset(const std::filesystem::path& path, const TransferDataset& data);
TransferDataset read_dataset(std::istream& in, const std::string& origin = "<stream>");
TransferDataset read_dataset(const std::filesystem::path& path);

/// ROM matrices in the same container style (`M`, `S`, `B` as
/// `rows cols values...`).
void write_rom(std::ostream& out, const RomMatrices& rom);
void write_rom(const std::filesystem::path& path, const RomMatrices& rom);

/// Grid field as CSV with header `x,value` (1D) or `x,y,value` (2D).
void write_field_csv(const std::filesystem::path& path, const GridSpec& grid, const Vector& field);

/// Several fields sharing one grid: header `x[,y],<name_0>,<name_1>,...`.
void write_columns_csv(const std::filesystem::path& path, const GridSpec& grid,
                       const Matrix& columns, const std::vector<std::string>& names);

/// Reads the value column of a file written by write_field_csv.
Vector read_field_csv(const std::filesystem::path& path);

}  // namespace reglsl
