#include "reglsl/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "reglsl/error.hpp"
#include "reglsl/rom.hpp"

namespace reglsl {

namespace {

constexpr const char* kDatasetFormat = "reglsl-dataset-1";
constexpr const char* kRomFormat = "reglsl-rom-1";

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> parse_numbers(const std::string& text, const std::string& where) {
  std::vector<double> out;
  const char* p = text.data();
  const char* end = p + text.size();
  while (p < end) {
    while (p < end && (*p == ' ' || *p == '\t' || *p == ',')) ++p;
    if (p == end) break;
    double v = 0.0;
    const auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) throw ParseError(where + ": malformed number near '" + std::string(p, std::min<std::size_t>(16, end - p)) + "'");
    out.push_back(v);
    p = next;
  }
  return out;
}

void write_numbers(std::ostream& out, const double* values, Eigen::Index count) {
  for (Eigen::Index i = 0; i < count; ++i) {
    if (i > 0) out << ' ';
    out << format_double(values[i]);
  }
}

void write_row_major(std::ostream& out, const Matrix& m) {
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
  write_numbers(out, rm.data(), rm.size());
}

Matrix from_row_major(const std::vector<double>& v, Eigen::Index rows, Eigen::Index cols,
                      const std::string& where) {
  if (static_cast<Eigen::Index>(v.size()) != rows * cols) {
    throw ParseError(where + ": expected " + std::to_string(rows * cols) + " values, found " +
                     std::to_string(v.size()));
  }
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v[static_cast<std::size_t>(i * cols + j)];
  }
  return m;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::map<std::string, std::string> read_pairs(std::istream& in, const std::string& origin) {
  std::map<std::string, std::string> pairs;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParseError(origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    pairs[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return pairs;
}

const std::string& require(const std::map<std::string, std::string>& pairs, const std::string& key,
                           const std::string& origin) {
  const auto it = pairs.find(key);
  if (it == pairs.end()) throw ParseError(origin + ": missing key '" + key + "'");
  return it->second;
}

}  // namespace

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

void write_dataset(std::ostream& out, const TransferDataset& data) {
  data.validate();
  out << "# reglsl transfer-function dataset\n";
  out << "format = " << kDatasetFormat << '\n';
  out << "kind = " << to_string(data.kind) << '\n';
  out << "grid = " << data.grid.dimension << ' ' << data.grid.nodes << ' '
      << format_double(data.grid.lo) << ' ' << format_double(data.grid.hi) << '\n';
  out << "points = " << data.points() << '\n';
  out << "block = " << data.block_size() << '\n';
  out << "noise_percent = " << format_double(data.noise.percent) << '\n';
  out << "noise_seed = " << data.noise.seed << '\n';
  out << "lambda = ";
  write_numbers(out, data.lambdas.data(), data.points());
  out << '\n';
  for (int j = 0; j < data.points(); ++j) {
    out << "F " << j << " = ";
    write_row_major(out, data.values[static_cast<std::size_t>(j)]);
    out << '\n';
  }
  for (int j = 0; j < data.points(); ++j) {
    out << "dF " << j << " = ";
    write_row_major(out, data.derivatives[static_cast<std::size_t>(j)]);
    out << '\n';
  }
}

void write_dataset(const std::filesystem::path& path, const TransferDataset& data) {
  std::ofstream out = open_out(path);
  write_dataset(out, data);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

TransferDataset read_dataset(std::istream& in, const std::string& origin) {
  const auto pairs = read_pairs(in, origin);
  if (require(pairs, "format", origin) != kDatasetFormat) {
    throw ParseError(origin + ": unsupported format '" + pairs.at("format") + "'");
  }
  TransferDataset data;
  data.kind = parse_equation_kind(require(pairs, "kind", origin));
  const auto grid = parse_numbers(require(pairs, "grid", origin), origin + ": grid");
  if (grid.size() != 4) throw ParseError(origin + ": grid needs 'dimension nodes lo hi'");
  data.grid = {static_cast<int>(grid[0]), static_cast<int>(grid[1]), grid[2], grid[3]};
  const auto points = static_cast<int>(parse_numbers(require(pairs, "points", origin), origin)[0]);
  const auto block = static_cast<Eigen::Index>(parse_numbers(require(pairs, "block", origin), origin)[0]);
  data.noise.percent = parse_numbers(require(pairs, "noise_percent", origin), origin)[0];
  data.noise.seed = std::stoull(require(pairs, "noise_seed", origin));
  data.lambdas = parse_numbers(require(pairs, "lambda", origin), origin + ": lambda");
  if (static_cast<int>(data.lambdas.size()) != points) {
    throw ParseError(origin + ": 'lambda' has " + std::to_string(data.lambdas.size()) +
                     " entries, 'points' says " + std::to_string(points));
  }
  for (int j = 0; j < points; ++j) {
    const std::string fk = "F " + std::to_string(j);
    const std::string dk = "dF " + std::to_string(j);
    data.values.push_back(
        from_row_major(parse_numbers(require(pairs, fk, origin), origin + ": " + fk), block, block,
                       origin + ": " + fk));
    data.derivatives.push_back(
        from_row_major(parse_numbers(require(pairs, dk, origin), origin + ": " + dk), block, block,
                       origin + ": " + dk));
  }
  try {
    data.validate();
  } catch (const Error& e) {
    throw ParseError(origin + ": " + e.what());
  }
  return data;
}

TransferDataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
  return read_dataset(in, path.string());
}

void write_rom(std::ostream& out, const RomMatrices& rom) {
  out << "# reglsl data-driven ROM\n";
  out << "format = " << kRomFormat << '\n';
  out << "kind = " << to_string(rom.kind) << '\n';
  out << "points = " << rom.lambdas.size() << '\n';
  out << "block = " << rom.block << '\n';
  out << "lambda = ";
  write_numbers(out, rom.lambdas.data(), static_cast<Eigen::Index>(rom.lambdas.size()));
  out << '\n';
  const auto matrix = [&](const char* name, const Matrix& m) {
    out << name << " = " << m.rows() << ' ' << m.cols() << ' ';
    write_row_major(out, m);
    out << '\n';
  };
  matrix("M", rom.mass);
  matrix("S", rom.stiffness);
  matrix("B", rom.rhs);
}

void write_rom(const std::filesystem::path& path, const RomMatrices& rom) {
  std::ofstream out = open_out(path);
  write_rom(out, rom);
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_columns_csv(const std::filesystem::path& path, const GridSpec& grid,
                       const Matrix& columns, const std::vector<std::string>& names) {
  if (columns.rows() != grid.size() || static_cast<std::size_t>(columns.cols()) != names.size()) {
    throw DimensionError("write_columns_csv: field shape does not match grid/names");
  }
  std::ofstream out = open_out(path);
  const Matrix xy = node_coordinates(grid);
  out << (grid.dimension == 1 ? "x" : "x,y");
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (Eigen::Index i = 0; i < columns.rows(); ++i) {
    out << format_double(xy(i, 0));
    if (grid.dimension == 2) out << ',' << format_double(xy(i, 1));
    for (Eigen::Index c = 0; c < columns.cols(); ++c) out << ',' << format_double(columns(i, c));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_field_csv(const std::filesystem::path& path, const GridSpec& grid, const Vector& field) {
  write_columns_csv(path, grid, field, {"value"});
}

Vector read_field_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::string line;
  std::getline(in, line);
  std::vector<double> values;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto comma = line.find_last_of(',');
    values.push_back(parse_numbers(line.substr(comma + 1), path.string())[0]);
  }
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace reglsl
