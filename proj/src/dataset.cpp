#include "odekernel/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "odekernel/errors.hpp"

namespace odekernel {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return fields;
}

}  // namespace

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

ObservationSet parse_dataset(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(source + ": empty file, expected a header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const std::vector<std::string> header = split_fields(line);
  if (header.empty() || header[0] != "time") {
    throw SchemaError(source + ": header must start with 'time'");
  }
  std::size_t m = 0;
  std::size_t p = 0;
  for (std::size_t k = 1; k < header.size(); ++k) {
    if (p == 0 && header[k] == "state_" + std::to_string(m + 1)) {
      ++m;
    } else if (header[k] == "input_" + std::to_string(p + 1)) {
      ++p;
    } else {
      throw SchemaError(source + ": unexpected header column '" + header[k] + "'");
    }
  }
  if (m == 0) throw SchemaError(source + ": header has no state columns");

  std::vector<std::vector<double>> rows;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      // Only a trailing newline is allowed.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw SchemaError(source + ":" + std::to_string(number) + ": blank row");
    }
    const std::vector<std::string> fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw SchemaError(source + ":" + std::to_string(number) + ": " + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(header.size()));
    }
    std::vector<double> row;
    for (std::size_t k = 0; k < fields.size(); ++k) {
      const std::string& f = fields[k];
      double value = 0.0;
      const char* end = f.data() + f.size();
      const auto [ptr, ec] = std::from_chars(f.data(), end, value);
      if (f.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw SchemaError(source + ":" + std::to_string(number) + ": column '" + header[k] +
                          "' has missing or invalid value '" + f + "'");
      }
      row.push_back(value);
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 3) {
    throw SchemaError(source + ": need at least 3 observation rows, found " + std::to_string(rows.size()));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd times(n);
  Eigen::MatrixXd states(static_cast<Eigen::Index>(m), n);
  Eigen::MatrixXd inputs(static_cast<Eigen::Index>(p), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    times[i] = row[0];
    if (i > 0 && !(times[i] > times[i - 1])) {
      throw SchemaError(source + ":" + std::to_string(i + 2) + ": time column is not strictly increasing");
    }
    for (std::size_t j = 0; j < m; ++j) states(static_cast<Eigen::Index>(j), i) = row[1 + j];
    for (std::size_t j = 0; j < p; ++j) inputs(static_cast<Eigen::Index>(j), i) = row[1 + m + j];
  }
  return ObservationSet(TimeGrid(times), std::move(states), std::move(inputs));
}

ObservationSet read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot read data file '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_dataset(text.str(), path.string());
}

std::string format_dataset(const TimeGrid& grid, const Eigen::MatrixXd& states,
                           const Eigen::MatrixXd& inputs) {
  const Eigen::Index n = grid.size();
  if (states.cols() != n || (inputs.size() > 0 && inputs.cols() != n)) {
    throw SchemaError("dataset columns do not match the time grid");
  }
  std::string out = "time";
  for (Eigen::Index j = 0; j < states.rows(); ++j) out += ",state_" + std::to_string(j + 1);
  for (Eigen::Index j = 0; j < inputs.rows(); ++j) out += ",input_" + std::to_string(j + 1);
  out += '\n';
  for (Eigen::Index i = 0; i < n; ++i) {
    out += format_real(grid[i]);
    for (Eigen::Index j = 0; j < states.rows(); ++j) out += "," + format_real(states(j, i));
    for (Eigen::Index j = 0; j < inputs.rows(); ++j) out += "," + format_real(inputs(j, i));
    out += '\n';
  }
  return out;
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
  out.flush();
  if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

void ensure_writable_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw ConfigError("output directory '" + dir.string() + "' cannot be created");
  }
  const std::filesystem::path probe = dir / ".odekernel-write-probe";
  {
    std::ofstream out(probe, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("output directory '" + dir.string() + "' is not writable");
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace odekernel
