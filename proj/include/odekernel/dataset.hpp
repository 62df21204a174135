#ifndef ODEKERNEL_DATASET_HPP
#define ODEKERNEL_DATASET_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <string>

#include "odekernel/grid.hpp"
#include "odekernel/observations.hpp"

namespace odekernel {

/// Shortest text that reads back to the same double (%.17g).
std::string format_real(double value);

/// CSV with header `time,state_1,...,state_m[,input_1,...]`, one row per
/// observation time. Throws SchemaError on any violation.
ObservationSet parse_dataset(const std::string& text, const std::string& source = "<data>");
ObservationSet read_dataset(const std::filesystem::path& path);

/// Inverse of parse_dataset; states m x n, inputs p x n (may be empty).
std::string format_dataset(const TimeGrid& grid, const Eigen::MatrixXd& states,
                           const Eigen::MatrixXd& inputs = Eigen::MatrixXd());

/// Writes the whole file at once. Throws ConfigError when the path is unwritable.
void write_text_file(const std::filesystem::path& path, const std::string& content);

/// Creates `dir` if needed and checks that a file can be created inside it.
void ensure_writable_directory(const std::filesystem::path& dir);

}  // namespace odekernel

#endif  // ODEKERNEL_DATASET_HPP
