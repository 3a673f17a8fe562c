#pragma once

#include <string>

#include <Eigen/Dense>

#include "wsc/errors.hpp"

namespace wsc::io {

// Reads a dense matrix. The format is sniffed: files starting with the
// magic bytes "WSC1" are parsed as the binary format (u64 rows, u64 cols,
// little-endian f64 row-major); anything else is comma-separated text, one
// row per line, no header. Throws IoError on parse failures or non-finite
// entries.
Eigen::MatrixXd read_matrix(const std::string& path);

// Writes CSV unless the path ends in ".wsc1", which selects the binary
// format. CSV floats use 17 significant digits for byte determinism.
void write_matrix(const std::string& path, const Eigen::MatrixXd& m);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
void write_matrix_wsc1(const std::string& path, const Eigen::MatrixXd& m);

// %.17g formatting shared by every CSV emitter.
std::string format_double(double x);

}  // namespace wsc::io
