#include "wsc/matrix_io.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace wsc::io {

namespace {

constexpr char kMagic[4] = {'W', 'S', 'C', '1'};

Eigen::MatrixXd read_wsc1(std::ifstream& in, const std::string& path) {
    std::uint64_t rows = 0, cols = 0;
    in.read(reinterpret_cast<char*>(&rows), 8);
    in.read(reinterpret_cast<char*>(&cols), 8);
    if (!in)
        throw IoError(path + ": truncated WSC1 header");
    if (rows == 0 || cols == 0 || rows > (1u << 24) || cols > (1u << 24))
        throw IoError(path + ": implausible WSC1 dimensions");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    std::vector<double> row(cols);
    for (std::uint64_t i = 0; i < rows; ++i) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(cols * sizeof(double)));
        if (!in)
            throw IoError(path + ": truncated WSC1 payload");
        for (std::uint64_t j = 0; j < cols; ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
    }
    if (!m.allFinite())
        throw IoError(path + ": non-finite entries");
    return m;
}

}  // namespace

Eigen::MatrixXd read_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path + ": cannot open for reading");
    char head[4] = {0, 0, 0, 0};
    in.read(head, 4);
    if (in && std::memcmp(head, kMagic, 4) == 0)
        return read_wsc1(in, path);

    in.clear();
    in.seekg(0);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0')
                throw IoError(path + ": bad CSV cell '" + cell + "'");
            if (!std::isfinite(v))
                throw IoError(path + ": non-finite entries");
            row.push_back(v);
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw IoError(path + ": ragged CSV rows");
        rows.push_back(std::move(row));
    }
    if (rows.empty() || rows.front().empty())
        throw IoError(path + ": empty matrix");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    return m;
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(path + ": cannot open for writing");
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out)
        throw IoError(path + ": write failed");
}

void write_matrix_wsc1(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(path + ": cannot open for writing");
    out.write(kMagic, 4);
    const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
    const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
    out.write(reinterpret_cast<const char*>(&rows), 8);
    out.write(reinterpret_cast<const char*>(&cols), 8);
    std::vector<double> row(cols);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            row[static_cast<std::size_t>(j)] = m(i, j);
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(cols * sizeof(double)));
    }
    if (!out)
        throw IoError(path + ": write failed");
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
    if (path.size() >= 5 && path.compare(path.size() - 5, 5, ".wsc1") == 0)
        write_matrix_wsc1(path, m);
    else
        write_matrix_csv(path, m);
}

}  // namespace wsc::io
