#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace txflow {

/// Dense matrix with row and column labels. CSV layout: a header row
/// `,<col_1>,...,<col_M>` followed by rows `<row_i>,<x_i1>,...,<x_iM>`.
struct LabeledMatrix {
    std::vector<std::string> row_ids;
    std::vector<std::string> col_ids;
    Eigen::MatrixXd values;
};

void write_matrix_csv(std::ostream& out, const LabeledMatrix& m);
void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& m);
LabeledMatrix read_matrix_csv(const std::filesystem::path& path);
LabeledMatrix parse_matrix_csv(std::istream& in);

}  // namespace txflow
