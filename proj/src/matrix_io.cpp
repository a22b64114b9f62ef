#include "txflow/matrix_io.hpp"

#include <cstdlib>
#include <fstream>

#include "txflow/csv.hpp"
#include "txflow/error.hpp"

namespace txflow {

void write_matrix_csv(std::ostream& out, const LabeledMatrix& m) {
    std::vector<std::string> row{""};
    row.insert(row.end(), m.col_ids.begin(), m.col_ids.end());
    csv::write_row(out, row);
    for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
        row.assign(1, m.row_ids[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) row.push_back(csv::format_double(m.values(i, j)));
        csv::write_row(out, row);
    }
}

void write_matrix_csv(const std::filesystem::path& path, const LabeledMatrix& m) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    write_matrix_csv(out, m);
}

LabeledMatrix parse_matrix_csv(std::istream& in) {
    LabeledMatrix m;
    std::string line;
    std::vector<std::vector<double>> rows;
    bool header = true;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (csv::trim(line).empty()) continue;
        auto fields = csv::split_line(line);
        if (header) {
            m.col_ids.assign(fields.begin() + 1, fields.end());
            header = false;
            continue;
        }
        if (fields.size() != m.col_ids.size() + 1)
            throw DataError("matrix line " + std::to_string(lineno) + ": expected " +
                            std::to_string(m.col_ids.size() + 1) + " fields");
        m.row_ids.push_back(fields[0]);
        std::vector<double> values;
        for (std::size_t j = 1; j < fields.size(); ++j) {
            char* end = nullptr;
            const auto text = std::string(csv::trim(fields[j]));
            const double v = std::strtod(text.c_str(), &end);
            if (text.empty() || *end != '\0')
                throw DataError("matrix line " + std::to_string(lineno) + ": bad number '" + text + "'");
            values.push_back(v);
        }
        rows.push_back(std::move(values));
    }
    m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.col_ids.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

LabeledMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read matrix file " + path.string());
    return parse_matrix_csv(in);
}

}  // namespace txflow
