#include "rinfer/dataset.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rinfer {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

bool parse_double(const std::string& s, Scalar& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t row, const std::string& msg) {
    throw std::runtime_error(path.string() + ": row " + std::to_string(row) + ": " + msg);
}

}  // namespace

CreditDataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error(path.string() + ": cannot open file");

    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path.string() + ": no data rows");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = split_line(line);

    int label_col = -1, id_col = -1;
    std::vector<int> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (options.label_column && header[c] == *options.label_column)
            label_col = static_cast<int>(c);
        else if (options.id_column && header[c] == *options.id_column)
            id_col = static_cast<int>(c);
        else
            feature_cols.push_back(static_cast<int>(c));
    }
    if (options.label_column && label_col < 0)
        throw std::runtime_error(path.string() + ": label column '" + *options.label_column +
                                 "' not found in header");
    if (options.id_column && id_col < 0)
        throw std::runtime_error(path.string() + ": id column '" + *options.id_column +
                                 "' not found in header");

    std::vector<CaseId> ids;
    std::vector<Scalar> values;
    std::optional<std::vector<Label>> labels;
    if (label_col >= 0) labels.emplace();

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        ++row;
        const std::vector<std::string> cells = split_line(line);
        if (cells.size() != header.size())
            fail(path, row,
                 "expected " + std::to_string(header.size()) + " cells, got " +
                     std::to_string(cells.size()));
        for (int c : feature_cols) {
            Scalar v;
            if (!parse_double(cells[static_cast<std::size_t>(c)], v))
                fail(path, row,
                     "column '" + header[static_cast<std::size_t>(c)] + "': non-numeric cell '" +
                         cells[static_cast<std::size_t>(c)] + "'");
            values.push_back(v);
        }
        if (label_col >= 0) {
            Scalar v;
            const std::string& cell = cells[static_cast<std::size_t>(label_col)];
            if (!parse_double(cell, v))
                fail(path, row, "label column: non-numeric cell '" + cell + "'");
            if (v == options.bad_value)
                labels->push_back(Label::Bad);
            else if (v == options.good_value)
                labels->push_back(Label::Good);
            else
                fail(path, row, "label value '" + cell + "' matches neither encoding");
        }
        if (id_col >= 0) {
            const std::string& cell = cells[static_cast<std::size_t>(id_col)];
            CaseId id;
            auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), id);
            if (ec != std::errc() || ptr != cell.data() + cell.size())
                fail(path, row, "id column: cannot parse '" + cell + "' as an integer");
            ids.push_back(id);
        } else {
            ids.push_back(static_cast<CaseId>(row - 1));
        }
    }
    if (row == 0) throw std::runtime_error(path.string() + ": no data rows");

    const Index n = static_cast<Index>(row);
    const Index d = static_cast<Index>(feature_cols.size());
    Matrix f(n, d);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < d; ++j) f(i, j) = values[static_cast<std::size_t>(i * d + j)];

    try {
        return CreditDataset(std::move(ids), std::move(f), std::move(labels));
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path.string() + ": " + e.what());
    }
}

void save_csv(const std::filesystem::path& path, const CreditDataset& ds, bool include_labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error(path.string() + ": cannot open file for writing");
    const bool with_labels = include_labels && ds.has_labels();

    out << "id";
    for (Index j = 0; j < ds.cols(); ++j) out << ",f" << j;
    if (with_labels) out << ",label";
    out << '\n';

    char buf[64];
    for (Index i = 0; i < ds.rows(); ++i) {
        out << ds.ids()[static_cast<std::size_t>(i)];
        for (Index j = 0; j < ds.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", ds.features()(i, j));
            out << ',' << buf;
        }
        if (with_labels)
            out << ',' << (ds.labels()[static_cast<std::size_t>(i)] == Label::Bad ? 1 : 0);
        out << '\n';
    }
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

}  // namespace rinfer
