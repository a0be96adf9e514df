#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "rfsim/rng.hpp"
#include "rfsim/schema.hpp"

namespace rfsim {

// Mixed-type rows stored column-wise: one double vector per numeric column,
// one string vector per categorical column, in schema order within each kind.
struct Dataset {
    FeatureSchema schema;
    std::vector<std::vector<double>> numeric_cols;
    std::vector<std::vector<std::string>> categorical_cols;
    std::vector<double> y;

    std::size_t n_rows() const { return y.size(); }

    // Maps schema column index -> index within numeric_cols / categorical_cols.
    std::size_t storage_index(std::size_t schema_col) const {
        std::size_t k = 0;
        const ColumnKind kind = schema.columns[schema_col].kind;
        for (std::size_t i = 0; i < schema_col; ++i)
            k += (schema.columns[i].kind == kind);
        return k;
    }
};

namespace detail {

inline double parse_double(const std::string& cell, const std::string& context) {
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("non-numeric cell '" + cell + "' in " + context);
    if (!std::isfinite(value))
        throw std::invalid_argument("non-finite cell '" + cell + "' in " + context);
    return value;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

// Loads and validates a CSV against the schema. The header must contain
// exactly the schema's feature columns plus the target, in any order.
// Rejects missing values and zero targets (MAPE divides by y_i).
inline Dataset load_csv(const std::string& path, const FeatureSchema& schema) {
    schema.validate();
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open csv file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty csv file: " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::vector<std::string> header = detail::split_csv_line(line);

    std::unordered_map<std::string, std::size_t> position;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (!position.emplace(header[i], i).second)
            throw std::invalid_argument("duplicate column '" + header[i] + "' in csv header");
    }
    std::vector<std::size_t> col_pos(schema.columns.size());
    for (std::size_t c = 0; c < schema.columns.size(); ++c) {
        auto it = position.find(schema.columns[c].name);
        if (it == position.end())
            throw std::invalid_argument("missing column '" + schema.columns[c].name + "' in " + path);
        col_pos[c] = it->second;
    }
    auto target_it = position.find(schema.target);
    if (target_it == position.end())
        throw std::invalid_argument("missing column '" + schema.target + "' in " + path);
    const std::size_t target_pos = target_it->second;
    if (header.size() != schema.columns.size() + 1)
        throw std::invalid_argument("csv header has columns not in schema: " + path);

    Dataset data;
    data.schema = schema;
    data.numeric_cols.resize(schema.n_numeric());
    data.categorical_cols.resize(schema.n_categorical());

    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> cells = detail::split_csv_line(line);
        if (cells.size() != header.size())
            throw std::invalid_argument("row " + std::to_string(row) + " has " +
                                        std::to_string(cells.size()) + " cells, expected " +
                                        std::to_string(header.size()));
        std::size_t num_k = 0, cat_k = 0;
        for (std::size_t c = 0; c < schema.columns.size(); ++c) {
            const std::string& cell = cells[col_pos[c]];
            if (cell.empty())
                throw std::invalid_argument("missing value in column '" + schema.columns[c].name +
                                            "', row " + std::to_string(row));
            if (schema.columns[c].kind == ColumnKind::numeric) {
                data.numeric_cols[num_k++].push_back(
                    detail::parse_double(cell, "column '" + schema.columns[c].name + "'"));
            } else {
                data.categorical_cols[cat_k++].push_back(cell);
            }
        }
        const std::string& ycell = cells[target_pos];
        if (ycell.empty())
            throw std::invalid_argument("missing value in target column, row " + std::to_string(row));
        const double yv = detail::parse_double(ycell, "target column");
        if (yv == 0.0)
            throw std::invalid_argument("target zero at row " + std::to_string(row) +
                                        ": MAPE is undefined for y = 0");
        data.y.push_back(yv);
        ++row;
    }
    return data;
}

inline void save_csv(const std::string& path, const Dataset& data) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write csv file: " + path);
    for (const auto& c : data.schema.columns) out << c.name << ',';
    out << data.schema.target << '\n';
    for (std::size_t i = 0; i < data.n_rows(); ++i) {
        std::size_t num_k = 0, cat_k = 0;
        for (const auto& c : data.schema.columns) {
            if (c.kind == ColumnKind::numeric)
                out << detail::format_double(data.numeric_cols[num_k++][i]);
            else
                out << data.categorical_cols[cat_k++][i];
            out << ',';
        }
        out << detail::format_double(data.y[i]) << '\n';
    }
}

inline Dataset subset(const Dataset& data, const std::vector<std::int32_t>& indices) {
    Dataset out;
    out.schema = data.schema;
    out.numeric_cols.resize(data.numeric_cols.size());
    out.categorical_cols.resize(data.categorical_cols.size());
    for (std::int32_t idx : indices) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= data.n_rows())
            throw std::invalid_argument("subset: index out of range");
    }
    for (std::size_t c = 0; c < data.numeric_cols.size(); ++c) {
        out.numeric_cols[c].reserve(indices.size());
        for (std::int32_t idx : indices) out.numeric_cols[c].push_back(data.numeric_cols[c][idx]);
    }
    for (std::size_t c = 0; c < data.categorical_cols.size(); ++c) {
        out.categorical_cols[c].reserve(indices.size());
        for (std::int32_t idx : indices) out.categorical_cols[c].push_back(data.categorical_cols[c][idx]);
    }
    out.y.reserve(indices.size());
    for (std::int32_t idx : indices) out.y.push_back(data.y[idx]);
    return out;
}

struct SplitIndices {
    std::vector<std::int32_t> train;
    std::vector<std::int32_t> test;
};

// Seeded shuffle, first round(fraction * n) indices go to train.
inline SplitIndices train_test_split(std::size_t n, double fraction, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("train_test_split: need at least 2 rows");
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("train_test_split: fraction must be in (0,1)");
    std::vector<std::int32_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle_portable(order, rng);
    const auto n_train = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    if (n_train == 0) throw std::invalid_argument("train_test_split: empty train split");
    if (n_train >= n) throw std::invalid_argument("train_test_split: empty test split");
    SplitIndices split;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    return split;
}

struct Fold {
    std::vector<std::int32_t> train;
    std::vector<std::int32_t> validation;
};

// Shuffles the given indices and deals them into k folds whose sizes differ
// by at most one (the first n % k folds take the extra element).
inline std::vector<Fold> kfold_indices(const std::vector<std::int32_t>& indices, int k,
                                       std::uint64_t seed) {
    if (k < 2) throw std::invalid_argument("kfold_indices: k must be >= 2");
    if (indices.size() < static_cast<std::size_t>(k))
        throw std::invalid_argument("kfold_indices: k exceeds number of indices");
    std::vector<std::int32_t> order = indices;
    Rng rng(seed);
    shuffle_portable(order, rng);

    const std::size_t n = order.size();
    const std::size_t base = n / static_cast<std::size_t>(k);
    const std::size_t extra = n % static_cast<std::size_t>(k);
    std::vector<Fold> folds(static_cast<std::size_t>(k));
    std::size_t begin = 0;
    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::size_t len = base + (f < extra ? 1 : 0);
        folds[f].validation.assign(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                   order.begin() + static_cast<std::ptrdiff_t>(begin + len));
        begin += len;
    }
    for (std::size_t f = 0; f < folds.size(); ++f) {
        folds[f].train.reserve(n - folds[f].validation.size());
        std::size_t pos = 0;
        for (std::size_t g = 0; g < folds.size(); ++g) {
            const std::size_t len = folds[g].validation.size();
            if (g != f)
                folds[f].train.insert(folds[f].train.end(), order.begin() + static_cast<std::ptrdiff_t>(pos),
                                      order.begin() + static_cast<std::ptrdiff_t>(pos + len));
            pos += len;
        }
    }
    return folds;
}

}  // namespace rfsim
