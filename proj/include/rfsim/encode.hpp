#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "rfsim/dataset.hpp"

namespace rfsim {

// Dense row-major design matrix: numeric columns first (schema order), then
// one indicator block per categorical column with levels in first-appearance
// order of the training data.
struct EncodedMatrix {
    std::size_t n_rows = 0;
    std::size_t n_cols = 0;
    std::vector<double> values;  // row-major
    std::vector<std::string> feature_names;
    std::vector<double> y;

    double at(std::size_t i, std::size_t j) const { return values[i * n_cols + j]; }
    std::span<const double> row(std::size_t i) const {
        return {values.data() + i * n_cols, n_cols};
    }
};

// A named set of encoded columns that came from one schema column.
struct FeatureGroup {
    std::string name;
    std::vector<std::size_t> columns;
};

// Holds the training level vocabulary so test data can be encoded against it.
// Unseen test-time levels encode as an all-zero indicator block.
class OneHotEncoder {
public:
    OneHotEncoder() = default;

    explicit OneHotEncoder(const Dataset& train) : schema_(train.schema) {
        schema_.validate();
        levels_.resize(train.categorical_cols.size());
        level_index_.resize(train.categorical_cols.size());
        for (std::size_t c = 0; c < train.categorical_cols.size(); ++c) {
            for (const std::string& level : train.categorical_cols[c]) {
                if (level_index_[c].emplace(level, levels_[c].size()).second)
                    levels_[c].push_back(level);
            }
        }
    }

    const FeatureSchema& schema() const { return schema_; }
    const std::vector<std::vector<std::string>>& levels() const { return levels_; }

    std::size_t encoded_width() const {
        std::size_t p = schema_.n_numeric();
        for (const auto& lv : levels_) p += lv.size();
        return p;
    }

    std::vector<std::string> feature_names() const {
        std::vector<std::string> names;
        names.reserve(encoded_width());
        for (const auto& col : schema_.columns)
            if (col.kind == ColumnKind::numeric) names.push_back(col.name);
        std::size_t cat_k = 0;
        for (const auto& col : schema_.columns) {
            if (col.kind != ColumnKind::categorical) continue;
            for (const auto& level : levels_[cat_k]) names.push_back(col.name + "=" + level);
            ++cat_k;
        }
        return names;
    }

    // One group per schema column; categorical groups span their whole
    // indicator block.
    std::vector<FeatureGroup> feature_groups() const {
        std::vector<FeatureGroup> groups;
        std::size_t next_numeric = 0;
        for (const auto& col : schema_.columns) {
            if (col.kind == ColumnKind::numeric) groups.push_back({col.name, {next_numeric++}});
        }
        std::size_t offset = schema_.n_numeric();
        std::size_t cat_k = 0;
        for (const auto& col : schema_.columns) {
            if (col.kind != ColumnKind::categorical) continue;
            FeatureGroup g{col.name, {}};
            for (std::size_t l = 0; l < levels_[cat_k].size(); ++l) g.columns.push_back(offset + l);
            offset += levels_[cat_k].size();
            groups.push_back(std::move(g));
            ++cat_k;
        }
        return groups;
    }

    EncodedMatrix transform(const Dataset& data, std::size_t* unseen_cells = nullptr) const {
        if (!(data.schema == schema_))
            throw std::invalid_argument("one-hot transform: dataset schema differs from training schema");
        EncodedMatrix out;
        out.n_rows = data.n_rows();
        out.n_cols = encoded_width();
        out.values.assign(out.n_rows * out.n_cols, 0.0);
        out.feature_names = feature_names();
        out.y = data.y;

        std::size_t unseen = 0;
        const std::size_t n_num = schema_.n_numeric();
        for (std::size_t i = 0; i < out.n_rows; ++i) {
            double* row = out.values.data() + i * out.n_cols;
            for (std::size_t c = 0; c < n_num; ++c) row[c] = data.numeric_cols[c][i];
            std::size_t offset = n_num;
            for (std::size_t c = 0; c < data.categorical_cols.size(); ++c) {
                const auto it = level_index_[c].find(data.categorical_cols[c][i]);
                if (it != level_index_[c].end())
                    row[offset + it->second] = 1.0;
                else
                    ++unseen;
                offset += levels_[c].size();
            }
        }
        if (unseen_cells) *unseen_cells = unseen;
        return out;
    }

    nlohmann::json to_json() const {
        nlohmann::json lv = nlohmann::json::array();
        for (const auto& column_levels : levels_) lv.push_back(column_levels);
        return {{"schema", schema_to_json(schema_)}, {"levels", lv}};
    }

    static OneHotEncoder from_json(const nlohmann::json& j) {
        OneHotEncoder enc;
        enc.schema_ = schema_from_json(j.at("schema"));
        enc.levels_ = j.at("levels").get<std::vector<std::vector<std::string>>>();
        if (enc.levels_.size() != enc.schema_.n_categorical())
            throw std::invalid_argument("encoder json: level list count mismatch");
        enc.level_index_.resize(enc.levels_.size());
        for (std::size_t c = 0; c < enc.levels_.size(); ++c)
            for (std::size_t l = 0; l < enc.levels_[c].size(); ++l)
                enc.level_index_[c].emplace(enc.levels_[c][l], l);
        return enc;
    }

private:
    FeatureSchema schema_;
    std::vector<std::vector<std::string>> levels_;  // per categorical column
    std::vector<std::unordered_map<std::string, std::size_t>> level_index_;
};

inline EncodedMatrix one_hot_encode(const Dataset& data) {
    return OneHotEncoder(data).transform(data);
}

}  // namespace rfsim
