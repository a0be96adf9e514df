#pragma once

#include <cstddef>
#include <fstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"

namespace rfsim {

enum class ColumnKind { numeric, categorical };

struct SchemaColumn {
    std::string name;
    ColumnKind kind = ColumnKind::numeric;

    bool operator==(const SchemaColumn&) const = default;
};

// Input feature columns plus the name of the numeric target column. The
// target is not listed among the feature columns.
struct FeatureSchema {
    std::vector<SchemaColumn> columns;
    std::string target;

    bool operator==(const FeatureSchema&) const = default;

    void validate() const {
        if (target.empty()) throw std::invalid_argument("schema: empty target name");
        std::unordered_set<std::string> seen;
        for (const auto& c : columns) {
            if (c.name.empty()) throw std::invalid_argument("schema: empty column name");
            if (!seen.insert(c.name).second)
                throw std::invalid_argument("schema: duplicate column name '" + c.name + "'");
        }
        if (seen.count(target))
            throw std::invalid_argument("schema: target '" + target + "' collides with a feature column");
    }

    std::size_t n_numeric() const {
        std::size_t k = 0;
        for (const auto& c : columns) k += (c.kind == ColumnKind::numeric);
        return k;
    }

    std::size_t n_categorical() const { return columns.size() - n_numeric(); }

    // Index into `columns`, or npos.
    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i)
            if (columns[i].name == name) return i;
        return static_cast<std::size_t>(-1);
    }
};

inline nlohmann::json schema_to_json(const FeatureSchema& schema) {
    nlohmann::json cols = nlohmann::json::array();
    for (const auto& c : schema.columns) {
        cols.push_back({{"name", c.name},
                        {"kind", c.kind == ColumnKind::numeric ? "numeric" : "categorical"}});
    }
    return {{"columns", cols}, {"target", schema.target}};
}

inline FeatureSchema schema_from_json(const nlohmann::json& j) {
    FeatureSchema schema;
    if (!j.contains("columns") || !j.contains("target"))
        throw std::invalid_argument("schema json: expected keys 'columns' and 'target'");
    for (const auto& c : j.at("columns")) {
        SchemaColumn col;
        col.name = c.at("name").get<std::string>();
        const std::string kind = c.at("kind").get<std::string>();
        if (kind == "numeric")
            col.kind = ColumnKind::numeric;
        else if (kind == "categorical")
            col.kind = ColumnKind::categorical;
        else
            throw std::invalid_argument("schema json: unknown kind '" + kind + "'");
        schema.columns.push_back(std::move(col));
    }
    schema.target = j.at("target").get<std::string>();
    schema.validate();
    return schema;
}

inline FeatureSchema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open schema file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument("schema file " + path + ": " + e.what());
    }
    return schema_from_json(j);
}

inline void save_schema(const std::string& path, const FeatureSchema& schema) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write schema file: " + path);
    out << schema_to_json(schema).dump(2) << '\n';
}

}  // namespace rfsim
