#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "json.hpp"

#include "rfsim/dataset.hpp"
#include "rfsim/rng.hpp"

namespace rfsim {

// Bond-like schema: coupon, coupon_frequency, duration, country,
// days_to_maturity, age, industry, amount_issued, amount_outstanding,
// bond_rating, plus optional numeric noise columns. Target is
// yield_to_maturity, rescaled to [0.32, 7.82].
struct SyntheticConfig {
    std::size_t n = 1000;
    std::uint64_t seed = 7;
    double noise_sd = 0.05;
    int country_levels = 8;
    int industry_levels = 12;
    int rating_levels = 7;
    int numeric_noise_columns = 2;
    std::vector<std::string> relevant_features = {"coupon",           "coupon_frequency",
                                                  "duration",         "days_to_maturity",
                                                  "industry",         "bond_rating"};

    void validate() const {
        if (n < 1) throw std::invalid_argument("synthetic config: n must be >= 1");
        if (noise_sd < 0.0) throw std::invalid_argument("synthetic config: noise_sd must be >= 0");
        if (country_levels < 2 || industry_levels < 2)
            throw std::invalid_argument("synthetic config: categorical level counts must be >= 2");
        if (rating_levels < 2 || rating_levels > 10)
            throw std::invalid_argument("synthetic config: rating_levels must be in [2, 10]");
        if (numeric_noise_columns < 0)
            throw std::invalid_argument("synthetic config: numeric_noise_columns must be >= 0");
    }
};

inline constexpr double kTargetMin = 0.32;
inline constexpr double kTargetMax = 7.82;

struct SyntheticData {
    Dataset data;
    std::vector<std::string> relevant_features;  // drive the target
    std::vector<std::string> noise_features;     // ignored by the target
};

namespace detail {

inline const std::vector<std::string>& rating_ladder() {
    static const std::vector<std::string> ladder = {"AAA", "AA", "A",  "BBB", "BB",
                                                    "B",   "CCC", "CC", "C",   "D"};
    return ladder;
}

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace detail

inline FeatureSchema synthetic_schema(const SyntheticConfig& config) {
    FeatureSchema schema;
    schema.columns = {{"coupon", ColumnKind::numeric},
                      {"coupon_frequency", ColumnKind::numeric},
                      {"duration", ColumnKind::numeric},
                      {"country", ColumnKind::categorical},
                      {"days_to_maturity", ColumnKind::numeric},
                      {"age", ColumnKind::numeric},
                      {"industry", ColumnKind::categorical},
                      {"amount_issued", ColumnKind::numeric},
                      {"amount_outstanding", ColumnKind::numeric},
                      {"bond_rating", ColumnKind::categorical}};
    for (int j = 0; j < config.numeric_noise_columns; ++j)
        schema.columns.push_back({"noise_" + std::to_string(j + 1), ColumnKind::numeric});
    schema.target = "yield_to_maturity";
    return schema;
}

// Deterministic per (n, seed, config). The target is a smooth blend of the
// configured relevant features (logistic in rating and duration, a
// coupon x duration interaction, linear terms elsewhere) plus seeded
// Gaussian noise, affinely rescaled to [0.32, 7.82].
inline SyntheticData generate_synthetic_bonds(const SyntheticConfig& config) {
    config.validate();
    const FeatureSchema schema = synthetic_schema(config);

    for (const auto& name : config.relevant_features)
        if (schema.column_index(name) == static_cast<std::size_t>(-1))
            throw std::invalid_argument("synthetic config: unknown relevant feature '" + name + "'");
    const std::unordered_set<std::string> relevant(config.relevant_features.begin(),
                                                   config.relevant_features.end());

    // Per-level categorical effects, from their own substreams so the row
    // stream is unaffected by level counts.
    std::vector<double> country_effect(static_cast<std::size_t>(config.country_levels));
    std::vector<double> industry_effect(static_cast<std::size_t>(config.industry_levels));
    {
        Rng rng(derive_seed(config.seed, 101));
        for (auto& e : country_effect) e = next_unit(rng);
    }
    {
        Rng rng(derive_seed(config.seed, 102));
        for (auto& e : industry_effect) e = next_unit(rng);
    }

    Dataset data;
    data.schema = schema;
    data.numeric_cols.resize(schema.n_numeric());
    data.categorical_cols.resize(schema.n_categorical());

    constexpr double kFreqChoices[4] = {1.0, 2.0, 4.0, 12.0};
    const double log_issue_lo = std::log(1e6), log_issue_hi = std::log(5e9);

    Rng row_rng(derive_seed(config.seed, 1));
    Rng noise_rng(derive_seed(config.seed, 2));

    std::vector<double> raw(config.n, 0.0);
    for (std::size_t i = 0; i < config.n; ++i) {
        const double coupon = next_uniform(row_rng, 0.25, 9.0);
        const double freq = kFreqChoices[next_below(row_rng, 4)];
        const double duration = next_uniform(row_rng, 0.25, 15.0);
        const auto country = static_cast<std::size_t>(next_below(row_rng, config.country_levels));
        const double dtm = next_uniform(row_rng, 30.0, 10800.0);
        const double age = next_uniform(row_rng, 0.0, 7300.0);
        const auto industry = static_cast<std::size_t>(next_below(row_rng, config.industry_levels));
        const double issued = std::exp(next_uniform(row_rng, log_issue_lo, log_issue_hi));
        const double out_ratio = next_uniform(row_rng, 0.3, 1.0);
        const auto rating = static_cast<std::size_t>(next_below(row_rng, config.rating_levels));

        std::size_t num_k = 0, cat_k = 0;
        data.numeric_cols[num_k++].push_back(coupon);
        data.numeric_cols[num_k++].push_back(freq);
        data.numeric_cols[num_k++].push_back(duration);
        data.categorical_cols[cat_k++].push_back("CTY" + std::to_string(country));
        data.numeric_cols[num_k++].push_back(dtm);
        data.numeric_cols[num_k++].push_back(age);
        data.categorical_cols[cat_k++].push_back("IND" + std::to_string(industry));
        data.numeric_cols[num_k++].push_back(issued);
        data.numeric_cols[num_k++].push_back(issued * out_ratio);
        data.categorical_cols[cat_k++].push_back(detail::rating_ladder()[rating]);

        std::vector<double> noise_vals(static_cast<std::size_t>(config.numeric_noise_columns));
        for (auto& v : noise_vals) {
            v = next_unit(row_rng);
            data.numeric_cols[num_k++].push_back(v);
        }

        // Normalized-to-[0,1] contributions per feature.
        const double cN = (coupon - 0.25) / 8.75;
        const double fN = freq / 12.0;
        const double dN = (duration - 0.25) / 14.75;
        const double mN = (dtm - 30.0) / 10770.0;
        const double aN = age / 7300.0;
        const double iN = (std::log(issued) - log_issue_lo) / (log_issue_hi - log_issue_lo);
        const double oN = (out_ratio - 0.3) / 0.7;
        const double rN =
            static_cast<double>(rating) / static_cast<double>(config.rating_levels - 1);

        double value = 0.0;
        if (relevant.count("bond_rating")) value += 1.6 * detail::logistic(4.0 * (rN - 0.5));
        if (relevant.count("duration")) value += 1.2 * detail::logistic(3.0 * (dN - 0.5));
        if (relevant.count("coupon")) {
            value += 0.5 * cN;
            if (relevant.count("duration")) value += 0.8 * cN * dN;
        }
        if (relevant.count("days_to_maturity")) value += 0.5 * mN;
        if (relevant.count("industry")) value += 0.45 * industry_effect[industry];
        if (relevant.count("country")) value += 0.45 * country_effect[country];
        if (relevant.count("coupon_frequency")) value += 0.3 * fN;
        if (relevant.count("age")) value += 0.4 * aN;
        if (relevant.count("amount_issued")) value += 0.4 * iN;
        if (relevant.count("amount_outstanding")) value += 0.4 * oN;
        for (int j = 0; j < config.numeric_noise_columns; ++j)
            if (relevant.count("noise_" + std::to_string(j + 1)))
                value += 0.4 * noise_vals[static_cast<std::size_t>(j)];

        if (config.noise_sd > 0.0) value += config.noise_sd * next_normal(noise_rng);
        raw[i] = value;
    }

    const auto [lo_it, hi_it] = std::minmax_element(raw.begin(), raw.end());
    const double lo = *lo_it, hi = *hi_it;
    data.y.resize(config.n);
    if (hi - lo <= 0.0) {
        std::fill(data.y.begin(), data.y.end(), 0.5 * (kTargetMin + kTargetMax));
    } else {
        const double scale = (kTargetMax - kTargetMin) / (hi - lo);
        for (std::size_t i = 0; i < config.n; ++i)
            data.y[i] = kTargetMin + (raw[i] - lo) * scale;
    }

    SyntheticData out;
    out.data = std::move(data);
    for (const auto& col : schema.columns) {
        if (relevant.count(col.name))
            out.relevant_features.push_back(col.name);
        else
            out.noise_features.push_back(col.name);
    }
    return out;
}

inline nlohmann::json synthetic_config_to_json(const SyntheticConfig& c) {
    return {{"n", c.n},
            {"seed", c.seed},
            {"noise_sd", c.noise_sd},
            {"country_levels", c.country_levels},
            {"industry_levels", c.industry_levels},
            {"rating_levels", c.rating_levels},
            {"numeric_noise_columns", c.numeric_noise_columns},
            {"relevant_features", c.relevant_features}};
}

inline SyntheticConfig synthetic_config_from_json(const nlohmann::json& j) {
    SyntheticConfig c;
    if (j.contains("n")) c.n = j.at("n").get<std::size_t>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("noise_sd")) c.noise_sd = j.at("noise_sd").get<double>();
    if (j.contains("country_levels")) c.country_levels = j.at("country_levels").get<int>();
    if (j.contains("industry_levels")) c.industry_levels = j.at("industry_levels").get<int>();
    if (j.contains("rating_levels")) c.rating_levels = j.at("rating_levels").get<int>();
    if (j.contains("numeric_noise_columns"))
        c.numeric_noise_columns = j.at("numeric_noise_columns").get<int>();
    if (j.contains("relevant_features"))
        c.relevant_features = j.at("relevant_features").get<std::vector<std::string>>();
    c.validate();
    return c;
}

}  // namespace rfsim
