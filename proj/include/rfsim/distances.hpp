#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfsim/dataset.hpp"
#include "rfsim/encode.hpp"
#include "rfsim/threading.hpp"

namespace rfsim {

struct DistanceMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string metric_name;
    std::vector<double> values;  // row-major

    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

// Per-column standardization stats from the training encoded matrix.
// Only the numeric passthrough columns are scaled; indicator columns keep
// their 0/1 coding. Constant columns divide by 1.
struct ZScoreStats {
    std::size_t n_scaled = 0;  // leading columns to scale
    std::vector<double> mean;
    std::vector<double> stdev;
};

inline ZScoreStats z_score_stats(const EncodedMatrix& train, std::size_t n_numeric_columns) {
    if (n_numeric_columns > train.n_cols)
        throw std::invalid_argument("z_score_stats: numeric column count exceeds matrix width");
    if (train.n_rows == 0) throw std::invalid_argument("z_score_stats: empty training matrix");
    ZScoreStats stats;
    stats.n_scaled = n_numeric_columns;
    stats.mean.resize(n_numeric_columns, 0.0);
    stats.stdev.resize(n_numeric_columns, 1.0);
    const auto n = static_cast<double>(train.n_rows);
    for (std::size_t c = 0; c < n_numeric_columns; ++c) {
        double sum = 0.0;
        for (std::size_t i = 0; i < train.n_rows; ++i) sum += train.at(i, c);
        const double mean = sum / n;
        double acc = 0.0;
        for (std::size_t i = 0; i < train.n_rows; ++i) {
            const double d = train.at(i, c) - mean;
            acc += d * d;
        }
        const double sd = std::sqrt(acc / n);
        stats.mean[c] = mean;
        stats.stdev[c] = sd > 0.0 ? sd : 1.0;
    }
    return stats;
}

// d(i,j) = sqrt(sum_k (a_ik - b_jk)^2), after optional standardization of
// the leading numeric columns with training statistics.
inline DistanceMatrix euclidean_matrix(const EncodedMatrix& A, const EncodedMatrix& B,
                                       const std::optional<ZScoreStats>& scaling = std::nullopt,
                                       int n_threads = 1) {
    if (A.n_cols != B.n_cols)
        throw std::invalid_argument("euclidean_matrix: column count mismatch");
    if (scaling && scaling->n_scaled > A.n_cols)
        throw std::invalid_argument("euclidean_matrix: scaling stats wider than matrix");

    DistanceMatrix out;
    out.rows = A.n_rows;
    out.cols = B.n_rows;
    out.metric_name = scaling ? "d_E" : "d_E_unscaled";
    out.values.resize(out.rows * out.cols);

    const std::size_t p = A.n_cols;
    auto scaled_copy = [&](const EncodedMatrix& M) {
        std::vector<double> copy = M.values;
        if (scaling) {
            for (std::size_t i = 0; i < M.n_rows; ++i) {
                double* row = copy.data() + i * p;
                for (std::size_t c = 0; c < scaling->n_scaled; ++c)
                    row[c] = (row[c] - scaling->mean[c]) / scaling->stdev[c];
            }
        }
        return copy;
    };
    const std::vector<double> a_vals = scaled_copy(A);
    const std::vector<double> b_vals = scaled_copy(B);

    parallel_for_static(out.rows, n_threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const double* a = a_vals.data() + i * p;
            double* dst = out.values.data() + i * out.cols;
            for (std::size_t j = 0; j < out.cols; ++j) {
                const double* b = b_vals.data() + j * p;
                double acc = 0.0;
                for (std::size_t c = 0; c < p; ++c) {
                    const double d = a[c] - b[c];
                    acc += d * d;
                }
                dst[j] = std::sqrt(acc);
            }
        }
    });
    return out;
}

// Per-numeric-column (min, max) from training rows.
struct GowerRanges {
    std::vector<double> min;
    std::vector<double> max;
};

inline GowerRanges compute_gower_ranges(const Dataset& train) {
    if (train.n_rows() == 0) throw std::invalid_argument("compute_gower_ranges: empty dataset");
    GowerRanges ranges;
    ranges.min.resize(train.numeric_cols.size());
    ranges.max.resize(train.numeric_cols.size());
    for (std::size_t c = 0; c < train.numeric_cols.size(); ++c) {
        const auto [lo, hi] = std::minmax_element(train.numeric_cols[c].begin(),
                                                  train.numeric_cols[c].end());
        ranges.min[c] = *lo;
        ranges.max[c] = *hi;
    }
    return ranges;
}

// Standard Gower dissimilarity on raw mixed-type rows: numeric features
// contribute |a-b| / training range clamped to [0,1] (zero-range columns
// contribute 0), categorical features contribute the 0/1 mismatch, and the
// result is the unweighted mean over all features.
inline DistanceMatrix gower_matrix(const Dataset& A, const Dataset& B, const GowerRanges& ranges,
                                   int n_threads = 1) {
    if (!(A.schema == B.schema)) throw std::invalid_argument("gower_matrix: schema mismatch");
    if (ranges.min.size() != A.numeric_cols.size())
        throw std::invalid_argument("gower_matrix: ranges do not match schema");
    const std::size_t n_features = A.schema.columns.size();
    if (n_features == 0) throw std::invalid_argument("gower_matrix: schema has no features");

    DistanceMatrix out;
    out.rows = A.n_rows();
    out.cols = B.n_rows();
    out.metric_name = "d_G";
    out.values.resize(out.rows * out.cols);

    std::vector<double> range(ranges.min.size());
    for (std::size_t c = 0; c < range.size(); ++c) range[c] = ranges.max[c] - ranges.min[c];

    parallel_for_static(out.rows, n_threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double* dst = out.values.data() + i * out.cols;
            for (std::size_t j = 0; j < out.cols; ++j) {
                double acc = 0.0;
                for (std::size_t c = 0; c < A.numeric_cols.size(); ++c) {
                    if (range[c] <= 0.0) continue;
                    const double d = std::abs(A.numeric_cols[c][i] - B.numeric_cols[c][j]) / range[c];
                    acc += std::min(d, 1.0);
                }
                for (std::size_t c = 0; c < A.categorical_cols.size(); ++c)
                    acc += A.categorical_cols[c][i] != B.categorical_cols[c][j] ? 1.0 : 0.0;
                dst[j] = acc / static_cast<double>(n_features);
            }
        }
    });
    return out;
}

}  // namespace rfsim
