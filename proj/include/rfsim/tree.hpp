#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rfsim/encode.hpp"
#include "rfsim/rng.hpp"

namespace rfsim {

struct TreeParams {
    std::optional<int> max_depth;          // nullopt: grow until pure
    int min_samples_split = 2;
    std::optional<int> feature_subset;     // candidate features per split; nullopt: all

    void validate() const {
        if (min_samples_split < 2)
            throw std::invalid_argument("tree params: min_samples_split must be >= 2");
        if (max_depth && *max_depth < 0)
            throw std::invalid_argument("tree params: max_depth must be >= 0");
        if (feature_subset && *feature_subset < 1)
            throw std::invalid_argument("tree params: feature_subset must be >= 1");
    }
};

struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t leaf_id = -1;
    double prediction = 0.0;     // mean of in-node training targets
    std::int32_t member_count = 0;

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root
    std::int32_t leaf_count = 0;
    std::int32_t depth = 0;

    // x[feature] <= threshold routes left; ties go left by construction.
    std::size_t route(std::span<const double> x) const {
        std::size_t node = 0;
        while (!nodes[node].is_leaf()) {
            const TreeNode& nd = nodes[node];
            node = static_cast<std::size_t>(
                x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
        }
        return node;
    }

    double predict(std::span<const double> x) const { return nodes[route(x)].prediction; }
    std::int32_t leaf_index(std::span<const double> x) const { return nodes[route(x)].leaf_id; }
};

inline double predict_tree(const RegressionTree& tree, std::span<const double> x) {
    return tree.predict(x);
}

inline std::int32_t leaf_index(const RegressionTree& tree, std::span<const double> x) {
    return tree.leaf_index(x);
}

namespace detail {

struct BestSplit {
    double cost = std::numeric_limits<double>::infinity();
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::size_t left_count = 0;
};

inline double sse_from_sums(double sum, double sum_sq, double count) {
    return sum_sq - sum * sum / count;
}

}  // namespace detail

// Greedy recursive binary splitting under the squared-error criterion.
// Candidate thresholds are midpoints between consecutive distinct feature
// values within the node. Duplicates in sample_indices (bootstrap draws)
// weight points by multiplicity. Tie-breaking among equal-cost splits is
// lowest feature index, then smallest threshold, which the scan order and
// strict improvement test produce for free.
inline RegressionTree fit_tree(const EncodedMatrix& X, std::span<const double> y,
                               std::span<const std::int32_t> sample_indices,
                               const TreeParams& params, Rng& rng) {
    params.validate();
    if (sample_indices.empty()) throw std::invalid_argument("fit_tree: empty sample_indices");
    const std::size_t m0 = sample_indices.size();
    const std::size_t p = X.n_cols;
    for (std::int32_t idx : sample_indices)
        if (idx < 0 || static_cast<std::size_t>(idx) >= X.n_rows)
            throw std::invalid_argument("fit_tree: sample index out of range");

    // Slot s is one bootstrap draw. Gather targets and a column-major copy of
    // the slot feature values once, then keep per-feature slot orderings that
    // get partitioned down the tree (no re-sorting below the root).
    std::vector<double> ys(m0);
    for (std::size_t s = 0; s < m0; ++s) ys[s] = y[static_cast<std::size_t>(sample_indices[s])];

    std::vector<double> vals(p * m0);
    for (std::size_t f = 0; f < p; ++f) {
        double* col = vals.data() + f * m0;
        for (std::size_t s = 0; s < m0; ++s)
            col[s] = X.at(static_cast<std::size_t>(sample_indices[s]), f);
    }

    std::vector<std::uint32_t> sorted(p * m0);
    for (std::size_t f = 0; f < p; ++f) {
        std::uint32_t* ord = sorted.data() + f * m0;
        std::iota(ord, ord + m0, 0u);
        const double* col = vals.data() + f * m0;
        std::sort(ord, ord + m0, [col](std::uint32_t a, std::uint32_t b) {
            return col[a] < col[b] || (col[a] == col[b] && a < b);
        });
    }

    const bool subsample_features =
        params.feature_subset && static_cast<std::size_t>(*params.feature_subset) < p;
    std::vector<std::uint32_t> feature_pool(p);
    std::iota(feature_pool.begin(), feature_pool.end(), 0u);
    std::vector<std::uint32_t> candidates;

    std::vector<std::uint8_t> goes_left(m0);
    std::vector<std::uint32_t> scratch(m0);

    RegressionTree tree;
    struct Frame {
        std::size_t node;
        std::size_t begin, end;  // range into every per-feature order array
        int depth;
    };
    std::vector<Frame> stack;
    tree.nodes.emplace_back();
    stack.push_back({0, 0, m0, 0});

    while (!stack.empty()) {
        const Frame frame = stack.back();
        stack.pop_back();
        const std::size_t m = frame.end - frame.begin;
        tree.depth = std::max(tree.depth, static_cast<std::int32_t>(frame.depth));

        const std::uint32_t* slots = sorted.data() + frame.begin;  // feature 0 order
        double sum = 0.0, sum_sq = 0.0;
        double y_min = std::numeric_limits<double>::infinity();
        double y_max = -std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < m; ++s) {
            const double v = ys[slots[s]];
            sum += v;
            sum_sq += v * v;
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
        TreeNode& node = tree.nodes[frame.node];
        node.prediction = sum / static_cast<double>(m);
        node.member_count = static_cast<std::int32_t>(m);

        const bool depth_reached = params.max_depth && frame.depth >= *params.max_depth;
        const bool too_small = m < static_cast<std::size_t>(params.min_samples_split);
        const bool pure = y_min == y_max;
        detail::BestSplit best;
        if (!depth_reached && !too_small && !pure && p > 0) {
            if (subsample_features) {
                const auto k = static_cast<std::size_t>(*params.feature_subset);
                for (std::size_t i = 0; i < k; ++i) {
                    const std::size_t j = i + static_cast<std::size_t>(next_below(rng, p - i));
                    std::swap(feature_pool[i], feature_pool[j]);
                }
                candidates.assign(feature_pool.begin(),
                                  feature_pool.begin() + static_cast<std::ptrdiff_t>(k));
                std::sort(candidates.begin(), candidates.end());
            }
            const std::uint32_t* feat_list = subsample_features ? candidates.data() : feature_pool.data();
            const std::size_t feat_count = subsample_features ? candidates.size() : p;

            for (std::size_t fi = 0; fi < feat_count; ++fi) {
                const std::uint32_t f = feat_list[fi];
                const std::uint32_t* ord = sorted.data() + static_cast<std::size_t>(f) * m0 + frame.begin;
                const double* col = vals.data() + static_cast<std::size_t>(f) * m0;
                double left_sum = 0.0, left_sum_sq = 0.0;
                for (std::size_t pos = 0; pos + 1 < m; ++pos) {
                    const double v = col[ord[pos]];
                    const double yv = ys[ord[pos]];
                    left_sum += yv;
                    left_sum_sq += yv * yv;
                    const double next_v = col[ord[pos + 1]];
                    if (v == next_v) continue;
                    const auto nl = static_cast<double>(pos + 1);
                    const auto nr = static_cast<double>(m - pos - 1);
                    const double cost = detail::sse_from_sums(left_sum, left_sum_sq, nl) +
                                        detail::sse_from_sums(sum - left_sum, sum_sq - left_sum_sq, nr);
                    if (cost < best.cost) {
                        double thr = v + 0.5 * (next_v - v);
                        if (!(thr > v) || !(thr <= next_v)) thr = v;  // rounding collapse
                        if (thr == next_v) thr = v;
                        best = {cost, static_cast<std::int32_t>(f), thr, pos + 1};
                    }
                }
            }
        }

        const double node_cost = detail::sse_from_sums(sum, sum_sq, static_cast<double>(m));
        if (best.feature < 0 || !(best.cost < node_cost)) {
            node.feature = -1;
            node.leaf_id = tree.leaf_count++;
            continue;
        }

        const double* split_col = vals.data() + static_cast<std::size_t>(best.feature) * m0;
        for (std::size_t s = 0; s < m; ++s) {
            const std::uint32_t slot = slots[s];
            goes_left[slot] = split_col[slot] <= best.threshold;
        }
        // Stable partition of every feature order so children stay sorted.
        for (std::size_t f = 0; f < p; ++f) {
            std::uint32_t* ord = sorted.data() + f * m0 + frame.begin;
            std::size_t nl = 0, nr = 0;
            for (std::size_t s = 0; s < m; ++s) {
                const std::uint32_t slot = ord[s];
                if (goes_left[slot])
                    ord[nl++] = slot;
                else
                    scratch[nr++] = slot;
            }
            std::copy(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(nr), ord + nl);
        }

        const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
        const auto right_id = left_id + 1;
        tree.nodes.emplace_back();
        tree.nodes.emplace_back();  // may reallocate; re-reference the node
        TreeNode& parent = tree.nodes[frame.node];
        parent.feature = best.feature;
        parent.threshold = best.threshold;
        parent.left = left_id;
        parent.right = right_id;
        const std::size_t mid = frame.begin + best.left_count;
        // Right first so the left child pops first: leaf ids run left to right.
        stack.push_back({static_cast<std::size_t>(right_id), mid, frame.end, frame.depth + 1});
        stack.push_back({static_cast<std::size_t>(left_id), frame.begin, mid, frame.depth + 1});
    }
    return tree;
}

}  // namespace rfsim
