#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfsim/encode.hpp"
#include "rfsim/rng.hpp"
#include "rfsim/threading.hpp"
#include "rfsim/tree.hpp"

namespace rfsim {

struct ForestParams {
    int n_trees = 100;
    TreeParams tree;
    bool bootstrap = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (n_trees < 1) throw std::invalid_argument("forest params: n_trees must be >= 1");
        tree.validate();
    }
};

struct RandomForest {
    ForestParams params;
    std::vector<RegressionTree> trees;
    std::vector<std::vector<std::int32_t>> in_bag;  // per tree: n_train draws, with multiplicity
    std::vector<std::vector<std::int32_t>> oob;     // per tree: ascending complement of in_bag
    std::size_t n_train = 0;
    std::vector<std::string> feature_names;

    int n_trees() const { return static_cast<int>(trees.size()); }
};

enum class LeafSource { train, external };

// n x T leaf identifiers; the substrate of all proximity computation.
struct LeafAssignment {
    std::size_t n_rows = 0;
    std::size_t n_trees = 0;
    std::vector<std::int32_t> leaf_ids;  // row-major
    LeafSource source = LeafSource::external;

    std::int32_t at(std::size_t row, std::size_t tree) const {
        return leaf_ids[row * n_trees + tree];
    }
};

// Each tree draws its bootstrap and fits from its own seeded substream, so
// trees are independent of thread count and of n_trees changes.
inline RandomForest fit_forest(const EncodedMatrix& X, const ForestParams& params,
                               int n_threads = 1) {
    params.validate();
    if (X.n_rows < 2) throw std::invalid_argument("fit_forest: need at least 2 training rows");
    if (X.y.size() != X.n_rows) throw std::invalid_argument("fit_forest: y length mismatch");

    const std::size_t n = X.n_rows;
    const auto t_count = static_cast<std::size_t>(params.n_trees);
    RandomForest forest;
    forest.params = params;
    forest.n_train = n;
    forest.feature_names = X.feature_names;
    forest.trees.resize(t_count);
    forest.in_bag.resize(t_count);
    forest.oob.resize(t_count);

    parallel_for_static(t_count, n_threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        std::vector<std::uint8_t> drawn(n);
        for (std::size_t t = begin; t < end; ++t) {
            Rng rng(derive_seed(params.seed, t));
            auto& bag = forest.in_bag[t];
            bag.resize(n);
            if (params.bootstrap) {
                std::fill(drawn.begin(), drawn.end(), 0);
                for (std::size_t s = 0; s < n; ++s) {
                    const auto idx = static_cast<std::int32_t>(next_below(rng, n));
                    bag[s] = idx;
                    drawn[static_cast<std::size_t>(idx)] = 1;
                }
                auto& out = forest.oob[t];
                for (std::size_t i = 0; i < n; ++i)
                    if (!drawn[i]) out.push_back(static_cast<std::int32_t>(i));
            } else {
                std::iota(bag.begin(), bag.end(), 0);
            }
            forest.trees[t] = fit_tree(X, X.y, bag, params.tree, rng);
        }
    });
    return forest;
}

inline void check_width(const RandomForest& forest, const EncodedMatrix& X) {
    if (X.n_cols != forest.feature_names.size())
        throw std::invalid_argument("column count " + std::to_string(X.n_cols) +
                                    " does not match model width " +
                                    std::to_string(forest.feature_names.size()));
}

inline double predict(const RandomForest& forest, std::span<const double> x) {
    double sum = 0.0;
    for (const auto& tree : forest.trees) sum += tree.predict(x);
    return sum / static_cast<double>(forest.trees.size());
}

inline std::vector<double> predict(const RandomForest& forest, const EncodedMatrix& X,
                                   int n_threads = 1) {
    check_width(forest, X);
    std::vector<double> out(X.n_rows);
    parallel_for_static(X.n_rows, n_threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) out[i] = predict(forest, X.row(i));
    });
    return out;
}

inline LeafAssignment apply(const RandomForest& forest, const EncodedMatrix& X,
                            LeafSource source = LeafSource::external, int n_threads = 1) {
    check_width(forest, X);
    LeafAssignment leafs;
    leafs.n_rows = X.n_rows;
    leafs.n_trees = forest.trees.size();
    leafs.leaf_ids.resize(leafs.n_rows * leafs.n_trees);
    leafs.source = source;
    parallel_for_static(X.n_rows, n_threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto row = X.row(i);
            std::int32_t* dst = leafs.leaf_ids.data() + i * leafs.n_trees;
            for (std::size_t t = 0; t < leafs.n_trees; ++t) dst[t] = forest.trees[t].leaf_index(row);
        }
    });
    return leafs;
}

// Leaf assignment of the forest's own training matrix.
inline LeafAssignment apply_train(const RandomForest& forest, const EncodedMatrix& X_train,
                                  int n_threads = 1) {
    if (X_train.n_rows != forest.n_train)
        throw std::invalid_argument("apply_train: row count differs from training size");
    return apply(forest, X_train, LeafSource::train, n_threads);
}

// Mean fraction of training points left out of a bootstrap, across trees.
inline double mean_oob_fraction(const RandomForest& forest) {
    double acc = 0.0;
    for (const auto& o : forest.oob)
        acc += static_cast<double>(o.size()) / static_cast<double>(forest.n_train);
    return acc / static_cast<double>(forest.oob.size());
}

}  // namespace rfsim
