#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rfsim/distances.hpp"
#include "rfsim/forest.hpp"
#include "rfsim/threading.hpp"

namespace rfsim {

enum class ProximityKind { original, oob };

// Marks pairs with no evidence (never jointly out-of-bag); converted to
// distance 1.
inline constexpr float kUndefinedProximity = -1.0f;

// Pairwise similarity store, single precision at rest. Counts are
// accumulated as integers and divided by the tree count once, so the bucket
// path and the brute-force oracle agree bit-exactly. Square train matrices
// are symmetric with unit diagonal; external-vs-train matrices are
// rectangular (rows = external, cols = train).
struct ProximityMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    ProximityKind kind = ProximityKind::original;
    std::int32_t tree_count = 0;
    std::vector<float> values;                // row-major
    std::vector<std::uint32_t> denominators;  // oob kind only

    float at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
    bool defined(std::size_t i, std::size_t j) const { return at(i, j) >= 0.0f; }

    std::size_t undefined_count() const {
        std::size_t k = 0;
        for (float v : values) k += (v == kUndefinedProximity);
        return k;
    }
};

namespace detail {

inline float count_ratio(std::uint32_t numerator, std::uint32_t denominator) {
    return static_cast<float>(static_cast<double>(numerator) /
                              static_cast<double>(denominator));
}

// Row indices of one tree ordered by leaf id (counting sort). Input order is
// preserved inside each leaf, so ascending inputs stay ascending.
struct LeafBuckets {
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> rows;
    std::vector<std::uint32_t> cursor;

    void build(const LeafAssignment& leafs, std::size_t tree, const std::uint32_t* subset,
               std::size_t subset_size, std::size_t leaf_count) {
        offsets.assign(leaf_count + 1, 0);
        for (std::size_t s = 0; s < subset_size; ++s)
            ++offsets[static_cast<std::size_t>(leafs.at(subset[s], tree)) + 1];
        for (std::size_t l = 1; l < offsets.size(); ++l) offsets[l] += offsets[l - 1];
        rows.resize(subset_size);
        cursor.assign(offsets.begin(), offsets.end() - 1);
        for (std::size_t s = 0; s < subset_size; ++s) {
            const std::uint32_t r = subset[s];
            rows[cursor[static_cast<std::size_t>(leafs.at(r, tree))]++] = r;
        }
    }

    std::size_t bucket_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
};

inline std::size_t max_leaf_count(const LeafAssignment& leafs) {
    std::int32_t max_leaf = -1;
    for (std::int32_t l : leafs.leaf_ids) max_leaf = std::max(max_leaf, l);
    return static_cast<std::size_t>(max_leaf) + 1;
}

inline std::vector<std::uint32_t> iota_rows(std::size_t n) {
    std::vector<std::uint32_t> rows(n);
    for (std::size_t i = 0; i < n; ++i) rows[i] = static_cast<std::uint32_t>(i);
    return rows;
}

// Upper-triangle shared-leaf counts over trees [tree_begin, tree_end),
// restricted per tree to row_filter[t] when given. One bucket pass per tree;
// pair work is quadratic only within a leaf, never over all row pairs.
inline void add_shared_leaf_counts(const LeafAssignment& leafs, std::size_t tree_begin,
                                   std::size_t tree_end,
                                   const std::vector<std::vector<std::int32_t>>* row_filter,
                                   std::vector<std::uint32_t>& counts) {
    const std::size_t n = leafs.n_rows;
    const std::size_t leaf_count = max_leaf_count(leafs);
    const std::vector<std::uint32_t> all_rows = row_filter ? std::vector<std::uint32_t>{} : iota_rows(n);
    LeafBuckets buckets;
    for (std::size_t t = tree_begin; t < tree_end; ++t) {
        const std::uint32_t* subset;
        std::size_t subset_size;
        if (row_filter) {
            const auto& f = (*row_filter)[t];
            subset = reinterpret_cast<const std::uint32_t*>(f.data());
            subset_size = f.size();
        } else {
            subset = all_rows.data();
            subset_size = all_rows.size();
        }
        if (subset_size == 0) continue;
        buckets.build(leafs, t, subset, subset_size, leaf_count);
        for (std::size_t l = 0; l < buckets.bucket_count(); ++l) {
            const std::size_t b = buckets.offsets[l], e = buckets.offsets[l + 1];
            for (std::size_t a = b; a < e; ++a) {
                const std::size_t i = buckets.rows[a];
                std::uint32_t* row = counts.data() + i * n;
                for (std::size_t c = a + 1; c < e; ++c) ++row[buckets.rows[c]];
            }
        }
    }
}

// Same counts, parallel over trees with per-chunk buffers merged by integer
// addition; the result is independent of the thread count.
inline std::vector<std::uint32_t> shared_leaf_counts(
    const LeafAssignment& leafs, const std::vector<std::vector<std::int32_t>>* row_filter,
    int n_threads) {
    const std::size_t n = leafs.n_rows;
    std::vector<std::uint32_t> counts(n * n, 0);
    const auto n_chunks = std::min<std::size_t>(
        static_cast<std::size_t>(resolve_threads(n_threads)), leafs.n_trees);
    if (n_chunks <= 1) {
        add_shared_leaf_counts(leafs, 0, leafs.n_trees, row_filter, counts);
        return counts;
    }
    std::vector<std::vector<std::uint32_t>> partials(n_chunks - 1,
                                                     std::vector<std::uint32_t>(n * n, 0));
    parallel_for_static(leafs.n_trees, n_threads,
                        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                            auto& acc = chunk == 0 ? counts : partials[chunk - 1];
                            add_shared_leaf_counts(leafs, begin, end, row_filter, acc);
                        });
    for (const auto& part : partials)
        for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += part[k];
    return counts;
}

// Per-point bitmask over trees: bit t set when the point is OOB in tree t.
struct OobMasks {
    std::size_t words_per_row = 0;
    std::vector<std::uint64_t> bits;

    static OobMasks build(const RandomForest& forest) {
        OobMasks m;
        const std::size_t t_count = forest.trees.size();
        m.words_per_row = (t_count + 63) / 64;
        m.bits.assign(forest.n_train * m.words_per_row, 0);
        for (std::size_t t = 0; t < t_count; ++t)
            for (std::int32_t i : forest.oob[t])
                m.bits[static_cast<std::size_t>(i) * m.words_per_row + t / 64] |= 1ull << (t % 64);
        return m;
    }

    // Trees where both i and j are OOB.
    std::uint32_t joint_count(std::size_t i, std::size_t j) const {
        const std::uint64_t* a = bits.data() + i * words_per_row;
        const std::uint64_t* b = bits.data() + j * words_per_row;
        std::uint32_t total = 0;
        for (std::size_t w = 0; w < words_per_row; ++w)
            total += static_cast<std::uint32_t>(std::popcount(a[w] & b[w]));
        return total;
    }

    std::uint32_t count(std::size_t i) const {
        const std::uint64_t* a = bits.data() + i * words_per_row;
        std::uint32_t total = 0;
        for (std::size_t w = 0; w < words_per_row; ++w)
            total += static_cast<std::uint32_t>(std::popcount(a[w]));
        return total;
    }
};

inline void require_train_leafs(const LeafAssignment& leafs, const RandomForest& forest) {
    if (leafs.source != LeafSource::train)
        throw std::invalid_argument("oob proximity needs leaf assignments of the training data");
    if (leafs.n_rows != forest.n_train || leafs.n_trees != forest.trees.size())
        throw std::invalid_argument("leaf assignment shape does not match the forest");
}

}  // namespace detail

// Fraction of trees in which two points share a leaf (both matrices count
// every tree). Bucket-based fast path.
inline ProximityMatrix proximity(const LeafAssignment& leafs, int n_threads = 1) {
    const std::size_t n = leafs.n_rows;
    const auto t_count = static_cast<std::uint32_t>(leafs.n_trees);
    if (t_count == 0) throw std::invalid_argument("proximity: leaf assignment has no trees");
    const std::vector<std::uint32_t> counts = detail::shared_leaf_counts(leafs, nullptr, n_threads);

    ProximityMatrix prox;
    prox.rows = prox.cols = n;
    prox.kind = ProximityKind::original;
    prox.tree_count = static_cast<std::int32_t>(t_count);
    prox.values.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        prox.values[i * n + i] = 1.0f;
        for (std::size_t j = i + 1; j < n; ++j) {
            const float v = detail::count_ratio(counts[i * n + j], t_count);
            prox.values[i * n + j] = v;
            prox.values[j * n + i] = v;
        }
    }
    return prox;
}

// Literal transcription of the proximity definition as a triple loop.
// Test oracle and small-scale verification only.
inline ProximityMatrix proximity_bruteforce(const LeafAssignment& leafs) {
    const std::size_t n = leafs.n_rows;
    const auto t_count = static_cast<std::uint32_t>(leafs.n_trees);
    if (t_count == 0) throw std::invalid_argument("proximity: leaf assignment has no trees");
    ProximityMatrix prox;
    prox.rows = prox.cols = n;
    prox.kind = ProximityKind::original;
    prox.tree_count = static_cast<std::int32_t>(t_count);
    prox.values.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::uint32_t count = 0;
            for (std::size_t t = 0; t < leafs.n_trees; ++t)
                count += leafs.at(i, t) == leafs.at(j, t);
            prox.values[i * n + j] = detail::count_ratio(count, t_count);
        }
    }
    return prox;
}

// Out-of-bag proximity: the numerator counts trees where both points are OOB
// and share a leaf, the denominator counts trees where both are OOB. Pairs
// that are never jointly OOB carry the undefined sentinel. Diagonal is 1 by
// convention.
inline ProximityMatrix oob_proximity(const LeafAssignment& leafs, const RandomForest& forest,
                                     int n_threads = 1) {
    detail::require_train_leafs(leafs, forest);
    const std::size_t n = leafs.n_rows;
    const std::vector<std::uint32_t> numerators =
        detail::shared_leaf_counts(leafs, &forest.oob, n_threads);
    const detail::OobMasks masks = detail::OobMasks::build(forest);

    ProximityMatrix prox;
    prox.rows = prox.cols = n;
    prox.kind = ProximityKind::oob;
    prox.tree_count = static_cast<std::int32_t>(forest.trees.size());
    prox.values.resize(n * n);
    prox.denominators.resize(n * n);
    parallel_for_static(n, n_threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            prox.values[i * n + i] = 1.0f;
            prox.denominators[i * n + i] = masks.count(i);
            for (std::size_t j = i + 1; j < n; ++j) {
                const std::uint32_t den = masks.joint_count(i, j);
                const float v =
                    den > 0 ? detail::count_ratio(numerators[i * n + j], den) : kUndefinedProximity;
                prox.values[i * n + j] = v;
                prox.values[j * n + i] = v;
                prox.denominators[i * n + j] = den;
                prox.denominators[j * n + i] = den;
            }
        }
    });
    return prox;
}

// Literal per-pair, per-tree evaluation of the OOB proximity definition.
inline ProximityMatrix oob_proximity_bruteforce(const LeafAssignment& leafs,
                                                const RandomForest& forest) {
    detail::require_train_leafs(leafs, forest);
    const std::size_t n = leafs.n_rows;
    const std::size_t t_count = forest.trees.size();
    std::vector<std::uint8_t> is_oob(n * t_count, 0);
    for (std::size_t t = 0; t < t_count; ++t)
        for (std::int32_t i : forest.oob[t]) is_oob[static_cast<std::size_t>(i) * t_count + t] = 1;

    ProximityMatrix prox;
    prox.rows = prox.cols = n;
    prox.kind = ProximityKind::oob;
    prox.tree_count = static_cast<std::int32_t>(t_count);
    prox.values.resize(n * n);
    prox.denominators.resize(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::uint32_t num = 0, den = 0;
            for (std::size_t t = 0; t < t_count; ++t) {
                if (!is_oob[i * t_count + t] || !is_oob[j * t_count + t]) continue;
                ++den;
                num += leafs.at(i, t) == leafs.at(j, t);
            }
            if (i == j) {
                prox.values[i * n + j] = 1.0f;
                prox.denominators[i * n + j] = den;
            } else {
                prox.values[i * n + j] =
                    den > 0 ? detail::count_ratio(num, den) : kUndefinedProximity;
                prox.denominators[i * n + j] = den;
            }
        }
    }
    return prox;
}

// Rectangular external-vs-train proximity. mode=original counts all trees
// (external points sit in no bag). mode=oob counts only trees where the
// train point is OOB; train points never OOB carry the sentinel column.
inline ProximityMatrix external_proximity(const RandomForest& forest,
                                          const LeafAssignment& train_leafs,
                                          const LeafAssignment& external_leafs, ProximityKind mode,
                                          int n_threads = 1) {
    detail::require_train_leafs(train_leafs, forest);
    if (external_leafs.n_trees != forest.trees.size())
        throw std::invalid_argument("external leaf assignment does not match the forest");
    const std::size_t m = external_leafs.n_rows;
    const std::size_t n = train_leafs.n_rows;
    const std::size_t t_count = forest.trees.size();
    const std::size_t leaf_count =
        std::max(detail::max_leaf_count(train_leafs), detail::max_leaf_count(external_leafs));

    const std::vector<std::uint32_t> all_rows = detail::iota_rows(n);
    auto accumulate = [&](std::size_t tree_begin, std::size_t tree_end,
                          std::vector<std::uint32_t>& counts) {
        detail::LeafBuckets buckets;
        for (std::size_t t = tree_begin; t < tree_end; ++t) {
            const std::uint32_t* subset = all_rows.data();
            std::size_t subset_size = n;
            if (mode == ProximityKind::oob) {
                subset = reinterpret_cast<const std::uint32_t*>(forest.oob[t].data());
                subset_size = forest.oob[t].size();
            }
            if (subset_size == 0) continue;
            buckets.build(train_leafs, t, subset, subset_size, leaf_count);
            for (std::size_t i = 0; i < m; ++i) {
                const auto leaf = static_cast<std::size_t>(external_leafs.at(i, t));
                std::uint32_t* row = counts.data() + i * n;
                const std::size_t b = buckets.offsets[leaf], e = buckets.offsets[leaf + 1];
                for (std::size_t a = b; a < e; ++a) ++row[buckets.rows[a]];
            }
        }
    };

    std::vector<std::uint32_t> counts(m * n, 0);
    const auto n_chunks =
        std::min<std::size_t>(static_cast<std::size_t>(resolve_threads(n_threads)), t_count);
    if (n_chunks <= 1) {
        accumulate(0, t_count, counts);
    } else {
        std::vector<std::vector<std::uint32_t>> partials(n_chunks - 1,
                                                         std::vector<std::uint32_t>(m * n, 0));
        parallel_for_static(t_count, n_threads,
                            [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                                auto& acc = chunk == 0 ? counts : partials[chunk - 1];
                                accumulate(begin, end, acc);
                            });
        for (const auto& part : partials)
            for (std::size_t k = 0; k < counts.size(); ++k) counts[k] += part[k];
    }

    ProximityMatrix prox;
    prox.rows = m;
    prox.cols = n;
    prox.kind = mode;
    prox.tree_count = static_cast<std::int32_t>(t_count);
    prox.values.resize(m * n);
    if (mode == ProximityKind::original) {
        for (std::size_t k = 0; k < counts.size(); ++k)
            prox.values[k] = detail::count_ratio(counts[k], static_cast<std::uint32_t>(t_count));
    } else {
        const detail::OobMasks masks = detail::OobMasks::build(forest);
        std::vector<std::uint32_t> oob_count(n);
        for (std::size_t j = 0; j < n; ++j) oob_count[j] = masks.count(j);
        prox.denominators.resize(m * n);
        for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                const std::uint32_t den = oob_count[j];
                prox.denominators[i * n + j] = den;
                prox.values[i * n + j] =
                    den > 0 ? detail::count_ratio(counts[i * n + j], den) : kUndefinedProximity;
            }
        }
    }
    return prox;
}

// Literal rectangular counterpart of the brute-force oracle.
inline ProximityMatrix external_proximity_bruteforce(const RandomForest& forest,
                                                     const LeafAssignment& train_leafs,
                                                     const LeafAssignment& external_leafs,
                                                     ProximityKind mode) {
    detail::require_train_leafs(train_leafs, forest);
    const std::size_t m = external_leafs.n_rows;
    const std::size_t n = train_leafs.n_rows;
    const std::size_t t_count = forest.trees.size();
    std::vector<std::uint8_t> is_oob(n * t_count, 0);
    for (std::size_t t = 0; t < t_count; ++t)
        for (std::int32_t j : forest.oob[t]) is_oob[static_cast<std::size_t>(j) * t_count + t] = 1;

    ProximityMatrix prox;
    prox.rows = m;
    prox.cols = n;
    prox.kind = mode;
    prox.tree_count = static_cast<std::int32_t>(t_count);
    prox.values.resize(m * n);
    if (mode == ProximityKind::oob) prox.denominators.resize(m * n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            std::uint32_t num = 0, den = 0;
            for (std::size_t t = 0; t < t_count; ++t) {
                const bool counts_tree = mode == ProximityKind::original || is_oob[j * t_count + t];
                if (!counts_tree) continue;
                ++den;
                num += external_leafs.at(i, t) == train_leafs.at(j, t);
            }
            if (mode == ProximityKind::oob) prox.denominators[i * n + j] = den;
            prox.values[i * n + j] =
                den > 0 ? detail::count_ratio(num, den) : kUndefinedProximity;
        }
    }
    return prox;
}

// d = 1 - proximity; undefined pairs become the maximal distance 1.
inline DistanceMatrix to_distance(const ProximityMatrix& prox) {
    DistanceMatrix dist;
    dist.rows = prox.rows;
    dist.cols = prox.cols;
    dist.metric_name = prox.kind == ProximityKind::original ? "d_Prox" : "d_Prox_OOB";
    dist.values.resize(prox.values.size());
    for (std::size_t k = 0; k < prox.values.size(); ++k) {
        const float v = prox.values[k];
        dist.values[k] = v == kUndefinedProximity ? 1.0 : 1.0 - static_cast<double>(v);
    }
    return dist;
}

}  // namespace rfsim
