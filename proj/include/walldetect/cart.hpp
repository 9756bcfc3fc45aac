/**
 * @file cart.hpp
 * @brief Greedy binary decision trees (CART) shared by the forest and boosting learners.
 *
 * Splits are axis-aligned `x[f] <= threshold` with thresholds at midpoints of
 * consecutive distinct sorted values. Classification minimizes weighted Gini
 * impurity; regression minimizes weighted variance. Ties between candidate
 * splits go to the first one visited (feature visit order, then the lower
 * threshold), so results do not depend on feature scale.
 *
 * The builder keeps, for each feature, the node's rows in sorted order and
 * stably partitions those lists on every split, so one tree costs
 * O(d * n * depth) after a single O(d * n log n) presort per training call.
 */
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "walldetect/rng.hpp"

namespace walldetect {

/// Flat node arrays. Node 0 is the root; children always have larger ids
/// than their parent. `values` holds `value_width` numbers per node: weighted
/// class counts for classification, the leaf output for regression.
struct DecisionTree {
    std::vector<std::int32_t> feature;  ///< -1 marks a leaf
    std::vector<double> threshold;
    std::vector<std::int32_t> left;
    std::vector<std::int32_t> right;
    std::size_t value_width = 1;
    std::vector<double> values;

    std::size_t node_count() const noexcept { return feature.size(); }
    bool is_leaf(std::size_t node) const noexcept { return feature[node] < 0; }
    /// Index of the leaf reached by x.
    std::size_t apply(std::span<const double> x) const noexcept;
    std::span<const double> node_value(std::size_t node) const noexcept {
        return {values.data() + node * value_width, value_width};
    }
    std::size_t depth() const;

    bool operator==(const DecisionTree&) const = default;
};

enum class SplitCriterion : std::uint8_t { Gini, Variance };

struct CartParams {
    SplitCriterion criterion = SplitCriterion::Gini;
    std::size_t max_depth = 0;     ///< 0 means unlimited
    std::size_t max_features = 0;  ///< features examined per node; 0 or >= d means all, in index order
    std::size_t num_classes = 2;   ///< Gini only
};

/// Column-major training matrix with targets. Exactly one of class_labels
/// (Gini) or targets (Variance) is used.
struct CartData {
    std::size_t rows = 0;
    std::size_t dims = 0;
    std::span<const double> columns;  ///< columns[f * rows + r]
    std::span<const std::int32_t> class_labels;
    std::span<const double> targets;
};

/// Per-feature row order sorted by (value, row).
class PresortedColumns {
public:
    PresortedColumns() = default;
    explicit PresortedColumns(const CartData& data);

    std::span<const std::uint32_t> order(std::size_t feature) const noexcept {
        return {order_.data() + feature * rows_, rows_};
    }

private:
    std::size_t rows_ = 0;
    std::vector<std::uint32_t> order_;
};

/**
 * Grows one tree on the rows with non-zero weight (weights act as bootstrap
 * multiplicities). When max_features < d, features are drawn without
 * replacement from `rng` and constant ones do not count toward the budget.
 * A node becomes a leaf when pure, at max_depth, or when no valid split
 * exists. If leaf_of_row is given it receives the leaf id of every weighted
 * row (-1 for the rest).
 */
DecisionTree build_cart_tree(const CartData& data, const PresortedColumns& presorted,
                             std::span<const std::uint32_t> weights, const CartParams& params, Rng& rng,
                             std::vector<std::int32_t>* leaf_of_row = nullptr);

/// Convenience overload: unit weights, presorting done internally.
DecisionTree build_cart_tree(const CartData& data, const CartParams& params, Rng& rng);

}  // namespace walldetect
