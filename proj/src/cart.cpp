#include "walldetect/cart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace walldetect {

std::size_t DecisionTree::apply(std::span<const double> x) const noexcept {
    std::size_t n = 0;
    while (feature[n] >= 0) {
        n = static_cast<std::size_t>(x[static_cast<std::size_t>(feature[n])] <= threshold[n] ? left[n] : right[n]);
    }
    return n;
}

std::size_t DecisionTree::depth() const {
    if (feature.empty()) return 0;
    std::size_t deepest = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
        const auto [node, d] = stack.back();
        stack.pop_back();
        deepest = std::max(deepest, d);
        if (feature[node] >= 0) {
            stack.push_back({static_cast<std::size_t>(left[node]), d + 1});
            stack.push_back({static_cast<std::size_t>(right[node]), d + 1});
        }
    }
    return deepest;
}

PresortedColumns::PresortedColumns(const CartData& data) : rows_(data.rows), order_(data.rows * data.dims) {
    for (std::size_t f = 0; f < data.dims; ++f) {
        auto* begin = order_.data() + f * rows_;
        std::iota(begin, begin + rows_, 0U);
        const double* col = data.columns.data() + f * rows_;
        std::sort(begin, begin + rows_, [col](std::uint32_t a, std::uint32_t b) {
            return col[a] < col[b] || (col[a] == col[b] && a < b);
        });
    }
}

namespace {

struct Entry {
    double value;
    std::uint32_t row;
};

struct PendingNode {
    std::size_t begin;
    std::size_t end;
    std::size_t depth;
    std::int32_t id;
};

struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    std::size_t last_left = 0;  ///< offset (from node begin) of the last row sent left
    double threshold = 0.0;
    double proxy = -std::numeric_limits<double>::infinity();

    /// First-visited wins ties; a small relative tolerance keeps equal
    /// rationals that round differently from flipping the choice.
    bool improves(double candidate) const noexcept {
        if (!found) return true;
        return candidate > proxy + 1e-12 * std::max(1.0, std::abs(proxy));
    }
};

double midpoint(double a, double b) noexcept {
    double mid = a * 0.5 + b * 0.5;
    if (!(mid >= a && mid < b)) mid = a;
    return mid;
}

class TreeBuilder {
public:
    TreeBuilder(const CartData& data, const PresortedColumns& presorted, std::span<const std::uint32_t> weights,
                const CartParams& params, Rng& rng, std::vector<std::int32_t>* leaf_of_row)
        : data_(data), weights_(weights), params_(params), rng_(rng), leaf_of_row_(leaf_of_row) {
        if (weights.size() != data.rows) throw std::invalid_argument("weights size must match row count");
        if (params.criterion == SplitCriterion::Gini) {
            if (data.class_labels.size() != data.rows) throw std::invalid_argument("class labels size mismatch");
            width_ = params.num_classes;
        } else {
            if (data.targets.size() != data.rows) throw std::invalid_argument("targets size mismatch");
            width_ = 1;
        }
        std::uint64_t total_weight = 0;
        for (std::size_t r = 0; r < data.rows; ++r) {
            active_ += weights[r] > 0 ? 1 : 0;
            total_weight += weights[r];
        }
        // Weights are integers, so every partial weight indexes this table.
        reciprocal_.resize(total_weight + 1);
        reciprocal_[0] = 0.0;
        for (std::size_t w = 1; w <= total_weight; ++w) reciprocal_[w] = 1.0 / static_cast<double>(w);

        buffers_.resize(data.dims * active_);
        for (std::size_t f = 0; f < data.dims; ++f) {
            const double* col = data.columns.data() + f * data.rows;
            Entry* out = buffers_.data() + f * active_;
            for (std::uint32_t row : presorted.order(f)) {
                if (weights[row] > 0) *out++ = {col[row], row};
            }
        }
        go_left_.assign(data.rows, 0);
        scratch_.resize(active_);
        left_stats_.resize(width_);
        node_stats_.resize(width_);
        features_.resize(data.dims);
        if (leaf_of_row_) leaf_of_row_->assign(data.rows, -1);
        const std::size_t d = data.dims;
        max_features_ = (params.max_features == 0 || params.max_features >= d) ? d : params.max_features;
    }

    DecisionTree run() {
        tree_.value_width = width_;
        if (active_ == 0) throw std::invalid_argument("cannot grow a tree without weighted rows");
        std::vector<PendingNode> stack{{0, active_, 0, add_node()}};
        while (!stack.empty()) {
            const PendingNode node = stack.back();
            stack.pop_back();
            process(node, stack);
        }
        return std::move(tree_);
    }

private:
    std::int32_t add_node() {
        tree_.feature.push_back(-1);
        tree_.threshold.push_back(0.0);
        tree_.left.push_back(-1);
        tree_.right.push_back(-1);
        tree_.values.resize(tree_.values.size() + width_, 0.0);
        return static_cast<std::int32_t>(tree_.feature.size() - 1);
    }

    const Entry* entries(std::size_t feature, std::size_t begin) const {
        return buffers_.data() + feature * active_ + begin;
    }

    /// Fills node_stats_ and the node value; returns true when the node is pure.
    bool node_statistics(const PendingNode& node) {
        std::fill(node_stats_.begin(), node_stats_.end(), 0.0);
        node_weight_ = 0.0;
        const Entry* e = entries(0, node.begin);
        const std::size_t size = node.end - node.begin;
        double* value = tree_.values.data() + static_cast<std::size_t>(node.id) * width_;
        if (params_.criterion == SplitCriterion::Gini) {
            for (std::size_t p = 0; p < size; ++p) {
                const auto row = e[p].row;
                const double w = weights_[row];
                node_stats_[static_cast<std::size_t>(data_.class_labels[row])] += w;
                node_weight_ += w;
            }
            std::copy(node_stats_.begin(), node_stats_.end(), value);
            return std::count_if(node_stats_.begin(), node_stats_.end(), [](double c) { return c > 0.0; }) <= 1;
        }
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t p = 0; p < size; ++p) {
            const auto row = e[p].row;
            const double w = weights_[row];
            const double y = data_.targets[row];
            node_stats_[0] += w * y;
            node_weight_ += w;
            lo = std::min(lo, y);
            hi = std::max(hi, y);
        }
        value[0] = node_stats_[0] / node_weight_;
        return lo == hi;
    }

    void evaluate_gini(std::size_t feature, const PendingNode& node, SplitChoice& best) {
        const Entry* e = entries(feature, node.begin);
        const std::size_t size = node.end - node.begin;
        std::fill(left_stats_.begin(), left_stats_.end(), 0.0);
        std::size_t left_weight = 0;
        const auto total = static_cast<std::size_t>(node_weight_);
        for (std::size_t p = 0; p + 1 < size; ++p) {
            const auto w = weights_[e[p].row];
            left_stats_[static_cast<std::size_t>(data_.class_labels[e[p].row])] += w;
            left_weight += w;
            if (!(e[p].value < e[p + 1].value)) continue;
            double left_sq = 0.0;
            double right_sq = 0.0;
            for (std::size_t k = 0; k < width_; ++k) {
                const double l = left_stats_[k];
                const double r = node_stats_[k] - l;
                left_sq += l * l;
                right_sq += r * r;
            }
            const double proxy = left_sq * reciprocal_[left_weight] + right_sq * reciprocal_[total - left_weight];
            if (best.improves(proxy)) {
                best = {true, feature, p, midpoint(e[p].value, e[p + 1].value), proxy};
            }
        }
    }

    void evaluate_variance(std::size_t feature, const PendingNode& node, SplitChoice& best) {
        const Entry* e = entries(feature, node.begin);
        const std::size_t size = node.end - node.begin;
        double left_sum = 0.0;
        std::size_t left_weight = 0;
        const double total = node_stats_[0];
        const auto total_weight = static_cast<std::size_t>(node_weight_);
        for (std::size_t p = 0; p + 1 < size; ++p) {
            const auto w = weights_[e[p].row];
            left_sum += w * data_.targets[e[p].row];
            left_weight += w;
            if (!(e[p].value < e[p + 1].value)) continue;
            const double right_sum = total - left_sum;
            const double proxy = left_sum * left_sum * reciprocal_[left_weight] +
                                 right_sum * right_sum * reciprocal_[total_weight - left_weight];
            if (best.improves(proxy)) {
                best = {true, feature, p, midpoint(e[p].value, e[p + 1].value), proxy};
            }
        }
    }

    SplitChoice find_split(const PendingNode& node) {
        SplitChoice best;
        const std::size_t d = data_.dims;
        std::iota(features_.begin(), features_.end(), std::size_t{0});
        const bool sample = max_features_ < d;
        std::size_t evaluated = 0;
        for (std::size_t i = 0; i < d && evaluated < max_features_; ++i) {
            if (sample) std::swap(features_[i], features_[i + uniform_index(rng_, d - i)]);
            const std::size_t f = features_[i];
            const Entry* e = entries(f, node.begin);
            if (e[0].value == e[node.end - node.begin - 1].value) continue;
            ++evaluated;
            if (params_.criterion == SplitCriterion::Gini) {
                evaluate_gini(f, node, best);
            } else {
                evaluate_variance(f, node, best);
            }
        }
        return best;
    }

    void partition(const PendingNode& node, const SplitChoice& split) {
        const std::size_t size = node.end - node.begin;
        const Entry* chosen = entries(split.feature, node.begin);
        for (std::size_t p = 0; p < size; ++p) go_left_[chosen[p].row] = p <= split.last_left ? 1 : 0;
        for (std::size_t f = 0; f < data_.dims; ++f) {
            if (f == split.feature) continue;
            Entry* e = buffers_.data() + f * active_ + node.begin;
            std::size_t write = 0;
            std::size_t spill = 0;
            for (std::size_t p = 0; p < size; ++p) {
                if (go_left_[e[p].row]) {
                    e[write++] = e[p];
                } else {
                    scratch_[spill++] = e[p];
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(spill), e + write);
        }
    }

    void make_leaf(const PendingNode& node) {
        if (!leaf_of_row_) return;
        const Entry* e = entries(0, node.begin);
        for (std::size_t p = 0; p < node.end - node.begin; ++p) (*leaf_of_row_)[e[p].row] = node.id;
    }

    void process(const PendingNode& node, std::vector<PendingNode>& stack) {
        const bool pure = node_statistics(node);
        const bool depth_capped = params_.max_depth > 0 && node.depth >= params_.max_depth;
        if (pure || depth_capped || node.end - node.begin < 2) {
            make_leaf(node);
            return;
        }
        const SplitChoice split = find_split(node);
        if (!split.found) {
            make_leaf(node);
            return;
        }
        partition(node, split);

        const std::int32_t left = add_node();
        const std::int32_t right = add_node();
        const auto id = static_cast<std::size_t>(node.id);
        tree_.feature[id] = static_cast<std::int32_t>(split.feature);
        tree_.threshold[id] = split.threshold;
        tree_.left[id] = left;
        tree_.right[id] = right;

        const std::size_t mid = node.begin + split.last_left + 1;
        stack.push_back({mid, node.end, node.depth + 1, right});
        stack.push_back({node.begin, mid, node.depth + 1, left});
    }

    const CartData& data_;
    std::span<const std::uint32_t> weights_;
    CartParams params_;
    Rng& rng_;
    std::vector<std::int32_t>* leaf_of_row_;

    std::size_t width_ = 1;
    std::size_t active_ = 0;
    std::size_t max_features_ = 0;
    std::vector<Entry> buffers_;
    std::vector<Entry> scratch_;
    std::vector<std::uint8_t> go_left_;
    std::vector<double> left_stats_;
    std::vector<double> node_stats_;
    std::vector<double> reciprocal_;
    std::vector<std::size_t> features_;
    double node_weight_ = 0.0;
    DecisionTree tree_;
};

}  // namespace

DecisionTree build_cart_tree(const CartData& data, const PresortedColumns& presorted,
                             std::span<const std::uint32_t> weights, const CartParams& params, Rng& rng,
                             std::vector<std::int32_t>* leaf_of_row) {
    if (params.criterion == SplitCriterion::Gini && params.num_classes == 0) {
        throw std::invalid_argument("gini trees need at least one class");
    }
    return TreeBuilder(data, presorted, weights, params, rng, leaf_of_row).run();
}

DecisionTree build_cart_tree(const CartData& data, const CartParams& params, Rng& rng) {
    const PresortedColumns presorted(data);
    const std::vector<std::uint32_t> weights(data.rows, 1U);
    return build_cart_tree(data, presorted, weights, params, rng);
}

}  // namespace walldetect
