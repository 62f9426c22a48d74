#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "glycast/errors.hpp"
#include "glycast/models.hpp"
#include "glycast/parallel.hpp"
#include "glycast/rng.hpp"

namespace glycast {

ForestModel::ForestModel(std::vector<LagFeature> columns, std::int64_t step_s,
                         int horizon_steps,
                         std::vector<std::vector<Node>> trees, double y_min,
                         double y_max)
    : trees_(std::move(trees)), y_min_(y_min), y_max_(y_max) {
    columns_ = std::move(columns);
    step_s_ = step_s;
    horizon_steps_ = horizon_steps;
}

double ForestModel::predict_row(std::span<const double> row) const {
    if (row.size() != columns_.size()) {
        throw std::invalid_argument("rf: row/column mismatch");
    }
    double acc = 0.0;
    for (const auto& tree : trees_) {
        int node = 0;
        while (tree[node].feature >= 0) {
            node = row[static_cast<std::size_t>(tree[node].feature)] <=
                           tree[node].threshold
                       ? tree[node].left
                       : tree[node].right;
        }
        acc += tree[node].value;
    }
    return acc / static_cast<double>(trees_.size());
}

namespace {

// Exact CART on a bootstrap sample without per-node sorting: every feature
// keeps an index array sorted once at the root (derived from a forest-level
// presort of the training columns), and node splits stable-partition each
// array so children stay sorted. Split scans are then linear passes with
// prefix sums. Growth is a pure function of the tree's RNG stream, so
// forests are identical for any worker count.
class TreeBuilder {
public:
    TreeBuilder(const std::vector<std::vector<double>>& x_cols,
                const std::vector<double>& y,
                const std::vector<std::vector<int>>& sorted_full, int mtry,
                int min_leaf, int max_depth, std::uint64_t tree_seed)
        : x_cols_(x_cols), y_(y), mtry_(mtry), min_leaf_(min_leaf),
          max_depth_(max_depth), rng_(tree_seed) {
        const std::size_t n = y.size();
        const std::size_t p = x_cols.size();

        // Bootstrap multiset, stored as multiplicities so the per-feature
        // position arrays can be emitted in presorted order without sorting.
        std::vector<int> count(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            ++count[static_cast<std::size_t>(rng_.uniform_int(n))];
        }
        std::vector<int> pos_start(n + 1, 0);
        for (std::size_t r = 0; r < n; ++r) pos_start[r + 1] = pos_start[r] + count[r];
        const std::size_t m = static_cast<std::size_t>(pos_start[n]);

        boot_row_.resize(m);
        yb_.resize(m);
        for (std::size_t r = 0; r < n; ++r) {
            for (int j = 0; j < count[r]; ++j) {
                const std::size_t pos = static_cast<std::size_t>(pos_start[r] + j);
                boot_row_[pos] = static_cast<int>(r);
                yb_[pos] = y[r];
            }
        }

        feat_pos_.assign(p, {});
        xb_.assign(p, {});
        for (std::size_t f = 0; f < p; ++f) {
            auto& arr = feat_pos_[f];
            arr.reserve(m);
            for (const int r : sorted_full[f]) {
                for (int j = 0; j < count[r]; ++j) {
                    arr.push_back(pos_start[r] + j);
                }
            }
            // Per-position feature values; keeps split scans in L1 and
            // reads the fit-level column transpose sequentially.
            auto& xv = xb_[f];
            xv.resize(m);
            const double* col = x_cols[f].data();
            for (std::size_t pos = 0; pos < m; ++pos) {
                xv[pos] = col[boot_row_[pos]];
            }
        }

        side_.resize(m);
        tmp_.resize(m);
        feat_perm_.resize(p);
        std::iota(feat_perm_.begin(), feat_perm_.end(), 0);
    }

    std::vector<ForestModel::Node> build() {
        nodes_.clear();
        grow(0, feat_pos_.empty() ? 0 : feat_pos_[0].size(), 0);
        return std::move(nodes_);
    }

private:
    struct Best {
        double gain = -1.0;
        int feature = -1;
        double threshold = 0.0;
        std::size_t n_left = 0;
    };

    double x_at(std::size_t pos, int f) const {
        return xb_[static_cast<std::size_t>(f)][pos];
    }

    int grow(std::size_t lo, std::size_t hi, int depth) {
        const std::size_t m = hi - lo;
        double sum = 0.0, sumsq = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const double v = yb_[static_cast<std::size_t>(feat_pos_[0][i])];
            sum += v;
            sumsq += v * v;
        }
        const double mean = sum / static_cast<double>(m);

        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back({});
        nodes_[id].value = mean;

        const double sse = sumsq - sum * sum / static_cast<double>(m);
        if (m < 2 * static_cast<std::size_t>(min_leaf_) || sse <= 1e-12 ||
            (max_depth_ > 0 && depth >= max_depth_)) {
            return id;
        }

        const Best best = find_split(lo, hi, sum);
        if (best.feature < 0) return id;

        // Mark sides off the split feature's sorted order, then stable-
        // partition every feature array so children remain sorted.
        auto& split_arr = feat_pos_[static_cast<std::size_t>(best.feature)];
        for (std::size_t i = lo; i < hi; ++i) {
            side_[static_cast<std::size_t>(split_arr[i])] =
                i - lo < best.n_left ? 1 : 0;
        }
        for (auto& arr : feat_pos_) {
            if (&arr == &split_arr) continue;  // already partitioned
            int* a = arr.data();
            std::size_t wl = 0, wr = 0;
            for (std::size_t i = lo; i < hi; ++i) {
                const int pos = a[i];
                const std::uint8_t s = side_[static_cast<std::size_t>(pos)];
                a[lo + wl] = pos;
                tmp_[wr] = pos;
                wl += s;
                wr += 1u - s;
            }
            std::copy_n(tmp_.begin(), wr, a + lo + wl);
        }

        const std::size_t cut = lo + best.n_left;
        const int left = grow(lo, cut, depth + 1);
        const int right = grow(cut, hi, depth + 1);
        nodes_[id].feature = best.feature;
        nodes_[id].threshold = best.threshold;
        nodes_[id].left = left;
        nodes_[id].right = right;
        return id;
    }

    Best find_split(std::size_t lo, std::size_t hi, double total_sum) {
        const std::size_t m = hi - lo;
        Best best;

        const std::size_t p = x_cols_.size();
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(mtry_), p);
        for (std::size_t j = 0; j < k; ++j) {
            const std::size_t swap_at =
                j + static_cast<std::size_t>(rng_.uniform_int(p - j));
            std::swap(feat_perm_[j], feat_perm_[swap_at]);
        }

        for (std::size_t cand = 0; cand < k; ++cand) {
            const int f = feat_perm_[cand];
            const auto& arr = feat_pos_[static_cast<std::size_t>(f)];
            double left_sum = 0.0;
            double x_here = x_at(static_cast<std::size_t>(arr[lo]), f);
            for (std::size_t i = 0; i + 1 < m; ++i) {
                left_sum += yb_[static_cast<std::size_t>(arr[lo + i])];
                const double x_next =
                    x_at(static_cast<std::size_t>(arr[lo + i + 1]), f);
                const std::size_t nl = i + 1;
                if (nl < static_cast<std::size_t>(min_leaf_) || x_here == x_next) {
                    x_here = x_next;
                    continue;
                }
                if (m - nl < static_cast<std::size_t>(min_leaf_)) break;
                const double right_sum = total_sum - left_sum;
                const double score =
                    left_sum * left_sum / static_cast<double>(nl) +
                    right_sum * right_sum / static_cast<double>(m - nl);
                if (score > best.gain) {
                    best.gain = score;
                    best.feature = f;
                    best.n_left = nl;
                    best.threshold = x_here + (x_next - x_here) / 2.0;
                    // Guard against midpoint rounding onto the right value.
                    if (best.threshold >= x_next) best.threshold = x_here;
                }
                x_here = x_next;
            }
        }
        return best;
    }

    const std::vector<std::vector<double>>& x_cols_;
    const std::vector<double>& y_;
    int mtry_, min_leaf_, max_depth_;
    Rng rng_;
    std::vector<int> boot_row_;
    std::vector<double> yb_;
    std::vector<std::vector<int>> feat_pos_;
    std::vector<std::vector<double>> xb_;
    std::vector<std::uint8_t> side_;
    std::vector<int> tmp_;
    std::vector<int> feat_perm_;
    std::vector<ForestModel::Node> nodes_;
};

} // namespace

std::unique_ptr<TrainedModel> fit_forest(const ForecasterSpec& spec,
                                         const SupervisedSet& train,
                                         unsigned workers) {
    const std::size_t n = train.n_rows();
    const std::size_t p = train.n_features();
    if (n == 0) throw EmptySetError("rf: empty training set");

    const int mtry = spec.mtry > 0
                         ? std::min<int>(spec.mtry, static_cast<int>(p))
                         : static_cast<int>((p + 2) / 3);

    // Column transpose plus one argsort per column, shared by every tree.
    std::vector<std::vector<double>> x_cols(p, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = train.X.row(i);
        for (std::size_t f = 0; f < p; ++f) x_cols[f][i] = row[f];
    }
    std::vector<std::vector<int>> sorted_full(p);
    for (std::size_t f = 0; f < p; ++f) {
        auto& idx = sorted_full[f];
        idx.resize(n);
        std::iota(idx.begin(), idx.end(), 0);
        const double* col = x_cols[f].data();
        std::sort(idx.begin(), idx.end(), [col](int a, int b) {
            return col[a] != col[b] ? col[a] < col[b] : a < b;
        });
    }

    std::vector<std::vector<ForestModel::Node>> trees(spec.n_trees);
    parallel_for(static_cast<std::size_t>(spec.n_trees), workers,
                 [&](std::size_t t) {
                     TreeBuilder builder(x_cols, train.y, sorted_full, mtry,
                                         spec.min_leaf, spec.max_depth,
                                         Rng::derive(spec.seed, {0x7265ULL, t}));
                     trees[t] = builder.build();
                 });

    const auto [mn, mx] = std::minmax_element(train.y.begin(), train.y.end());
    return std::make_unique<ForestModel>(train.columns, train.step_s,
                                         train.horizon_steps, std::move(trees),
                                         *mn, *mx);
}

} // namespace glycast
