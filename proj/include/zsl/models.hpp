#pragma once

// Learned model families: multinomial logistic regression (weight matrix W
// with a folded-in bias row) and squared-error gradient-boosted regression
// trees, plus k-fold grid tuning and the type-blind pooled baseline.

#include "linalg.hpp"
#include "rng.hpp"
#include "tabular.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace zsl {

inline Matrix with_bias(const Matrix& x) {
    Matrix out(x.rows, x.cols + 1);
    for (std::size_t r = 0; r < x.rows; ++r) {
        for (std::size_t c = 0; c < x.cols; ++c) out(r, c) = x(r, c);
        out(r, x.cols) = 1.0;
    }
    return out;
}

inline Matrix take_rows(const Matrix& x, const std::vector<std::size_t>& rows) {
    Matrix out(rows.size(), x.cols);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r] >= x.rows) throw std::out_of_range("take_rows: index out of range");
        for (std::size_t c = 0; c < x.cols; ++c) out(r, c) = x(rows[r], c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Multinomial logistic regression

struct LogisticModel {
    Matrix w; // (encoded dim + 1) x classes; last row is the bias
    std::vector<std::string> class_order;
    bool trained_with_bias = true;
    bool converged = false;
    std::size_t iterations = 0;
    std::vector<double> objective_history; // initial value, then each accepted step

    Matrix logits(const Matrix& x) const {
        if (x.cols + 1 != w.rows)
            throw std::invalid_argument("logistic: input has " + std::to_string(x.cols) +
                                        " columns, model expects " + std::to_string(w.rows - 1));
        return matmul(with_bias(x), w);
    }

    Matrix probabilities(const Matrix& x) const {
        Matrix l = logits(x);
        std::vector<double> row(l.cols);
        for (std::size_t r = 0; r < l.rows; ++r) {
            for (std::size_t c = 0; c < l.cols; ++c) row[c] = l(r, c);
            const auto p = softmax(row);
            for (std::size_t c = 0; c < l.cols; ++c) l(r, c) = p[c];
        }
        return l;
    }

    std::vector<std::size_t> predict_class(const Matrix& x) const {
        const Matrix l = logits(x);
        std::vector<std::size_t> out(l.rows);
        for (std::size_t r = 0; r < l.rows; ++r) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < l.cols; ++c)
                if (l(r, c) > l(r, best)) best = c;
            out[r] = best;
        }
        return out;
    }
};

struct LogisticOptions {
    std::size_t max_iterations = 10000;
    double gradient_tolerance = 1e-6; // infinity norm
};

namespace detail {

// mean cross-entropy of the labels under row-wise softmax of the logits
inline double ce_from_logits(const Matrix& logits, const std::vector<std::int32_t>& y) {
    double total = 0.0;
    for (std::size_t r = 0; r < logits.rows; ++r) {
        double mx = logits(r, 0);
        for (std::size_t c = 1; c < logits.cols; ++c) mx = std::max(mx, logits(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < logits.cols; ++c) sum += std::exp(logits(r, c) - mx);
        total += std::log(sum) - (logits(r, static_cast<std::size_t>(y[r])) - mx);
    }
    return total / static_cast<double>(logits.rows);
}

inline double logistic_objective(const Matrix& xb, const std::vector<std::int32_t>& y,
                                 const Matrix& w, double l2) {
    const double fw = frobenius_norm(w);
    return ce_from_logits(matmul(xb, w), y) + 0.5 * l2 * fw * fw;
}

// gradient of mean cross-entropy + (l2/2)||W||_F^2 at W, given logits = xb*W
inline Matrix logistic_gradient(const Matrix& xbt, const std::vector<std::int32_t>& y,
                                const Matrix& logits, const Matrix& w, double l2) {
    const std::size_t n = logits.rows, z = w.cols;
    Matrix delta(n, z);
    for (std::size_t r = 0; r < n; ++r) {
        double mx = logits(r, 0);
        for (std::size_t c = 1; c < z; ++c) mx = std::max(mx, logits(r, c));
        double sum = 0.0;
        for (std::size_t c = 0; c < z; ++c) {
            delta(r, c) = std::exp(logits(r, c) - mx);
            sum += delta(r, c);
        }
        for (std::size_t c = 0; c < z; ++c) delta(r, c) /= sum;
        delta(r, static_cast<std::size_t>(y[r])) -= 1.0;
    }
    Matrix g = matmul(xbt, delta);
    for (std::size_t i = 0; i < g.data.size(); ++i)
        g.data[i] = g.data[i] / static_cast<double>(n) + l2 * w.data[i];
    return g;
}

} // namespace detail

// Full-batch gradient descent with Armijo backtracking from zero
// initialization; deterministic. y holds indices into class_order.
inline LogisticModel fit_logistic(const Matrix& x, const std::vector<std::int32_t>& y,
                                  std::vector<std::string> class_order, double l2,
                                  const LogisticOptions& opt = {}) {
    if (x.rows != y.size()) throw std::invalid_argument("logistic: rows and labels differ");
    if (x.rows == 0) throw std::invalid_argument("logistic: empty input");
    if (!x.all_finite()) throw std::invalid_argument("logistic: non-finite input");
    if (!(l2 >= 0.0)) throw std::invalid_argument("logistic: l2 must be >= 0");
    const std::size_t z = class_order.size();
    if (z < 2) throw std::invalid_argument("logistic: need at least 2 classes");
    std::vector<bool> seen(z, false);
    for (auto label : y) {
        if (label < 0 || static_cast<std::size_t>(label) >= z)
            throw std::invalid_argument("logistic: label out of range");
        seen[static_cast<std::size_t>(label)] = true;
    }
    if (std::count(seen.begin(), seen.end(), true) < 2)
        throw std::invalid_argument("logistic: need at least 2 distinct classes in labels");

    const Matrix xb = with_bias(x);
    const Matrix xbt = transpose(xb);

    LogisticModel model;
    model.class_order = std::move(class_order);
    model.w = Matrix(xb.cols, z, 0.0);
    Matrix logits(x.rows, z, 0.0); // xb * 0

    double objective = detail::ce_from_logits(logits, y); // ||W||_F = 0 at start
    model.objective_history.push_back(objective);

    const double armijo = 1e-4;
    double step = 1.0;
    for (std::size_t iter = 0; iter < opt.max_iterations; ++iter) {
        const Matrix grad = detail::logistic_gradient(xbt, y, logits, model.w, l2);
        double ginf = 0.0, gsq = 0.0;
        for (double v : grad.data) {
            ginf = std::max(ginf, std::abs(v));
            gsq += v * v;
        }
        if (ginf <= opt.gradient_tolerance) {
            model.converged = true;
            break;
        }

        // one matrix product serves every backtracking trial:
        // logits(W - t*G) = logits(W) - t * (Xb*G)
        const Matrix dir = matmul(xb, grad);
        bool accepted = false;
        while (step >= 1e-20) {
            Matrix trial_w = model.w;
            for (std::size_t i = 0; i < trial_w.data.size(); ++i)
                trial_w.data[i] -= step * grad.data[i];
            Matrix trial_logits = logits;
            for (std::size_t i = 0; i < trial_logits.data.size(); ++i)
                trial_logits.data[i] -= step * dir.data[i];
            const double fw = frobenius_norm(trial_w);
            const double trial_obj = detail::ce_from_logits(trial_logits, y) + 0.5 * l2 * fw * fw;
            if (trial_obj <= objective - armijo * step * gsq) {
                model.w = std::move(trial_w);
                logits = std::move(trial_logits);
                objective = trial_obj;
                accepted = true;
                break;
            }
            step /= 2.0;
        }
        if (!accepted) break; // no representable descent step; reported as not converged
        model.objective_history.push_back(objective);
        model.iterations = iter + 1;
        step = std::min(step * 2.0, 1e12);

        if ((iter & 511) == 511) logits = matmul(xb, model.w); // wash out incremental drift
    }
    return model;
}

// ---------------------------------------------------------------------------
// Gradient-boosted regression trees

struct Hyperparams {
    std::size_t max_depth = 5;
    double learning_rate = 0.1;
    std::size_t n_rounds = 200;

    bool operator==(const Hyperparams&) const = default;

    void validate() const {
        if (max_depth < 1) throw std::invalid_argument("hyperparams: max_depth must be >= 1");
        if (!(learning_rate > 0.0 && learning_rate <= 1.0))
            throw std::invalid_argument("hyperparams: learning_rate must be in (0, 1]");
        if (n_rounds < 1) throw std::invalid_argument("hyperparams: n_rounds must be >= 1");
    }
};

struct TreeNode {
    std::int32_t feature = -1; // -1 marks a leaf
    double threshold = 0.0;    // x[feature] <= threshold goes left
    double value = 0.0;        // leaf: mean residual of its training instances
    std::int32_t left = -1;
    std::int32_t right = -1;
};

struct Tree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    std::size_t apply(const Matrix& x, std::size_t row) const {
        std::size_t id = 0;
        while (nodes[id].feature >= 0)
            id = x(row, static_cast<std::size_t>(nodes[id].feature)) <= nodes[id].threshold
                     ? static_cast<std::size_t>(nodes[id].left)
                     : static_cast<std::size_t>(nodes[id].right);
        return id;
    }

    double value_at(const Matrix& x, std::size_t row) const { return nodes[apply(x, row)].value; }

    std::size_t depth() const { return depth_below(0); }

private:
    std::size_t depth_below(std::size_t id) const {
        if (nodes[id].feature < 0) return 0;
        return 1 + std::max(depth_below(static_cast<std::size_t>(nodes[id].left)),
                            depth_below(static_cast<std::size_t>(nodes[id].right)));
    }
};

struct GbrtModel {
    std::vector<Tree> trees;
    double learning_rate = 0.1;
    double base_score = 0.0;
    Hyperparams hp;

    double predict_row(const Matrix& x, std::size_t row) const {
        double acc = 0.0;
        for (const auto& t : trees) acc += t.value_at(x, row);
        return base_score + learning_rate * acc;
    }

    std::vector<double> predict(const Matrix& x) const {
        std::vector<double> out(x.rows);
        for (std::size_t r = 0; r < x.rows; ++r) out[r] = predict_row(x, r);
        return out;
    }
};

namespace detail {

// Split candidates per feature. bin(v) = lower_bound(cuts, v); a split at cut
// index j sends bins 0..j (exactly the values <= cuts[j]) left. Features with
// at most 255 distinct values get exact midpoint cuts; wider ones get 64
// quantile cuts drawn from the sorted sample. Either way the candidate set
// depends only on the multiset of values, never on instance order.
struct FeatureBins {
    std::vector<double> cuts;
    std::size_t bin_count() const { return cuts.size() + 1; }
};

inline FeatureBins bin_feature(const Matrix& x, std::size_t f) {
    std::vector<double> sorted(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) sorted[i] = x(i, f);
    std::sort(sorted.begin(), sorted.end());

    std::vector<double> distinct;
    for (double v : sorted)
        if (distinct.empty() || v != distinct.back()) distinct.push_back(v);

    FeatureBins fb;
    if (distinct.size() <= 255) {
        for (std::size_t i = 0; i + 1 < distinct.size(); ++i) {
            const double mid = distinct[i] + (distinct[i + 1] - distinct[i]) / 2.0;
            if (fb.cuts.empty() || mid != fb.cuts.back()) fb.cuts.push_back(mid);
        }
    } else {
        const std::size_t q = 64;
        for (std::size_t j = 1; j <= q; ++j) {
            const double c = sorted[j * sorted.size() / (q + 1)];
            if (fb.cuts.empty() || c != fb.cuts.back()) fb.cuts.push_back(c);
        }
    }
    return fb;
}

// Level-wise histogram tree grower. Per level one fused pass accumulates
// (residual sum, count) histograms for the designated nodes; when both
// children of a split stay active only the smaller one is accumulated and the
// sibling is derived from the parent histogram by subtraction.
struct GbrtBuilder {
    const Matrix& x;
    std::size_t n, d;
    std::vector<FeatureBins> feats;
    std::vector<std::uint32_t> bin_offset;
    std::size_t total_bins = 0;
    std::vector<std::uint8_t> bins; // n x d, feature-major per instance
    std::vector<double> residual;

    std::vector<std::int32_t> node_of; // instance -> current tree node
    std::vector<double> node_sum;      // residual sum per node
    std::vector<std::uint32_t> node_cnt;
    std::vector<double> hsum[2]; // histogram arenas by level parity
    std::vector<std::uint32_t> hcnt[2];

    explicit GbrtBuilder(const Matrix& x_) : x(x_), n(x_.rows), d(x_.cols) {
        feats.reserve(d);
        bin_offset.resize(d);
        for (std::size_t f = 0; f < d; ++f) {
            feats.push_back(bin_feature(x, f));
            bin_offset[f] = static_cast<std::uint32_t>(total_bins);
            total_bins += feats[f].bin_count();
        }
        bins.resize(n * d);
        for (std::size_t f = 0; f < d; ++f) {
            const auto& cuts = feats[f].cuts;
            for (std::size_t i = 0; i < n; ++i) {
                const auto it = std::lower_bound(cuts.begin(), cuts.end(), x(i, f));
                bins[i * d + f] = static_cast<std::uint8_t>(it - cuts.begin());
            }
        }
        residual.resize(n);
        node_of.resize(n);
    }

    void accumulate(const std::vector<std::int32_t>& slot_of, std::size_t parity) {
        auto* sums = hsum[parity].data();
        auto* cnts = hcnt[parity].data();
        for (std::size_t i = 0; i < n; ++i) {
            const std::int32_t s = slot_of[static_cast<std::size_t>(node_of[i])];
            if (s < 0) continue;
            const double r = residual[i];
            double* sbase = sums + static_cast<std::size_t>(s) * total_bins;
            std::uint32_t* cbase = cnts + static_cast<std::size_t>(s) * total_bins;
            const std::uint8_t* bi = bins.data() + i * d;
            for (std::size_t f = 0; f < d; ++f) {
                const std::size_t slot = bin_offset[f] + bi[f];
                sbase[slot] += r;
                cbase[slot] += 1;
            }
        }
    }

    Tree build_tree(const Hyperparams& hp) {
        Tree tree;
        tree.nodes.push_back(TreeNode{});
        double total = 0.0;
        for (double r : residual) total += r;
        node_sum.assign(1, total);
        node_cnt.assign(1, static_cast<std::uint32_t>(n));
        std::fill(node_of.begin(), node_of.end(), 0);

        auto finalize_leaf = [&](std::int32_t id) {
            auto& node = tree.nodes[static_cast<std::size_t>(id)];
            node.feature = -1;
            const auto cnt = node_cnt[static_cast<std::size_t>(id)];
            node.value = cnt == 0 ? 0.0 : node_sum[static_cast<std::size_t>(id)] /
                                              static_cast<double>(cnt);
        };

        struct LevelNode {
            std::int32_t node;
            std::int32_t slot;
        };
        std::vector<LevelNode> frontier;
        std::size_t parity = 0;

        if (n >= 4 && total_bins > 0) {
            hsum[parity].assign(total_bins, 0.0);
            hcnt[parity].assign(total_bins, 0);
            std::vector<std::int32_t> slot_of(1, 0);
            accumulate(slot_of, parity);
            frontier.push_back({0, 0});
        } else {
            finalize_leaf(0);
        }

        for (std::size_t level = 0; level < hp.max_depth && !frontier.empty(); ++level) {
            struct Split {
                std::int32_t node;
                std::int32_t parent_slot;
                std::int32_t feature;
                std::uint8_t bin;
                double threshold;
                double left_sum;
                std::uint32_t left_cnt;
                std::int32_t left = -1, right = -1;
            };
            std::vector<Split> splits;

            const auto& sums = hsum[parity];
            const auto& cnts = hcnt[parity];
            for (const auto& entry : frontier) {
                const auto id = static_cast<std::size_t>(entry.node);
                const double nsum = node_sum[id];
                const std::uint32_t ncnt = node_cnt[id];
                const double parent_term = nsum * nsum / static_cast<double>(ncnt);
                const std::size_t base = static_cast<std::size_t>(entry.slot) * total_bins;

                double best_gain = 0.0;
                std::int32_t best_f = -1;
                std::size_t best_b = 0;
                double best_lsum = 0.0;
                std::uint32_t best_lcnt = 0;
                for (std::size_t f = 0; f < d; ++f) {
                    const std::size_t nb = feats[f].bin_count();
                    if (nb < 2) continue;
                    double lsum = 0.0;
                    std::uint32_t lcnt = 0;
                    const double* s = sums.data() + base + bin_offset[f];
                    const std::uint32_t* c = cnts.data() + base + bin_offset[f];
                    for (std::size_t b = 0; b + 1 < nb; ++b) {
                        lsum += s[b];
                        lcnt += c[b];
                        if (lcnt < 2) continue;
                        const std::uint32_t rcnt = ncnt - lcnt;
                        if (rcnt < 2) break; // only shrinks as b grows
                        const double rsum = nsum - lsum;
                        const double gain = lsum * lsum / static_cast<double>(lcnt) +
                                            rsum * rsum / static_cast<double>(rcnt) - parent_term;
                        if (gain > best_gain) { // strict: ties keep lowest feature, threshold
                            best_gain = gain;
                            best_f = static_cast<std::int32_t>(f);
                            best_b = b;
                            best_lsum = lsum;
                            best_lcnt = lcnt;
                        }
                    }
                }

                if (best_f < 0) {
                    finalize_leaf(entry.node);
                    continue;
                }
                Split sp;
                sp.node = entry.node;
                sp.parent_slot = entry.slot;
                sp.feature = best_f;
                sp.bin = static_cast<std::uint8_t>(best_b);
                sp.threshold = feats[static_cast<std::size_t>(best_f)].cuts[best_b];
                sp.left_sum = best_lsum;
                sp.left_cnt = best_lcnt;
                splits.push_back(sp);
            }

            frontier.clear();
            if (splits.empty()) break;

            for (auto& sp : splits) {
                sp.left = static_cast<std::int32_t>(tree.nodes.size());
                sp.right = sp.left + 1;
                tree.nodes.push_back(TreeNode{});
                tree.nodes.push_back(TreeNode{});
                auto& parent = tree.nodes[static_cast<std::size_t>(sp.node)];
                parent.feature = sp.feature;
                parent.threshold = sp.threshold;
                parent.left = sp.left;
                parent.right = sp.right;
                node_sum.push_back(sp.left_sum);
                node_cnt.push_back(sp.left_cnt);
                node_sum.push_back(node_sum[static_cast<std::size_t>(sp.node)] - sp.left_sum);
                node_cnt.push_back(node_cnt[static_cast<std::size_t>(sp.node)] - sp.left_cnt);
            }

            // route instances through this level's splits
            std::vector<std::int32_t> split_feature(tree.nodes.size(), -1);
            std::vector<std::uint8_t> split_bin(tree.nodes.size(), 0);
            std::vector<std::int32_t> go_left(tree.nodes.size(), -1);
            std::vector<std::int32_t> go_right(tree.nodes.size(), -1);
            for (const auto& sp : splits) {
                const auto id = static_cast<std::size_t>(sp.node);
                split_feature[id] = sp.feature;
                split_bin[id] = sp.bin;
                go_left[id] = sp.left;
                go_right[id] = sp.right;
            }
            for (std::size_t i = 0; i < n; ++i) {
                const auto id = static_cast<std::size_t>(node_of[i]);
                if (split_feature[id] >= 0)
                    node_of[i] =
                        bins[i * d + static_cast<std::size_t>(split_feature[id])] <= split_bin[id]
                            ? go_left[id]
                            : go_right[id];
            }

            if (level + 1 >= hp.max_depth) {
                for (const auto& sp : splits) {
                    finalize_leaf(sp.left);
                    finalize_leaf(sp.right);
                }
                break;
            }

            // set up next level's histograms
            struct Derived {
                std::int32_t slot;
                std::int32_t parent_slot;
                std::int32_t sibling_slot;
            };
            std::vector<Derived> derived;
            std::vector<std::int32_t> slot_of(tree.nodes.size(), -1);
            std::int32_t n_slots = 0;
            const std::size_t next = 1 - parity;
            for (const auto& sp : splits) {
                const bool lok = node_cnt[static_cast<std::size_t>(sp.left)] >= 4;
                const bool rok = node_cnt[static_cast<std::size_t>(sp.right)] >= 4;
                if (!lok) finalize_leaf(sp.left);
                if (!rok) finalize_leaf(sp.right);
                if (lok && rok) {
                    const bool left_smaller = node_cnt[static_cast<std::size_t>(sp.left)] <=
                                              node_cnt[static_cast<std::size_t>(sp.right)];
                    const std::int32_t small = left_smaller ? sp.left : sp.right;
                    const std::int32_t large = left_smaller ? sp.right : sp.left;
                    const std::int32_t s_small = n_slots++;
                    const std::int32_t s_large = n_slots++;
                    slot_of[static_cast<std::size_t>(small)] = s_small;
                    derived.push_back({s_large, sp.parent_slot, s_small});
                    frontier.push_back({small, s_small});
                    frontier.push_back({large, s_large});
                } else if (lok || rok) {
                    const std::int32_t node = lok ? sp.left : sp.right;
                    const std::int32_t s = n_slots++;
                    slot_of[static_cast<std::size_t>(node)] = s;
                    frontier.push_back({node, s});
                }
            }
            if (frontier.empty()) break;

            hsum[next].assign(static_cast<std::size_t>(n_slots) * total_bins, 0.0);
            hcnt[next].assign(static_cast<std::size_t>(n_slots) * total_bins, 0);
            accumulate(slot_of, next);
            for (const auto& dv : derived) {
                double* out_s = hsum[next].data() + static_cast<std::size_t>(dv.slot) * total_bins;
                std::uint32_t* out_c =
                    hcnt[next].data() + static_cast<std::size_t>(dv.slot) * total_bins;
                const double* par_s =
                    hsum[parity].data() + static_cast<std::size_t>(dv.parent_slot) * total_bins;
                const std::uint32_t* par_c =
                    hcnt[parity].data() + static_cast<std::size_t>(dv.parent_slot) * total_bins;
                const double* sib_s =
                    hsum[next].data() + static_cast<std::size_t>(dv.sibling_slot) * total_bins;
                const std::uint32_t* sib_c =
                    hcnt[next].data() + static_cast<std::size_t>(dv.sibling_slot) * total_bins;
                for (std::size_t k = 0; k < total_bins; ++k) {
                    out_s[k] = par_s[k] - sib_s[k];
                    out_c[k] = par_c[k] - sib_c[k];
                }
            }
            parity = next;
        }

        return tree;
    }
};

} // namespace detail

// Deterministic squared-error boosting: each round fits one tree to the
// current residuals; prediction = base_score + lr * sum of leaf values. The
// seed parameter is part of the interface for callers that treat fitting as
// seeded; the algorithm itself has no random choices.
inline GbrtModel fit_gbrt(const Matrix& x, const std::vector<double>& y, const Hyperparams& hp,
                          std::uint64_t seed = 0) {
    (void)seed;
    hp.validate();
    if (x.rows == 0) throw std::invalid_argument("gbrt: need at least one instance");
    if (x.rows != y.size()) throw std::invalid_argument("gbrt: rows and targets differ");
    if (!x.all_finite()) throw std::invalid_argument("gbrt: non-finite input");
    for (double v : y)
        if (!std::isfinite(v)) throw std::invalid_argument("gbrt: non-finite target");

    GbrtModel model;
    model.hp = hp;
    model.learning_rate = hp.learning_rate;
    double base = 0.0;
    for (double v : y) base += v;
    base /= static_cast<double>(y.size());
    model.base_score = base;

    detail::GbrtBuilder builder(x);
    for (std::size_t i = 0; i < y.size(); ++i) builder.residual[i] = y[i] - base;

    model.trees.reserve(hp.n_rounds);
    for (std::size_t round = 0; round < hp.n_rounds; ++round) {
        Tree tree = builder.build_tree(hp);
        for (std::size_t i = 0; i < y.size(); ++i)
            builder.residual[i] -=
                hp.learning_rate *
                tree.nodes[static_cast<std::size_t>(builder.node_of[i])].value;
        model.trees.push_back(std::move(tree));
    }
    return model;
}

inline double rmse(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("rmse: need equal non-zero lengths");
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double e = a[i] - b[i];
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(a.size()));
}

// Deterministic fold assignment: a seeded shuffle of [0, n) chopped into
// folds contiguous chunks, the first n % folds of them one element larger.
inline std::vector<std::int32_t> make_kfold(std::size_t n, std::size_t folds,
                                            std::uint64_t seed) {
    if (folds < 2) throw std::invalid_argument("kfold: need at least 2 folds");
    if (folds > n) throw std::invalid_argument("kfold: more folds than instances");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(mix_seed(seed, "kfold"));
    shuffle(perm, rng);
    std::vector<std::int32_t> fold_of(n);
    const std::size_t base = n / folds, rem = n % folds;
    std::size_t pos = 0;
    for (std::size_t f = 0; f < folds; ++f) {
        const std::size_t size = base + (f < rem ? 1 : 0);
        for (std::size_t i = 0; i < size; ++i) fold_of[perm[pos++]] = static_cast<std::int32_t>(f);
    }
    return fold_of;
}

// Grid search minimizing the mean of per-fold out-of-fold RMSEs; ties keep
// the earliest grid element.
inline Hyperparams tune_gbrt(const Matrix& x, const std::vector<double>& y,
                             const std::vector<Hyperparams>& grid, std::size_t folds,
                             std::uint64_t seed) {
    if (grid.empty()) throw std::invalid_argument("tune: empty grid");
    for (const auto& hp : grid) hp.validate();
    if (x.rows != y.size()) throw std::invalid_argument("tune: rows and targets differ");
    if (x.rows < folds) throw std::invalid_argument("tune: fewer instances than folds");

    const auto fold_of = make_kfold(x.rows, folds, seed);
    std::vector<double> total(grid.size(), 0.0);
    for (std::size_t k = 0; k < folds; ++k) {
        std::vector<std::size_t> train_rows, test_rows;
        for (std::size_t i = 0; i < x.rows; ++i)
            (fold_of[i] == static_cast<std::int32_t>(k) ? test_rows : train_rows).push_back(i);
        const Matrix xtr = take_rows(x, train_rows);
        const Matrix xte = take_rows(x, test_rows);
        std::vector<double> ytr(train_rows.size()), yte(test_rows.size());
        for (std::size_t i = 0; i < train_rows.size(); ++i) ytr[i] = y[train_rows[i]];
        for (std::size_t i = 0; i < test_rows.size(); ++i) yte[i] = y[test_rows[i]];
        for (std::size_t g = 0; g < grid.size(); ++g) {
            const GbrtModel m = fit_gbrt(xtr, ytr, grid[g], seed);
            total[g] += rmse(m.predict(xte), yte);
        }
    }
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g)
        if (total[g] < total[best]) best = g;
    return grid[best];
}

inline std::vector<Hyperparams> default_grid() {
    std::vector<Hyperparams> grid;
    for (std::size_t depth : {3, 5, 7})
        for (double lr : {0.05, 0.1, 0.3}) grid.push_back({depth, lr, 200});
    return grid;
}

// ---------------------------------------------------------------------------
// Pooled baseline: one tuned regressor over all known-type instances with
// type identity withheld (the feature matrix never contains the class column).

struct BaselineModel {
    Encoder encoder;
    GbrtModel model;
    Hyperparams hp;

    std::vector<double> predict(const Dataset& data) const {
        return model.predict(encoder.transform(data));
    }
};

inline BaselineModel fit_baseline(const Dataset& train, const std::string& metric,
                                  const std::vector<Hyperparams>& grid, std::size_t folds,
                                  std::uint64_t seed) {
    const int mi = train.schema.metric_index(metric);
    if (mi < 0) throw std::invalid_argument("baseline: unknown metric '" + metric + "'");
    std::unordered_set<std::int32_t> classes(train.labels.begin(), train.labels.end());
    if (classes.size() < 2)
        throw std::invalid_argument("baseline: training data must cover at least 2 classes");

    BaselineModel out;
    const EncodedMatrix em = encode(train);
    out.encoder = em.encoder;
    const auto& y = train.targets[static_cast<std::size_t>(mi)];
    out.hp = tune_gbrt(em.values, y, grid, folds, mix_seed(seed, "baseline:" + metric));
    out.model = fit_gbrt(em.values, y, out.hp, seed);
    return out;
}

} // namespace zsl
