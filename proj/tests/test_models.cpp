#include "zsl/models.hpp"
#include "zsl/rng.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <map>
#include <set>

using namespace zsl;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double scale = 1.0) {
    Matrix m(rows, cols);
    for (auto& v : m.data) v = rng.normal() * scale;
    return m;
}

} // namespace

TEST_CASE("logistic gradient matches central finite differences") {
    Rng rng(901);
    const std::size_t n = 20, d = 4, z = 3;
    const Matrix x = random_matrix(n, d, rng);
    std::vector<std::int32_t> y(n);
    for (auto& label : y) label = static_cast<std::int32_t>(rng.below(z));
    Matrix w = random_matrix(d + 1, z, rng, 0.5);
    const double l2 = 0.03;

    const Matrix xb = with_bias(x);
    const Matrix xbt = transpose(xb);
    const Matrix analytic = detail::logistic_gradient(xbt, y, matmul(xb, w), w, l2);

    const double h = 1e-5;
    for (std::size_t i = 0; i < w.data.size(); ++i) {
        Matrix lo = w, hi = w;
        lo.data[i] -= h;
        hi.data[i] += h;
        const double numeric =
            (detail::logistic_objective(xb, y, hi, l2) - detail::logistic_objective(xb, y, lo, l2)) /
            (2.0 * h);
        const double denom = std::max(1e-8, std::abs(analytic.data[i]));
        REQUIRE(std::abs(numeric - analytic.data[i]) / denom < 1e-5);
    }
}

TEST_CASE("logistic separates well-spread classes and converges") {
    Rng rng(77);
    const std::size_t per = 20;
    Matrix x(3 * per, 2);
    std::vector<std::int32_t> y(3 * per);
    const double cx[3] = {0.0, 10.0, 0.0};
    const double cy[3] = {0.0, 0.0, 10.0};
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < per; ++i) {
            const std::size_t r = c * per + i;
            x(r, 0) = cx[c] + rng.normal() * 0.5;
            x(r, 1) = cy[c] + rng.normal() * 0.5;
            y[r] = static_cast<std::int32_t>(c);
        }

    const auto model = fit_logistic(x, y, {"a", "b", "c"}, 1e-3);
    REQUIRE(model.converged);
    REQUIRE(model.iterations < 10000);
    REQUIRE(model.class_order == std::vector<std::string>{"a", "b", "c"});
    REQUIRE(model.w.rows == 3); // 2 features + bias
    REQUIRE(model.w.cols == 3);

    const auto pred = model.predict_class(x);
    for (std::size_t r = 0; r < x.rows; ++r)
        REQUIRE(static_cast<std::int32_t>(pred[r]) == y[r]);
}

TEST_CASE("logistic zero iteration budget leaves the zero model") {
    Rng rng(5);
    const Matrix x = random_matrix(12, 3, rng);
    std::vector<std::int32_t> y = {0, 1, 2, 0, 1, 2, 0, 1, 2, 0, 1, 2};
    LogisticOptions opt;
    opt.max_iterations = 0;
    const auto model = fit_logistic(x, y, {"a", "b", "c"}, 0.1, opt);

    REQUIRE_FALSE(model.converged);
    REQUIRE(model.iterations == 0);
    for (double v : model.w.data) REQUIRE(v == 0.0);
    REQUIRE(model.objective_history.size() == 1);
    REQUIRE(model.objective_history[0] == Catch::Approx(std::log(3.0)).epsilon(1e-12));

    const Matrix p = model.probabilities(x);
    for (double v : p.data) REQUIRE(v == Catch::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("logistic probability rows are normalized") {
    Rng rng(31);
    const Matrix x = random_matrix(40, 5, rng, 2.0);
    std::vector<std::int32_t> y(40);
    for (auto& label : y) label = static_cast<std::int32_t>(rng.below(4));
    LogisticOptions opt;
    opt.max_iterations = 50;
    const auto model = fit_logistic(x, y, {"a", "b", "c", "d"}, 0.01, opt);

    const Matrix p = model.probabilities(x);
    for (std::size_t r = 0; r < p.rows; ++r) {
        double sum = 0.0;
        for (std::size_t c = 0; c < p.cols; ++c) {
            REQUIRE(p(r, c) >= 0.0);
            REQUIRE(p(r, c) <= 1.0);
            sum += p(r, c);
        }
        REQUIRE(sum == Catch::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("logistic objective history never increases") {
    Rng rng(63);
    const Matrix x = random_matrix(60, 4, rng);
    std::vector<std::int32_t> y(60);
    for (auto& label : y) label = static_cast<std::int32_t>(rng.below(3));
    const auto model = fit_logistic(x, y, {"a", "b", "c"}, 0.05);

    REQUIRE(model.objective_history.size() >= 2);
    for (std::size_t i = 1; i < model.objective_history.size(); ++i)
        REQUIRE(model.objective_history[i] <= model.objective_history[i - 1]);
}

TEST_CASE("logistic on indistinguishable inputs settles at class frequencies") {
    Matrix x(10, 2);
    for (std::size_t r = 0; r < 10; ++r) {
        x(r, 0) = 2.0;
        x(r, 1) = -1.0;
    }
    std::vector<std::int32_t> y = {0, 0, 0, 1, 1, 1, 1, 1, 1, 1};
    const auto model = fit_logistic(x, y, {"a", "b"}, 0.0);

    const Matrix p = model.probabilities(x);
    for (std::size_t r = 0; r < 10; ++r) {
        REQUIRE(p(r, 0) == Catch::Approx(0.3).margin(1e-5));
        REQUIRE(p(r, 1) == Catch::Approx(0.7).margin(1e-5));
    }
}

TEST_CASE("logistic rejects malformed inputs") {
    Rng rng(2);
    const Matrix x = random_matrix(6, 2, rng);
    std::vector<std::int32_t> y = {0, 1, 0, 1, 0, 1};

    REQUIRE_THROWS_AS(fit_logistic(x, {0, 1, 0}, {"a", "b"}, 0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_logistic(Matrix(0, 2), {}, {"a", "b"}, 0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_logistic(x, y, {"a", "b"}, -0.5), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_logistic(x, y, {"a"}, 0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_logistic(x, {0, 1, 0, 1, 0, 5}, {"a", "b"}, 0.1), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_logistic(x, {0, 0, 0, 0, 0, 0}, {"a", "b"}, 0.1), std::invalid_argument);

    Matrix bad = x;
    bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(fit_logistic(bad, y, {"a", "b"}, 0.1), std::invalid_argument);
}

TEST_CASE("gbrt reproduces a constant target exactly") {
    Rng rng(17);
    const Matrix x = random_matrix(50, 3, rng);
    const std::vector<double> y(50, 5.0);
    const auto model = fit_gbrt(x, y, {4, 0.1, 20});

    REQUIRE(model.base_score == 5.0);
    REQUIRE(model.trees.size() == 20);
    for (const auto& t : model.trees) {
        REQUIRE(t.nodes.size() == 1); // zero residuals admit no gain
        REQUIRE(t.nodes[0].value == 0.0);
    }
    for (double p : model.predict(x)) REQUIRE(p == 5.0);
}

TEST_CASE("gbrt drives training error near zero on a line") {
    Matrix x(100, 1);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        x(i, 0) = static_cast<double>(i);
        y[i] = static_cast<double>(i);
    }
    const auto model = fit_gbrt(x, y, {3, 0.1, 200});
    REQUIRE(rmse(model.predict(x), y) < 0.5); // target sd is ~28.9
    for (const auto& t : model.trees) REQUIRE(t.depth() <= 3);
}

TEST_CASE("gbrt quantile binning handles many distinct values") {
    Rng rng(123);
    Matrix x(1000, 2);
    std::vector<double> y(1000);
    for (std::size_t i = 0; i < 1000; ++i) {
        x(i, 0) = rng.uniform() * 10.0;
        x(i, 1) = rng.normal();
        y[i] = std::sin(x(i, 0)) * 5.0 + x(i, 1) * 2.0;
    }

    const auto fb = detail::bin_feature(x, 0);
    REQUIRE(fb.cuts.size() == 64);
    for (std::size_t i = 1; i < fb.cuts.size(); ++i) REQUIRE(fb.cuts[i] > fb.cuts[i - 1]);

    const auto model = fit_gbrt(x, y, {5, 0.1, 200});
    REQUIRE(rmse(model.predict(x), y) < 0.5); // target sd is ~3.8
}

TEST_CASE("gbrt per-round training error never increases") {
    Rng rng(41);
    const Matrix x = random_matrix(150, 4, rng);
    std::vector<double> y(150);
    for (std::size_t i = 0; i < 150; ++i)
        y[i] = 2.0 * x(i, 0) - x(i, 1) * x(i, 2) + 0.3 * rng.normal();

    const auto model = fit_gbrt(x, y, {4, 0.2, 60});
    std::vector<double> pred(150, model.base_score);
    double prev = rmse(pred, y);
    for (const auto& tree : model.trees) {
        for (std::size_t i = 0; i < 150; ++i)
            pred[i] += model.learning_rate * tree.value_at(x, i);
        const double cur = rmse(pred, y);
        REQUIRE(cur <= prev + 1e-12);
        prev = cur;
    }
}

TEST_CASE("gbrt trees respect the depth bound") {
    Rng rng(88);
    const Matrix x = random_matrix(200, 3, rng);
    std::vector<double> y(200);
    for (std::size_t i = 0; i < 200; ++i) y[i] = x(i, 0) * x(i, 1) + rng.normal();

    for (std::size_t depth : {1, 2, 7}) {
        const auto model = fit_gbrt(x, y, {depth, 0.3, 10});
        for (const auto& t : model.trees) REQUIRE(t.depth() <= depth);
    }
}

TEST_CASE("gbrt leaves hold at least two training instances") {
    Rng rng(19);
    const Matrix x = random_matrix(100, 3, rng);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) y[i] = x(i, 0) + 3.0 * x(i, 1) + rng.normal() * 0.1;

    const auto model = fit_gbrt(x, y, {4, 0.5, 1});
    const auto& tree = model.trees[0];
    REQUIRE(tree.nodes.size() > 1);

    std::map<std::size_t, std::size_t> occupancy;
    for (std::size_t i = 0; i < 100; ++i) {
        const std::size_t leaf = tree.apply(x, i);
        REQUIRE(tree.nodes[leaf].feature == -1);
        ++occupancy[leaf];
    }
    std::size_t total = 0;
    for (const auto& [leaf, count] : occupancy) {
        REQUIRE(count >= 2);
        total += count;
    }
    REQUIRE(total == 100);
    for (std::size_t id = 0; id < tree.nodes.size(); ++id)
        if (tree.nodes[id].feature == -1) REQUIRE(occupancy.count(id) == 1);
}

TEST_CASE("equal-gain splits keep the lowest feature index") {
    Matrix x(4, 2);
    for (std::size_t i = 0; i < 4; ++i) {
        x(i, 0) = static_cast<double>(i + 1);
        x(i, 1) = static_cast<double>(i + 1); // identical column: same gains everywhere
    }
    const std::vector<double> y = {0.0, 0.0, 10.0, 10.0};
    const auto model = fit_gbrt(x, y, {1, 1.0, 1});

    const auto& root = model.trees[0].nodes[0];
    REQUIRE(root.feature == 0);
    REQUIRE(root.threshold == 2.5);
    const auto pred = model.predict(x);
    REQUIRE(pred[0] == 0.0);
    REQUIRE(pred[1] == 0.0);
    REQUIRE(pred[2] == 10.0);
    REQUIRE(pred[3] == 10.0);
}

TEST_CASE("equal-gain splits keep the lowest threshold") {
    Matrix x(6, 1);
    for (std::size_t i = 0; i < 6; ++i) x(i, 0) = static_cast<double>(i + 1);
    const std::vector<double> y = {5.0, 5.0, 0.0, 0.0, 5.0, 5.0};
    // splitting after 2 or after 4 yields the same gain; the scan meets 2.5 first
    const auto model = fit_gbrt(x, y, {1, 1.0, 1});
    const auto& root = model.trees[0].nodes[0];
    REQUIRE(root.feature == 0);
    REQUIRE(root.threshold == 2.5);
}

TEST_CASE("gbrt is invariant to instance order") {
    for (const std::size_t n : {200, 300}) { // exact-cut mode, then quantile mode
        Rng rng(500 + n);
        Matrix x(n, 4);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t f = 0; f < 4; ++f) x(i, f) = rng.normal();
            y[i] = x(i, 0) * 2.0 + std::cos(x(i, 1)) - x(i, 2) * x(i, 3) + 0.2 * rng.normal();
        }
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        Rng prng(9);
        shuffle(perm, prng);
        const Matrix xp = take_rows(x, perm);
        std::vector<double> yp(n);
        for (std::size_t i = 0; i < n; ++i) yp[i] = y[perm[i]];

        const auto a = fit_gbrt(x, y, {4, 0.1, 40});
        const auto b = fit_gbrt(xp, yp, {4, 0.1, 40});
        const auto pa = a.predict(x);
        const auto pb = b.predict(x);
        for (std::size_t i = 0; i < n; ++i)
            REQUIRE(pa[i] == Catch::Approx(pb[i]).margin(1e-9));
    }
}

TEST_CASE("gbrt rejects malformed inputs") {
    Rng rng(3);
    const Matrix x = random_matrix(10, 2, rng);
    const std::vector<double> y(10, 1.0);

    REQUIRE_THROWS_AS(fit_gbrt(Matrix(0, 2), {}, {3, 0.1, 5}), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_gbrt(x, {1.0, 2.0}, {3, 0.1, 5}), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_gbrt(x, y, {0, 0.1, 5}), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_gbrt(x, y, {3, 0.0, 5}), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_gbrt(x, y, {3, 1.5, 5}), std::invalid_argument);
    REQUIRE_THROWS_AS(fit_gbrt(x, y, {3, 0.1, 0}), std::invalid_argument);

    Matrix bad = x;
    bad(5, 1) = std::numeric_limits<double>::infinity();
    REQUIRE_THROWS_AS(fit_gbrt(bad, y, {3, 0.1, 5}), std::invalid_argument);
    std::vector<double> bady = y;
    bady[0] = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(fit_gbrt(x, bady, {3, 0.1, 5}), std::invalid_argument);
}

TEST_CASE("kfold partitions are balanced, exhaustive, and deterministic") {
    const auto fold_of = make_kfold(10, 3, 42);
    REQUIRE(fold_of.size() == 10);
    std::vector<std::size_t> sizes(3, 0);
    for (auto f : fold_of) {
        REQUIRE(f >= 0);
        REQUIRE(f < 3);
        ++sizes[static_cast<std::size_t>(f)];
    }
    REQUIRE(sizes == std::vector<std::size_t>{4, 3, 3});

    REQUIRE(make_kfold(10, 3, 42) == fold_of);
    REQUIRE(make_kfold(10, 3, 43) != fold_of);

    const auto loo = make_kfold(5, 5, 7);
    std::set<std::int32_t> seen(loo.begin(), loo.end());
    REQUIRE(seen.size() == 5);

    REQUIRE_THROWS_AS(make_kfold(10, 1, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(make_kfold(10, 11, 0), std::invalid_argument);
}

TEST_CASE("tuning picks the stronger configuration") {
    Rng rng(26);
    Matrix x(500, 1);
    std::vector<double> y(500);
    for (std::size_t i = 0; i < 500; ++i) {
        x(i, 0) = rng.uniform() * 6.283;
        y[i] = std::sin(x(i, 0)) * 10.0;
    }
    const std::vector<Hyperparams> grid = {{1, 0.5, 1}, {4, 0.1, 120}};
    const auto best = tune_gbrt(x, y, grid, 5, 13);
    REQUIRE(best == grid[1]);
}

TEST_CASE("tuning ties keep the earliest grid entry") {
    Matrix x(100, 1);
    std::vector<double> y(100);
    for (std::size_t i = 0; i < 100; ++i) {
        x(i, 0) = static_cast<double>(i % 4);
        y[i] = x(i, 0) * 2.0;
    }
    // four distinct values saturate at depth 2, so both entries fit identical trees
    const std::vector<Hyperparams> grid = {{5, 0.1, 20}, {7, 0.1, 20}};
    const auto best = tune_gbrt(x, y, grid, 5, 99);
    REQUIRE(best == grid[0]);

    REQUIRE_THROWS_AS(tune_gbrt(x, y, {}, 5, 0), std::invalid_argument);
    REQUIRE_THROWS_AS(tune_gbrt(x, y, grid, 101, 0), std::invalid_argument);
}

TEST_CASE("rmse matches the closed form") {
    REQUIRE(rmse({0.0, 0.0}, {3.0, 4.0}) == Catch::Approx(std::sqrt(12.5)).epsilon(1e-15));
    REQUIRE_THROWS_AS(rmse({1.0}, {1.0, 2.0}), std::invalid_argument);
    REQUIRE_THROWS_AS(rmse({}, {}), std::invalid_argument);
}

TEST_CASE("take_rows validates indices") {
    Matrix x(3, 2);
    REQUIRE_THROWS_AS(take_rows(x, {0, 3}), std::out_of_range);
    const Matrix sub = take_rows(x, {2, 0});
    REQUIRE(sub.rows == 2);
    REQUIRE(sub.cols == 2);
}

TEST_CASE("baseline ignores type identity entirely") {
    FeatureSchema schema;
    schema.features = {{"size", FeatureKind::continuous, {}},
                       {"kind", FeatureKind::categorical, {"p", "q"}}};
    schema.target_metrics = {"M1", "M2"};
    schema.class_column = "building_type";
    schema.class_labels = {"A", "B", "C"};

    Rng rng(61);
    Dataset d1(schema), d2(schema);
    const std::vector<std::string> labels = {"A", "B", "C"};
    for (std::size_t i = 0; i < 60; ++i) {
        const double size = rng.normal() * 3.0 + 10.0;
        const std::string kind = rng.uniform() < 0.5 ? "p" : "q";
        const std::vector<double> metrics = {size * 2.0 + rng.normal(), size - rng.normal()};
        // same records, rotated class labels: a type-blind model cannot tell them apart
        d1.add_row({size, kind}, labels[i % 3], metrics);
        d2.add_row({size, kind}, labels[(i + 1) % 3], metrics);
    }

    const std::vector<Hyperparams> grid = {{3, 0.1, 30}};
    const auto b1 = fit_baseline(d1, "M1", grid, 3, 5);
    const auto b2 = fit_baseline(d2, "M1", grid, 3, 5);
    const auto p1 = b1.predict(d1);
    const auto p2 = b2.predict(d1);
    REQUIRE(p1.size() == 60);
    for (std::size_t i = 0; i < 60; ++i) REQUIRE(p1[i] == p2[i]);

    REQUIRE_THROWS_AS(fit_baseline(d1, "M9", grid, 3, 5), std::invalid_argument);

    Dataset single(schema);
    for (std::size_t i = 0; i < 10; ++i)
        single.add_row({1.0 * static_cast<double>(i), "p"}, "A", {1.0, 2.0});
    REQUIRE_THROWS_AS(fit_baseline(single, "M1", grid, 3, 5), std::invalid_argument);
}
