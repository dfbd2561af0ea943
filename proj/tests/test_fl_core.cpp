#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bflsim/dataset.hpp"
#include "bflsim/loss.hpp"
#include "bflsim/rng.hpp"
#include "bflsim/train.hpp"
#include "oracles.hpp"

using namespace bflsim;
using namespace bflsim::fl;

namespace {

Dataset single_point(Vec features, int label = 0) {
    Dataset ds;
    ds.points.push_back({std::move(features), label});
    return ds;
}

}  // namespace

TEST_CASE("point_loss: softmax with zero parameters is log C") {
    const auto model = LossModel::softmax(4, 10);
    Vec w(model.dim(), 0.0);
    DataPoint p{{0.3, -1.2, 0.7, 2.0}, 3};
    CHECK(model.point_loss(w, p) == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("point_loss: quadratic fixture") {
    const auto model = LossModel::quadratic(2);
    CHECK(model.point_loss({1.0, 1.0}, {{1.0, 1.0}, 0}) == doctest::Approx(0.0));
    CHECK(model.point_loss({0.0, 0.0}, {{1.0, 1.0}, 0}) == doctest::Approx(1.0));
}

TEST_CASE("point_loss: dimension mismatch throws") {
    const auto model = LossModel::softmax(4, 3);
    Vec w(model.dim(), 0.0);
    CHECK_THROWS_AS((void)model.point_loss(w, DataPoint{{1.0, 2.0}, 0}), std::invalid_argument);
    CHECK_THROWS_AS((void)model.point_loss(Vec(3, 0.0), DataPoint{{1., 2., 3., 4.}, 0}),
                    std::invalid_argument);
}

TEST_CASE("local_loss: mean of point losses") {
    const auto model = LossModel::quadratic(1);
    Dataset ds;
    // losses 1/2*(0-x)^2: pick points so point losses are 1 and 3
    ds.points.push_back({{std::sqrt(2.0)}, 0});
    ds.points.push_back({{std::sqrt(6.0)}, 0});
    CHECK(local_loss(model, {0.0}, ds) == doctest::Approx(2.0));

    Dataset empty;
    CHECK_THROWS_AS((void)local_loss(model, {0.0}, empty), std::invalid_argument);
}

TEST_CASE("local_loss: brute-force summation oracle on random softmax case") {
    const auto model = LossModel::softmax(3, 4);
    Rng rng(77);
    Vec w(model.dim());
    for (auto& v : w) v = rng.normal();
    Dataset ds;
    for (int i = 0; i < 10; ++i) {
        DataPoint p;
        p.features = {rng.normal(), rng.normal(), rng.normal()};
        p.label = static_cast<int>(rng.uniform_u64(0, 3));
        ds.points.push_back(p);
    }
    double brute = 0.0;
    for (const auto& p : ds.points) brute += model.point_loss(w, p);
    brute /= 10.0;
    CHECK(local_loss(model, w, ds) == doctest::Approx(brute).epsilon(1e-14));
}

TEST_CASE("global_loss: weighted mean semantics") {
    const auto model = LossModel::quadratic(1);
    // shard sizes 1 and 3 with local losses 4 and 0
    Dataset a = single_point({std::sqrt(8.0)});
    Dataset b;
    for (int i = 0; i < 3; ++i) b.points.push_back({{0.0}, 0});
    CHECK(global_loss(model, {0.0}, {a, b}) == doctest::Approx(1.0));

    // single shard equals local loss
    CHECK(global_loss(model, {0.0}, {a}) == doctest::Approx(local_loss(model, {0.0}, a)));

    // equal-size shards with equal local losses
    Dataset c = single_point({std::sqrt(8.0)});
    CHECK(global_loss(model, {0.0}, {a, c}) == doctest::Approx(4.0));

    CHECK_THROWS_AS((void)global_loss(model, {0.0}, {Dataset{}, Dataset{}}),
                    std::invalid_argument);
}

TEST_CASE("global_loss of equal shards equals pooled local loss") {
    const auto model = LossModel::softmax(2, 2);
    auto ds = make_synthetic_dataset(2, 2, 20, 1.0, 5);
    std::vector<Dataset> shards(2);
    for (std::size_t i = 0; i < ds.points.size(); ++i)
        shards[i % 2].points.push_back(ds.points[i]);
    Rng rng(3);
    Vec w(model.dim());
    for (auto& v : w) v = 0.1 * rng.normal();
    CHECK(global_loss(model, w, shards) ==
          doctest::Approx(local_loss(model, w, pool(shards))).epsilon(1e-12));
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(11);
    auto check_model = [&](const LossModel& model) {
        Dataset ds;
        for (int i = 0; i < 4; ++i) {
            DataPoint p;
            p.features.resize(model.feature_dim);
            for (auto& f : p.features) f = rng.normal();
            p.label = model.kind == LossKind::quadratic_test
                          ? 0
                          : static_cast<int>(rng.uniform_u64(0, model.classes - 1));
            ds.points.push_back(p);
        }
        for (int probe = 0; probe < 5; ++probe) {
            Vec w(model.dim());
            for (auto& v : w) v = 0.5 * rng.normal();
            const Vec analytic = model.mean_grad(w, ds);
            const Vec fd = oracles::fd_gradient(
                [&](const Vec& x) { return model.mean_loss(x, ds); }, w, 1e-5);
            CHECK(oracles::max_rel_error(analytic, fd) < 1e-4);
        }
    };
    check_model(LossModel::softmax(3, 4));
    check_model(LossModel::mlp(3, 5, 4));
    check_model(LossModel::quadratic(3));
}

TEST_CASE("sgd_round: zero step size is a no-op on parameters") {
    const auto model = LossModel::quadratic(2);
    auto ds = single_point({1.0, 2.0});
    TrainerConfig cfg;
    cfg.epochs = 3;
    cfg.step_size = 0.0;
    const auto res = sgd_round(model, {5.0, -5.0}, ds, cfg);
    CHECK(res.w[0] == 5.0);
    CHECK(res.w[1] == -5.0);
    CHECK(res.loss_trace.size() == 3);
}

TEST_CASE("sgd_round: one full-batch step solves the quadratic exactly") {
    const auto model = LossModel::quadratic(2);
    Dataset ds = single_point({2.5, -1.5});
    TrainerConfig cfg;
    cfg.epochs = 1;
    cfg.batch_ratio = 1.0;
    cfg.step_size = 1.0;
    const auto res = sgd_round(model, {0.0, 0.0}, ds, cfg);
    CHECK(res.w[0] == doctest::Approx(2.5));
    CHECK(res.w[1] == doctest::Approx(-1.5));
}

TEST_CASE("sgd_round: e=2 equals two chained e=1 calls") {
    const auto model = LossModel::softmax(2, 2);
    auto ds = make_synthetic_dataset(2, 2, 25, 1.0, 9);
    TrainerConfig cfg;
    cfg.epochs = 2;
    cfg.batch_ratio = 0.4;
    cfg.step_size = 0.05;
    cfg.seed = 123;
    Vec w0(model.dim(), 0.0);
    const auto full = sgd_round(model, w0, ds, cfg);

    TrainerConfig step1 = cfg;
    step1.epochs = 1;
    const auto a = sgd_round(model, w0, ds, step1);
    TrainerConfig step2 = step1;
    step2.epoch_offset = 1;
    const auto b = sgd_round(model, a.w, ds, step2);
    for (std::size_t i = 0; i < full.w.size(); ++i) CHECK(full.w[i] == b.w[i]);
    CHECK(full.loss_trace[0] == a.loss_trace[0]);
    CHECK(full.loss_trace[1] == b.loss_trace[0]);

    // Determinism: identical configs give identical results.
    const auto again = sgd_round(model, w0, ds, cfg);
    for (std::size_t i = 0; i < full.w.size(); ++i) CHECK(full.w[i] == again.w[i]);
}

TEST_CASE("cumulative_gradient: arithmetic and reconstruction") {
    CHECK_THROWS_AS((void)cumulative_gradient({1.0}, {1.0}, 0.0), std::invalid_argument);

    const Vec g = cumulative_gradient({1.0, 1.0}, {0.5, 0.5}, 0.5);
    CHECK(g[0] == doctest::Approx(1.0));
    CHECK(g[1] == doctest::Approx(1.0));

    const Vec zero = cumulative_gradient({2.0, 3.0}, {2.0, 3.0}, 0.1);
    CHECK(zero[0] == 0.0);
    CHECK(zero[1] == 0.0);

    // w_start - eta * g reconstructs w_end to ulp scale.
    Rng rng(4);
    Vec ws(6), we(6);
    for (auto& v : ws) v = rng.normal();
    for (auto& v : we) v = rng.normal();
    const double eta = 0.37;
    const Vec cg = cumulative_gradient(ws, we, eta);
    for (std::size_t i = 0; i < ws.size(); ++i)
        CHECK(ws[i] - eta * cg[i] == doctest::Approx(we[i]).epsilon(1e-14));
}

TEST_CASE("make_synthetic_dataset: determinism and degenerate cases") {
    CHECK(make_synthetic_dataset(2, 2, 0, 1.0, 7).size() == 0);

    const auto a = make_synthetic_dataset(2, 2, 50, 1.0, 1);
    const auto b = make_synthetic_dataset(2, 2, 50, 1.0, 1);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a.points[i].label == b.points[i].label);
        for (std::size_t f = 0; f < 2; ++f)
            CHECK(a.points[i].features[f] == b.points[i].features[f]);
    }

    const auto c = make_synthetic_dataset(2, 3, 4, 0.0, 1);
    for (std::size_t i = 1; i < 4; ++i) {
        CHECK(c.points[i].features[0] == c.points[0].features[0]);
        CHECK(c.points[i].features[1] == c.points[0].features[1]);
    }

    CHECK_THROWS_AS((void)make_synthetic_dataset(0, 2, 1, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)make_synthetic_dataset(2, 1, 1, 1.0, 1), std::invalid_argument);
}

TEST_CASE("partition_noniid: label audit and disjointness") {
    const auto ds = make_synthetic_dataset(2, 2, 30, 1.0, 3);
    const auto shards = partition_noniid(ds, 2, 1, 5);
    REQUIRE(shards.size() == 2);
    for (const auto& p : shards[0].points) CHECK(p.label == 0);
    for (const auto& p : shards[1].points) CHECK(p.label == 1);
    CHECK(shards[0].size() + shards[1].size() <= ds.size());

    // labels_per_node = C degenerates to an any-label split.
    const auto iid = partition_noniid(ds, 3, 2, 5);
    std::size_t total = 0;
    for (const auto& s : iid) total += s.size();
    CHECK(total == ds.size());

    CHECK_THROWS_AS((void)partition_noniid(ds, 1, 1, 5), std::invalid_argument);
}

TEST_CASE("mini-batch gradient is unbiased") {
    const auto model = LossModel::softmax(2, 2);
    const auto ds = make_synthetic_dataset(2, 2, 30, 1.5, 21);
    Rng wrng(2);
    Vec w(model.dim());
    for (auto& v : w) v = 0.3 * wrng.normal();
    const Vec full = model.mean_grad(w, ds);

    const std::size_t batch = 12;
    const std::size_t draws = 10000;
    Vec mean(model.dim(), 0.0);
    std::vector<Vec> samples;
    samples.reserve(draws);
    for (std::size_t it = 0; it < draws; ++it) {
        Rng rng = Rng::stream(99, 0, it, "unbiased-test");
        Vec g(model.dim(), 0.0);
        for (std::size_t idx : rng.sample_without_replacement(ds.size(), batch))
            model.point_grad_accum(w, ds.points[idx], g);
        scale_inplace(g, 1.0 / static_cast<double>(batch));
        axpy(1.0 / static_cast<double>(draws), g, mean);
        samples.push_back(std::move(g));
    }
    // Per-coordinate standard error of the sample mean.
    Vec se(model.dim(), 0.0);
    for (const auto& s : samples)
        for (std::size_t i = 0; i < se.size(); ++i)
            se[i] += (s[i] - mean[i]) * (s[i] - mean[i]);
    double se_norm_sq = 0.0;
    for (std::size_t i = 0; i < se.size(); ++i)
        se_norm_sq += se[i] / static_cast<double>(draws - 1) / static_cast<double>(draws);
    CHECK(norm2(sub(mean, full)) <= 5.0 * std::sqrt(se_norm_sq));
}

TEST_CASE("dataset csv round trip") {
    const auto ds = make_synthetic_dataset(3, 2, 5, 1.0, 17);
    const std::string path = "test_dataset_tmp.csv";
    save_dataset_csv(ds, path);
    const auto back = load_dataset_csv(path);
    REQUIRE(back.size() == ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) {
        CHECK(back.points[i].label == ds.points[i].label);
        for (std::size_t f = 0; f < 3; ++f)
            CHECK(back.points[i].features[f] ==
                  doctest::Approx(ds.points[i].features[f]).epsilon(1e-15));
    }
    std::remove(path.c_str());
}
