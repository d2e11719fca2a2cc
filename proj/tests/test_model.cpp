#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "deltacharger/error.hpp"
#include "deltacharger/model.hpp"
#include "deltacharger/rng.hpp"

using namespace deltacharger;

namespace {

struct Constant final : Classifier {
    int n, cls;
    Constant(int n_, int c) : n(n_), cls(c) {}
    int classes() const override { return n; }
    Eigen::MatrixXd predict_proba(const FeatureMatrix& x) const override {
        Eigen::MatrixXd p = Eigen::MatrixXd::Zero(x.rows(), n);
        p.col(cls).setOnes();
        return p;
    }
    Blocks to_blocks() const override { return {}; }
};

const LabeledDataset& small_angle() {
    static const LabeledDataset d = [] {
        GenerationConfig g;
        g.angle_per_class = 20;
        return generate_angle_dataset(5, g);
    }();
    return d;
}

nn::TrainConfig quick() {
    nn::TrainConfig c;
    c.epochs = 3;
    return c;
}

}  // namespace

TEST_CASE("constant predictor on a balanced six-class set scores one sixth") {
    ModelArtifact m;
    m.kind = ModelKind::Knn;
    m.task = TaskKind::Angle;
    m.classes = 6;
    m.model = std::make_shared<Constant>(6, 2);
    const auto r = evaluate(m, small_angle());
    CHECK(r.accuracy == doctest::Approx(1.0 / 6));
    CHECK(r.confusion.col(2).sum() == int(small_angle().size()));
}

TEST_CASE("every model kind fits and evaluates consistently") {
    const auto [train, val] = split(small_angle(), 0.67, 42);
    for (ModelKind kind : kAllModels) {
        CAPTURE(to_string(kind));
        const auto m = fit_model(kind, train, val, quick());
        CHECK(m.kind == kind);
        CHECK(m.classes == 6);
        CHECK(is_deep(kind) == (kind == ModelKind::Cnn || kind == ModelKind::Nn));
        const auto r = evaluate(m, val);
        CHECK(r.samples == val.size());
        CHECK(r.ms_per_sample >= 0);
        CHECK(r.accuracy == doctest::Approx(double(r.confusion.trace()) / double(val.size())));
        const auto counts = val.class_counts();
        for (int c = 0; c < 6; ++c) CHECK(r.confusion.row(c).sum() == counts[c]);
        CHECK(r.accuracy > 1.0 / 6);
    }
}

TEST_CASE("evaluation is invariant to sample order") {
    const auto [train, val] = split(small_angle(), 0.67, 42);
    const auto m = fit_model(ModelKind::RandomForest, train, val, quick());
    std::vector<std::size_t> order(val.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(3);
    std::shuffle(order.begin(), order.end(), rng);
    const auto a = evaluate(m, val), b = evaluate(m, val.subset(order));
    CHECK(a.accuracy == b.accuracy);
    CHECK(a.confusion == b.confusion);
}

TEST_CASE("task mismatch is rejected") {
    const auto [train, val] = split(small_angle(), 0.67, 42);
    const auto m = fit_model(ModelKind::Knn, train, val, quick());
    GenerationConfig g;
    g.position_per_cell = 4;
    const auto pos = relabel(generate_position_dataset(1, g), TaskKind::Vertical);
    try {
        evaluate(m, pos);
        FAIL("expected TaskMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TaskMismatch);
    }
    try {
        fit_model(ModelKind::Knn, train, pos, quick());
        FAIL("expected TaskMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TaskMismatch);
    }
}

TEST_CASE("single-class training set is degenerate") {
    LabeledDataset one = small_angle();
    one.samples.resize(20);  // class 0 only
    for (ModelKind kind : {ModelKind::Nn, ModelKind::Knn, ModelKind::RandomForest}) {
        try {
            fit_model(kind, one, one, quick());
            FAIL("expected Degenerate");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Degenerate);
        }
    }
}

TEST_CASE("model names round trip") {
    for (ModelKind k : kAllModels) CHECK(parse_model_kind(to_string(k)) == k);
    CHECK_THROWS_AS(parse_model_kind("xgboost"), Error);
}

TEST_CASE("deep fits record their training history and config") {
    const auto [train, val] = split(small_angle(), 0.67, 42);
    const auto m = fit_model(ModelKind::Cnn, train, val, quick());
    CHECK(m.history.size() == 3u);
    CHECK(m.config.at("epochs") == "3");
    CHECK(m.spec.rfind("in(2,10,10)", 0) == 0);
}
