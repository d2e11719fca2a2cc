#include <doctest.h>

#include <map>
#include <random>

#include "deltacharger/error.hpp"
#include "deltacharger/rng.hpp"
#include "deltacharger/shallow.hpp"

using namespace deltacharger;
using namespace deltacharger::shallow;

namespace {

// Gaussian blobs, one per class, in `dims` dimensions.
void blobs(int classes, int per_class, int dims, double spread, std::uint64_t seed, FeatureMatrix& x,
           std::vector<int>& y) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0, spread);
    std::uniform_real_distribution<double> centre(-5, 5);
    Eigen::MatrixXd centres(classes, dims);
    for (Eigen::Index i = 0; i < centres.size(); ++i) centres.data()[i] = centre(rng);
    x.resize(classes * per_class, dims);
    y.clear();
    for (int c = 0; c < classes; ++c)
        for (int i = 0; i < per_class; ++i) {
            const int r = c * per_class + i;
            for (int d = 0; d < dims; ++d) x(r, d) = centres(c, d) + noise(rng);
            y.push_back(c);
        }
}

double acc(const std::vector<int>& p, const std::vector<int>& t) {
    int hit = 0;
    for (std::size_t i = 0; i < p.size(); ++i) hit += p[i] == t[i];
    return double(hit) / double(p.size());
}

}  // namespace

TEST_CASE("knn with k = 1 recovers its own distinct training points") {
    FeatureMatrix x;
    std::vector<int> y;
    blobs(4, 25, 6, 3.0, 1, x, y);
    Knn knn(x, y, 4, 1);
    CHECK(acc(knn.predict(x), y) == 1.0);
}

TEST_CASE("knn default is k = 5 with euclidean distance") {
    FeatureMatrix x(6, 1);
    x << 0, 1, 2, 10, 11, 12;
    const std::vector<int> y{0, 0, 0, 1, 1, 1};
    Knn knn(x, y, 2);
    CHECK(knn.hyperparameters().at("k") == "5");
    FeatureMatrix q(1, 1);
    q << 0.5;
    const auto p = knn.predict_proba(q);
    CHECK(p(0, 0) == doctest::Approx(0.6));
    CHECK(p(0, 1) == doctest::Approx(0.4));
}

TEST_CASE("decision tree splits an axis-separable set with one node") {
    Rng rng(5);
    std::uniform_real_distribution<double> u(0, 1);
    FeatureMatrix x(60, 4);
    std::vector<int> y;
    for (int i = 0; i < 60; ++i) {
        for (int d = 0; d < 4; ++d) x(i, d) = u(rng);
        x(i, 2) = i < 30 ? u(rng) * 0.4 : 0.6 + u(rng) * 0.4;
        y.push_back(i < 30 ? 0 : 1);
    }
    const auto dt = DecisionTree::fit(x, y, 2);
    CHECK(dt->tree().depth() == 1);
    CHECK(dt->tree().feature[0] == 2);
    CHECK(dt->tree().threshold[0] > 0.4);
    CHECK(dt->tree().threshold[0] < 0.6);
    CHECK(acc(dt->predict(x), y) == 1.0);
}

TEST_CASE("unlimited-depth tree fits distinct training points exactly") {
    FeatureMatrix x;
    std::vector<int> y;
    blobs(3, 30, 5, 4.0, 2, x, y);
    const auto dt = DecisionTree::fit(x, y, 3);
    CHECK(acc(dt->predict(x), y) == 1.0);
}

TEST_CASE("random forest prediction is the mode of its trees") {
    FeatureMatrix x;
    std::vector<int> y;
    blobs(4, 30, 8, 3.0, 3, x, y);
    const auto rf = RandomForest::fit(x, y, 4, 11);
    CHECK(rf->size() == 100u);
    FeatureMatrix q;
    std::vector<int> unused;
    blobs(4, 10, 8, 5.0, 4, q, unused);
    const auto votes = rf->tree_votes(q);
    const auto pred = rf->predict(q);
    for (Eigen::Index r = 0; r < q.rows(); ++r) {
        std::map<int, int> count;
        for (Eigen::Index t = 0; t < votes.cols(); ++t) count[votes(r, t)]++;
        int best = -1, best_n = -1;
        for (const auto& [cls, n] : count)
            if (n > best_n) best = cls, best_n = n;
        CHECK(pred[r] == best);
    }
}

TEST_CASE("random forest is deterministic in its seed") {
    FeatureMatrix x;
    std::vector<int> y;
    blobs(3, 20, 20, 3.0, 6, x, y);
    const auto a = RandomForest::fit(x, y, 3, 1), b = RandomForest::fit(x, y, 3, 1), c = RandomForest::fit(x, y, 3, 2);
    CHECK(a->to_blocks() == b->to_blocks());
    CHECK_FALSE(a->to_blocks() == c->to_blocks());
}

TEST_CASE("linear models separate blobs") {
    FeatureMatrix x;
    std::vector<int> y;
    blobs(5, 40, 10, 1.0, 7, x, y);
    const auto svm = fit_svm_sgd(x, y, 5, 1);
    CHECK(acc(svm->predict(x), y) >= 0.95);
    const auto lr = fit_logreg_cv(x, y, 5, 1);
    CHECK(acc(lr->predict(x), y) >= 0.95);
    const double c = std::stod(lr->hyperparameters().at("C"));
    CHECK((c == 0.01 || c == 0.1 || c == 1.0 || c == 10.0));
}

TEST_CASE("probabilities form a distribution") {
    FeatureMatrix x;
    std::vector<int> y;
    blobs(3, 15, 4, 2.0, 8, x, y);
    std::vector<std::unique_ptr<Classifier>> models;
    models.push_back(std::make_unique<Knn>(x, y, 3));
    models.push_back(DecisionTree::fit(x, y, 3));
    models.push_back(RandomForest::fit(x, y, 3, 1, 10));
    models.push_back(fit_svm_sgd(x, y, 3, 1));
    models.push_back(fit_logreg_cv(x, y, 3, 1));
    for (const auto& m : models) {
        const auto p = m->predict_proba(x);
        CHECK(p.rows() == x.rows());
        CHECK(p.cols() == 3);
        CHECK((p.rowwise().sum().array() - 1).abs().maxCoeff() < 1e-9);
        CHECK(p.minCoeff() >= 0);
    }
}

TEST_CASE("models rebuild from their blocks") {
    FeatureMatrix x;
    std::vector<int> y;
    blobs(3, 15, 4, 2.0, 9, x, y);
    const ConfigMap cls{{"classes", "3"}, {"k", "5"}, {"trees", "10"}};
    const auto dt = DecisionTree::fit(x, y, 3);
    CHECK(DecisionTree::from_blocks(dt->to_blocks(), cls)->predict_proba(x) == dt->predict_proba(x));
    const auto rf = RandomForest::fit(x, y, 3, 1, 10);
    CHECK(RandomForest::from_blocks(rf->to_blocks(), cls)->predict_proba(x) == rf->predict_proba(x));
    const Knn knn(x, y, 3);
    CHECK(Knn::from_blocks(knn.to_blocks(), cls)->predict_proba(x) == knn.predict_proba(x));
    const auto lr = fit_logreg_cv(x, y, 3, 1);
    ConfigMap lcfg = lr->hyperparameters();
    lcfg["classes"] = "3";
    CHECK(LinearModel::from_blocks(lr->to_blocks(), lcfg)->predict_proba(x) == lr->predict_proba(x));
}

TEST_CASE("standardizer handles constant features") {
    FeatureMatrix x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    const auto s = Standardizer::fit(x);
    CHECK(s.scale(1) == 1.0);
    const auto z = s.apply(x);
    CHECK(z.col(1).isZero());
    CHECK(z.col(0).mean() == doctest::Approx(0));
    CHECK((z.col(0).array().square().mean()) == doctest::Approx(1));
}

TEST_CASE("single-class fits are degenerate") {
    FeatureMatrix x = FeatureMatrix::Random(6, 3);
    const std::vector<int> y(6, 0);
    auto kind_of = [](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            return e.kind();
        }
        return ErrorKind::Io;
    };
    CHECK(kind_of([&] { DecisionTree::fit(x, y, 2); }) == ErrorKind::Degenerate);
    CHECK(kind_of([&] { RandomForest::fit(x, y, 2, 1); }) == ErrorKind::Degenerate);
    CHECK(kind_of([&] { fit_svm_sgd(x, y, 2, 1); }) == ErrorKind::Degenerate);
    CHECK(kind_of([&] { fit_logreg_cv(x, y, 2, 1); }) == ErrorKind::Degenerate);
}
