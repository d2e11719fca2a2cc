#include "deltacharger/shallow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "deltacharger/error.hpp"
#include "deltacharger/rng.hpp"

namespace deltacharger::shallow {

namespace {

void check_fit_inputs(const FeatureMatrix& x, std::span<const int> y, int classes) {
    if (x.rows() != static_cast<Eigen::Index>(y.size()))
        throw Error(ErrorKind::ShapeMismatch, "feature and label counts differ");
    for (int label : y)
        if (label < 0 || label >= classes) throw Error(ErrorKind::ShapeMismatch, "label outside class range");
    if (std::set<int>(y.begin(), y.end()).size() < 2)
        throw Error(ErrorKind::Degenerate, "fitting needs at least two classes");
}

int config_int(const ConfigMap& config, const std::string& key) {
    const auto it = config.find(key);
    if (it == config.end()) throw Error(ErrorKind::MalformedFile, "model config lacks '" + key + "'");
    return parse_int(it->second, key);
}

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd s) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
        s.row(i).array() -= s.row(i).maxCoeff();
        s.row(i) = s.row(i).array().exp().matrix();
        s.row(i) /= s.row(i).sum();
    }
    return s;
}

}  // namespace

// --- Standardizer -----------------------------------------------------------

Standardizer Standardizer::fit(const FeatureMatrix& x) {
    Standardizer s;
    s.mean = x.colwise().mean();
    s.scale = ((x.rowwise() - s.mean).array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
    for (Eigen::Index j = 0; j < s.scale.size(); ++j)
        if (s.scale[j] == 0) s.scale[j] = 1;
    return s;
}

FeatureMatrix Standardizer::apply(const FeatureMatrix& x) const {
    if (x.cols() != mean.size()) throw Error(ErrorKind::ShapeMismatch, "feature width differs from fitted width");
    return ((x.rowwise() - mean).array().rowwise() / scale.array()).matrix();
}

// --- KNN --------------------------------------------------------------------

Knn::Knn(FeatureMatrix x, std::vector<int> y, int classes, int k)
    : x_(std::move(x)), y_(std::move(y)), classes_(classes), k_(k) {
    if (k_ < 1) throw Error(ErrorKind::InvalidArgument, "k must be positive");
    check_fit_inputs(x_, y_, classes_);
    if (static_cast<std::size_t>(k_) > y_.size()) throw Error(ErrorKind::InvalidArgument, "k exceeds training size");
}

Eigen::MatrixXd Knn::predict_proba(const FeatureMatrix& x) const {
    if (x.cols() != x_.cols()) throw Error(ErrorKind::ShapeMismatch, "feature width differs from fitted width");
    Eigen::MatrixXd proba = Eigen::MatrixXd::Zero(x.rows(), classes_);
    std::vector<std::pair<double, std::size_t>> dist(x_.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x_.rows(); ++j) dist[j] = {(x_.row(j) - x.row(i)).squaredNorm(), j};
        std::partial_sort(dist.begin(), dist.begin() + k_, dist.end());
        for (int n = 0; n < k_; ++n) proba(i, y_[dist[n].second]) += 1.0 / k_;
    }
    return proba;
}

Blocks Knn::to_blocks() const {
    Eigen::MatrixXd labels(y_.size(), 1);
    for (std::size_t i = 0; i < y_.size(); ++i) labels(i, 0) = y_[i];
    return {{"train_x", x_}, {"train_y", labels}};
}

ConfigMap Knn::hyperparameters() const { return {{"k", std::to_string(k_)}, {"metric", "euclidean"}}; }

std::unique_ptr<Knn> Knn::from_blocks(const Blocks& blocks, const ConfigMap& config) {
    const Eigen::MatrixXd& labels = find_block(blocks, "train_y");
    std::vector<int> y(labels.rows());
    for (Eigen::Index i = 0; i < labels.rows(); ++i) y[i] = static_cast<int>(labels(i, 0));
    return std::make_unique<Knn>(find_block(blocks, "train_x"), std::move(y), config_int(config, "classes"),
                                 config_int(config, "k"));
}

// --- Trees ------------------------------------------------------------------

int Tree::depth() const {
    std::vector<int> d(feature.size(), 0);
    int best = 0;
    for (std::size_t n = 0; n < feature.size(); ++n) {
        best = std::max(best, d[n]);
        if (feature[n] >= 0) d[left[n]] = d[right[n]] = d[n] + 1;
    }
    return best;
}

std::size_t Tree::leaves() const { return std::count(feature.begin(), feature.end(), -1); }

const Eigen::VectorXd& Tree::leaf(const double* x) const {
    int n = 0;
    while (feature[n] >= 0) n = x[feature[n]] <= threshold[n] ? left[n] : right[n];
    return value[n];
}

namespace {

class TreeBuilder {
public:
    TreeBuilder(const FeatureMatrix& x, std::span<const int> y, int classes, const TreeOptions& options,
                std::uint64_t seed)
        : x_(x), y_(y), classes_(classes), options_(options), rng_(seed) {}

    Tree build(std::vector<std::size_t> rows) {
        grow(std::move(rows), 0);
        return std::move(tree_);
    }

private:
    struct Split {
        int feature = -1;
        double threshold = 0;
        double score = -1;  // sum over children of sum_c count_c^2 / n_child; larger is purer
    };

    int add_node(const Eigen::VectorXd& counts) {
        tree_.feature.push_back(-1);
        tree_.threshold.push_back(0);
        tree_.left.push_back(-1);
        tree_.right.push_back(-1);
        tree_.value.push_back(counts / counts.sum());
        return static_cast<int>(tree_.feature.size()) - 1;
    }

    void scan_feature(int f, const std::vector<std::size_t>& rows, const Eigen::VectorXd& counts, Split& best) {
        std::vector<std::pair<double, int>> vals(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = {x_(rows[i], f), y_[rows[i]]};
        std::sort(vals.begin(), vals.end());
        if (vals.front().first == vals.back().first) return;

        Eigen::VectorXd left = Eigen::VectorXd::Zero(classes_);
        Eigen::VectorXd right = counts;
        double sq_left = 0, sq_right = counts.squaredNorm();
        const double n = static_cast<double>(rows.size());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            const int c = vals[i].second;
            sq_left += 2 * left[c] + 1;
            sq_right -= 2 * right[c] - 1;
            left[c] += 1;
            right[c] -= 1;
            if (vals[i].first == vals[i + 1].first) continue;
            const double nl = static_cast<double>(i + 1);
            const double score = sq_left / nl + sq_right / (n - nl);
            if (score > best.score) {
                double t = 0.5 * (vals[i].first + vals[i + 1].first);
                if (!(t < vals[i + 1].first)) t = vals[i].first;
                best = {f, t, score};
            }
        }
    }

    int grow(std::vector<std::size_t> rows, int depth) {
        Eigen::VectorXd counts = Eigen::VectorXd::Zero(classes_);
        for (auto r : rows) counts[y_[r]] += 1;
        const int node = add_node(counts);
        const bool pure = (counts.array() > 0).count() <= 1;
        if (pure || rows.size() < 2 || (options_.max_depth > 0 && depth >= options_.max_depth)) return node;

        const int d = static_cast<int>(x_.cols());
        Split best;
        if (options_.max_features <= 0 || options_.max_features >= d) {
            for (int f = 0; f < d; ++f) scan_feature(f, rows, counts, best);
        } else {
            // Random candidate subset; keep drawing past max_features until some split is valid.
            std::vector<int> order(d);
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng_);
            for (int i = 0; i < d; ++i) {
                if (i >= options_.max_features && best.feature >= 0) break;
                scan_feature(order[i], rows, counts, best);
            }
        }
        if (best.feature < 0) return node;

        std::vector<std::size_t> left_rows, right_rows;
        for (auto r : rows) (x_(r, best.feature) <= best.threshold ? left_rows : right_rows).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        tree_.feature[node] = best.feature;
        tree_.threshold[node] = best.threshold;
        const int l = grow(std::move(left_rows), depth + 1);
        tree_.left[node] = l;
        const int r = grow(std::move(right_rows), depth + 1);
        tree_.right[node] = r;
        return node;
    }

    const FeatureMatrix& x_;
    std::span<const int> y_;
    int classes_;
    TreeOptions options_;
    Rng rng_;
    Tree tree_;
};

Blocks tree_blocks(const Tree& tree, const std::string& prefix, int classes) {
    const auto n = static_cast<Eigen::Index>(tree.feature.size());
    Eigen::MatrixXd nodes(n, 4), values(n, classes);
    for (Eigen::Index i = 0; i < n; ++i) {
        nodes.row(i) << tree.feature[i], tree.threshold[i], tree.left[i], tree.right[i];
        values.row(i) = tree.value[i].transpose();
    }
    return {{prefix + "nodes", nodes}, {prefix + "values", values}};
}

Tree tree_from_blocks(const Blocks& blocks, const std::string& prefix, int classes) {
    const Eigen::MatrixXd& nodes = find_block(blocks, prefix + "nodes");
    const Eigen::MatrixXd& values = find_block(blocks, prefix + "values");
    if (nodes.cols() != 4 || values.rows() != nodes.rows() || values.cols() != classes)
        throw Error(ErrorKind::MalformedFile, "tree block '" + prefix + "' has inconsistent shape");
    Tree t;
    const auto n = nodes.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        t.feature.push_back(static_cast<int>(nodes(i, 0)));
        t.threshold.push_back(nodes(i, 1));
        t.left.push_back(static_cast<int>(nodes(i, 2)));
        t.right.push_back(static_cast<int>(nodes(i, 3)));
        t.value.push_back(values.row(i).transpose());
        if (t.feature.back() >= 0 && (t.left.back() <= i || t.right.back() <= i || t.left.back() >= n ||
                                      t.right.back() >= n))
            throw Error(ErrorKind::MalformedFile, "tree block '" + prefix + "' has a bad child index");
    }
    return t;
}

}  // namespace

Tree grow_tree(const FeatureMatrix& x, std::span<const int> y, std::span<const std::size_t> rows, int classes,
               const TreeOptions& options, std::uint64_t seed) {
    if (rows.empty()) throw Error(ErrorKind::Degenerate, "cannot grow a tree on no samples");
    TreeBuilder builder(x, y, classes, options, seed);
    return builder.build({rows.begin(), rows.end()});
}

std::unique_ptr<DecisionTree> DecisionTree::fit(const FeatureMatrix& x, std::span<const int> y, int classes) {
    check_fit_inputs(x, y, classes);
    std::vector<std::size_t> rows(y.size());
    std::iota(rows.begin(), rows.end(), 0);
    return std::make_unique<DecisionTree>(grow_tree(x, y, rows, classes, {}, 0), classes);
}

Eigen::MatrixXd DecisionTree::predict_proba(const FeatureMatrix& x) const {
    Eigen::MatrixXd out(x.rows(), classes_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) out.row(i) = tree_.leaf(x.row(i).data()).transpose();
    return out;
}

Blocks DecisionTree::to_blocks() const { return tree_blocks(tree_, "", classes_); }

ConfigMap DecisionTree::hyperparameters() const { return {{"criterion", "gini"}, {"max_depth", "none"}}; }

std::unique_ptr<DecisionTree> DecisionTree::from_blocks(const Blocks& blocks, const ConfigMap& config) {
    const int classes = config_int(config, "classes");
    return std::make_unique<DecisionTree>(tree_from_blocks(blocks, "", classes), classes);
}

std::unique_ptr<RandomForest> RandomForest::fit(const FeatureMatrix& x, std::span<const int> y, int classes,
                                                std::uint64_t seed, int trees, int max_features) {
    check_fit_inputs(x, y, classes);
    if (trees < 1) throw Error(ErrorKind::InvalidArgument, "forest needs at least one tree");
    std::vector<Tree> forest;
    forest.reserve(trees);
    const std::size_t n = y.size();
    for (int t = 0; t < trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        std::vector<std::size_t> rows(n);
        for (auto& r : rows) r = pick(rng);
        forest.push_back(grow_tree(x, y, rows, classes, {max_features, 0}, rng()));
    }
    return std::make_unique<RandomForest>(std::move(forest), classes);
}

Eigen::MatrixXi RandomForest::tree_votes(const FeatureMatrix& x) const {
    Eigen::MatrixXi votes(x.rows(), trees_.size());
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (std::size_t t = 0; t < trees_.size(); ++t) {
            const Eigen::VectorXd& leaf = trees_[t].leaf(x.row(i).data());
            Eigen::Index best;
            leaf.maxCoeff(&best);
            votes(i, t) = static_cast<int>(best);
        }
    return votes;
}

Eigen::MatrixXd RandomForest::predict_proba(const FeatureMatrix& x) const {
    const Eigen::MatrixXi votes = tree_votes(x);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), classes_);
    for (Eigen::Index i = 0; i < votes.rows(); ++i)
        for (Eigen::Index t = 0; t < votes.cols(); ++t) out(i, votes(i, t)) += 1.0;
    return out / static_cast<double>(trees_.size());
}

Blocks RandomForest::to_blocks() const {
    Blocks out;
    for (std::size_t t = 0; t < trees_.size(); ++t)
        for (auto& b : tree_blocks(trees_[t], "tree" + std::to_string(t) + ".", classes_)) out.push_back(std::move(b));
    return out;
}

ConfigMap RandomForest::hyperparameters() const {
    return {{"criterion", "gini"}, {"trees", std::to_string(trees_.size())}, {"max_features", "14"}};
}

std::unique_ptr<RandomForest> RandomForest::from_blocks(const Blocks& blocks, const ConfigMap& config) {
    const int classes = config_int(config, "classes");
    const int n = config_int(config, "trees");
    std::vector<Tree> trees;
    for (int t = 0; t < n; ++t) trees.push_back(tree_from_blocks(blocks, "tree" + std::to_string(t) + ".", classes));
    return std::make_unique<RandomForest>(std::move(trees), classes);
}

// --- Linear models ----------------------------------------------------------

Eigen::MatrixXd LinearModel::scores(const FeatureMatrix& x) const {
    Eigen::MatrixXd s = scaler_.apply(x) * weight_.transpose();
    s.rowwise() += bias_.transpose();
    return s;
}

Eigen::MatrixXd LinearModel::predict_proba(const FeatureMatrix& x) const { return softmax_rows(scores(x)); }

Blocks LinearModel::to_blocks() const {
    return {{"mean", scaler_.mean}, {"scale", scaler_.scale}, {"weight", weight_}, {"bias", bias_}};
}

std::unique_ptr<LinearModel> LinearModel::from_blocks(const Blocks& blocks, const ConfigMap& config) {
    Standardizer s;
    s.mean = find_block(blocks, "mean");
    s.scale = find_block(blocks, "scale");
    const Eigen::MatrixXd& w = find_block(blocks, "weight");
    const Eigen::MatrixXd& b = find_block(blocks, "bias");
    if (w.cols() != s.mean.size() || b.rows() != w.rows() || b.cols() != 1)
        throw Error(ErrorKind::MalformedFile, "linear model blocks have inconsistent shapes");
    ConfigMap params = config;
    params.erase("classes");
    return std::make_unique<LinearModel>(std::move(s), w, b.col(0), std::move(params));
}

std::unique_ptr<LinearModel> fit_svm_sgd(const FeatureMatrix& x, std::span<const int> y, int classes,
                                         std::uint64_t seed, const SvmOptions& options) {
    check_fit_inputs(x, y, classes);
    const Standardizer scaler = Standardizer::fit(x);
    const FeatureMatrix z = scaler.apply(x);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(classes, z.cols());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(classes);

    Rng rng(derive_seed(seed, 0));
    std::vector<std::size_t> order(y.size());
    std::iota(order.begin(), order.end(), 0);
    double t = 1;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (auto i : order) {
            const double eta = options.eta0 / (1 + options.eta0 * options.alpha * t);
            for (int c = 0; c < classes; ++c) {
                const double target = y[i] == c ? 1.0 : -1.0;
                const double margin = target * (w.row(c).dot(z.row(i)) + b[c]);
                w.row(c) *= 1 - eta * options.alpha;
                if (margin < 1) {
                    w.row(c) += eta * target * z.row(i);
                    b[c] += eta * target;
                }
            }
            t += 1;
        }
    }
    ConfigMap params{{"loss", "hinge"},
                     {"alpha", format_double(options.alpha)},
                     {"eta0", format_double(options.eta0)},
                     {"epochs", std::to_string(options.epochs)}};
    return std::make_unique<LinearModel>(scaler, std::move(w), std::move(b), std::move(params));
}

void fit_multinomial(const FeatureMatrix& z, std::span<const int> y, int classes, double c,
                     const LogRegOptions& options, Eigen::MatrixXd& weight, Eigen::VectorXd& bias) {
    const Eigen::Index n = z.rows(), d = z.cols();
    const double reg = 1.0 / (c * n);

    Eigen::MatrixXd onehot = Eigen::MatrixXd::Zero(n, classes);
    for (Eigen::Index i = 0; i < n; ++i) onehot(i, y[i]) = 1;

    // Lipschitz bound of the gradient: 0.5 * lambda_max([z 1]^T [z 1]) / n + reg.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(d + 1).normalized();
    double lambda = 0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd zv = z * v.head(d);
        zv.array() += v[d];
        Eigen::VectorXd next(d + 1);
        next.head(d) = z.transpose() * zv;
        next[d] = zv.sum();
        lambda = next.norm();
        if (lambda == 0) break;
        v = next / lambda;
    }
    const double step = 1.0 / (0.5 * lambda / n + reg);

    auto gradient = [&](const Eigen::MatrixXd& w, const Eigen::VectorXd& b, Eigen::MatrixXd& gw, Eigen::VectorXd& gb) {
        Eigen::MatrixXd s = z * w.transpose();
        s.rowwise() += b.transpose();
        const Eigen::MatrixXd g = (softmax_rows(std::move(s)) - onehot) / static_cast<double>(n);
        gw = g.transpose() * z + reg * w;
        gb = g.colwise().sum().transpose();
    };

    weight = Eigen::MatrixXd::Zero(classes, d);
    bias = Eigen::VectorXd::Zero(classes);
    Eigen::MatrixXd w_prev = weight, gw;
    Eigen::VectorXd b_prev = bias, gb;
    for (int k = 1; k <= options.max_iter; ++k) {
        const double mix = (k - 1.0) / (k + 2.0);
        const Eigen::MatrixXd yw = weight + mix * (weight - w_prev);
        const Eigen::VectorXd yb = bias + mix * (bias - b_prev);
        gradient(yw, yb, gw, gb);
        w_prev = weight;
        b_prev = bias;
        weight = yw - step * gw;
        bias = yb - step * gb;
        if (std::sqrt(gw.squaredNorm() + gb.squaredNorm()) < options.tolerance) break;
    }
}

std::unique_ptr<LinearModel> fit_logreg_cv(const FeatureMatrix& x, std::span<const int> y, int classes,
                                           std::uint64_t seed, const LogRegOptions& options) {
    check_fit_inputs(x, y, classes);
    if (options.grid.empty() || options.folds < 2) throw Error(ErrorKind::InvalidArgument, "bad CV options");

    // Stratified fold assignment: each class is shuffled and dealt round-robin.
    std::vector<int> fold(y.size());
    for (int c = 0; c < classes; ++c) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] == c) members.push_back(i);
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(c)));
        std::shuffle(members.begin(), members.end(), rng);
        for (std::size_t k = 0; k < members.size(); ++k) fold[members[k]] = static_cast<int>(k % options.folds);
    }

    double best_score = -1;
    double best_c = options.grid.front();
    for (double c : options.grid) {
        double total = 0;
        for (int f = 0; f < options.folds; ++f) {
            std::vector<Eigen::Index> tr, va;
            for (std::size_t i = 0; i < y.size(); ++i) (fold[i] == f ? va : tr).push_back(static_cast<Eigen::Index>(i));
            const FeatureMatrix xtr = x(tr, Eigen::all), xva = x(va, Eigen::all);
            std::vector<int> ytr, yva;
            for (auto i : tr) ytr.push_back(y[i]);
            for (auto i : va) yva.push_back(y[i]);
            const Standardizer s = Standardizer::fit(xtr);
            Eigen::MatrixXd w;
            Eigen::VectorXd b;
            fit_multinomial(s.apply(xtr), ytr, classes, c, options, w, b);
            const LinearModel model(s, w, b, {});
            const std::vector<int> pred = model.predict(xva);
            std::size_t hits = 0;
            for (std::size_t i = 0; i < yva.size(); ++i) hits += pred[i] == yva[i];
            total += yva.empty() ? 0.0 : static_cast<double>(hits) / yva.size();
        }
        const double score = total / options.folds;
        if (score > best_score) {
            best_score = score;
            best_c = c;
        }
    }

    const Standardizer scaler = Standardizer::fit(x);
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
    fit_multinomial(scaler.apply(x), y, classes, best_c, options, w, b);
    ConfigMap params{{"C", format_double(best_c)},
                     {"cv_folds", std::to_string(options.folds)},
                     {"cv_accuracy", format_double(best_score)}};
    return std::make_unique<LinearModel>(scaler, std::move(w), std::move(b), std::move(params));
}

}  // namespace deltacharger::shallow
