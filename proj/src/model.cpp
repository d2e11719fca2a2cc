#include "deltacharger/model.hpp"

#include <chrono>

#include "deltacharger/error.hpp"
#include "deltacharger/shallow.hpp"

namespace deltacharger {

std::string_view to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::Cnn: return "cnn";
        case ModelKind::Nn: return "nn";
        case ModelKind::Knn: return "knn";
        case ModelKind::DecisionTree: return "dt";
        case ModelKind::RandomForest: return "rf";
        case ModelKind::SvmSgd: return "svm";
        case ModelKind::LogRegCV: return "logreg";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    for (ModelKind k : kAllModels)
        if (to_string(k) == name) return k;
    throw Error(ErrorKind::InvalidArgument, "unknown model '" + std::string(name) + "'");
}

bool is_deep(ModelKind kind) { return kind == ModelKind::Cnn || kind == ModelKind::Nn; }

Eigen::MatrixXd DeepClassifier::predict_proba(const FeatureMatrix& x) const {
    nn::Network net = net_;
    return nn::softmax(net.forward(x, nn::Mode::Eval));
}

Blocks DeepClassifier::to_blocks() const {
    nn::Network net = net_;
    Blocks out;
    for (const auto& p : net.parameters()) out.emplace_back(p.name, *p.value);
    for (const auto& p : net.buffers()) out.emplace_back(p.name, *p.value);
    return out;
}

Eigen::MatrixXd ModelArtifact::predict_proba(const FeatureMatrix& x) const {
    if (x.cols() != contact::kFeatures) throw Error(ErrorKind::ShapeMismatch, "models take 200 features per sample");
    return model->predict_proba(x);
}

std::vector<int> ModelArtifact::predict(const FeatureMatrix& x) const {
    if (x.cols() != contact::kFeatures) throw Error(ErrorKind::ShapeMismatch, "models take 200 features per sample");
    return model->predict(x);
}

namespace {

ConfigMap train_config_map(const nn::TrainConfig& c) {
    return {{"epochs", std::to_string(c.epochs)},
            {"batch_size", std::to_string(c.batch_size)},
            {"learning_rate", format_double(c.learning_rate)},
            {"momentum", format_double(c.momentum)},
            {"plateau_factor", format_double(c.plateau_factor)},
            {"plateau_patience", std::to_string(c.plateau_patience)},
            {"train_fraction", format_double(c.train_fraction)},
            {"seed", std::to_string(c.seed)}};
}

std::string shallow_spec(ModelKind kind) {
    switch (kind) {
        case ModelKind::Knn: return "knn(k=5,euclidean)";
        case ModelKind::DecisionTree: return "dt(gini,unlimited)";
        case ModelKind::RandomForest: return "rf(trees=100,max_features=14,bootstrap)";
        case ModelKind::SvmSgd: return "svm(ovr,hinge,l2,sgd)";
        case ModelKind::LogRegCV: return "logreg(multinomial,cv=5,C=0.01|0.1|1|10)";
        default: return "";
    }
}

}  // namespace

ModelArtifact ModelArtifact::assemble(ModelKind kind, TaskKind task, int classes, std::string spec, ConfigMap config,
                                      const Blocks& blocks) {
    if (classes != TaskSpec::of(task).classes)
        throw Error(ErrorKind::MalformedFile, "class count does not match task " + std::string(to_string(task)));
    ModelArtifact a;
    a.kind = kind;
    a.task = task;
    a.classes = classes;
    a.spec = std::move(spec);
    a.config = std::move(config);
    ConfigMap with_classes = a.config;
    with_classes["classes"] = std::to_string(classes);

    switch (kind) {
        case ModelKind::Cnn:
        case ModelKind::Nn: {
            nn::Network net(a.spec);
            if (net.output_width() != classes) throw Error(ErrorKind::MalformedFile, "network width differs from task");
            auto load = [&](const std::vector<nn::Parameter>& params) {
                for (const auto& p : params) {
                    const Eigen::MatrixXd& b = find_block(blocks, p.name);
                    if (b.rows() != p.value->rows() || b.cols() != p.value->cols())
                        throw Error(ErrorKind::MalformedFile, "block '" + p.name + "' has the wrong shape");
                    *p.value = b;
                }
            };
            load(net.parameters());
            load(net.buffers());
            a.model = std::make_shared<DeepClassifier>(std::move(net));
            break;
        }
        case ModelKind::Knn: a.model = shallow::Knn::from_blocks(blocks, with_classes); break;
        case ModelKind::DecisionTree: a.model = shallow::DecisionTree::from_blocks(blocks, with_classes); break;
        case ModelKind::RandomForest: a.model = shallow::RandomForest::from_blocks(blocks, with_classes); break;
        case ModelKind::SvmSgd:
        case ModelKind::LogRegCV: a.model = shallow::LinearModel::from_blocks(blocks, with_classes); break;
    }
    if (a.model->classes() != classes) throw Error(ErrorKind::MalformedFile, "model blocks disagree with class count");
    return a;
}

ModelArtifact fit_model(ModelKind kind, const LabeledDataset& train, const LabeledDataset& validation,
                        const nn::TrainConfig& config) {
    const TaskKind task = task_of(train.kind);
    if (validation.kind != train.kind) throw Error(ErrorKind::TaskMismatch, "training and validation tasks differ");
    config.validate();
    const int classes = TaskSpec::of(task).classes;
    const FeatureMatrix x = train.features();
    const std::vector<int> y = train.labels();

    ModelArtifact a;
    a.kind = kind;
    a.task = task;
    a.classes = classes;
    const auto start = std::chrono::steady_clock::now();
    if (is_deep(kind)) {
        a.spec = kind == ModelKind::Cnn ? nn::cnn_spec(classes) : nn::regular_nn_spec(classes);
        nn::Network net(a.spec);
        const std::vector<int> yv = validation.labels();
        a.history = nn::train_network(net, x, y, validation.features(), yv, config);
        a.model = std::make_shared<DeepClassifier>(std::move(net));
        a.config = train_config_map(config);
    } else {
        a.spec = shallow_spec(kind);
        std::shared_ptr<Classifier> m;
        switch (kind) {
            case ModelKind::Knn: m = std::make_shared<shallow::Knn>(x, y, classes, 5); break;
            case ModelKind::DecisionTree: m = shallow::DecisionTree::fit(x, y, classes); break;
            case ModelKind::RandomForest: m = shallow::RandomForest::fit(x, y, classes, config.seed); break;
            case ModelKind::SvmSgd: m = shallow::fit_svm_sgd(x, y, classes, config.seed); break;
            case ModelKind::LogRegCV: m = shallow::fit_logreg_cv(x, y, classes, config.seed); break;
            default: break;
        }
        a.config = m->hyperparameters();
        a.config["seed"] = std::to_string(config.seed);
        a.model = std::move(m);
    }
    a.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return a;
}

EvalReport evaluate(const ModelArtifact& model, const LabeledDataset& data, int repetitions) {
    const TaskKind task = task_of(data.kind);
    if (task != model.task)
        throw Error(ErrorKind::TaskMismatch, "model predicts " + std::string(to_string(model.task)) + " but data is " +
                                                 std::string(to_string(task)));
    if (repetitions < 1) throw Error(ErrorKind::InvalidArgument, "at least one timing repetition required");

    EvalReport r;
    r.task = task;
    r.model = model.kind;
    r.samples = data.size();
    r.train_seconds = model.train_seconds;
    r.confusion = Eigen::MatrixXi::Zero(model.classes, model.classes);
    if (data.samples.empty()) return r;

    const FeatureMatrix x = data.features();
    std::vector<int> pred;
    double total_ms = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
        const auto start = std::chrono::steady_clock::now();
        pred = model.predict(x);
        total_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
    r.ms_per_sample = total_ms / (repetitions * static_cast<double>(data.size()));
    for (std::size_t i = 0; i < data.size(); ++i) r.confusion(data.samples[i].label, pred[i]) += 1;
    r.accuracy = static_cast<double>(r.confusion.trace()) / data.size();
    return r;
}

}  // namespace deltacharger
