#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "deltacharger/config.hpp"
#include "deltacharger/dataio.hpp"
#include "deltacharger/error.hpp"
#include "deltacharger/rng.hpp"

namespace deltacharger::cli {

namespace fs = std::filesystem;

namespace {

int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Io: return kIoError;
        case ErrorKind::InvalidArgument: return kUsage;
        case ErrorKind::MalformedFile:
        case ErrorKind::TaskMismatch:
        case ErrorKind::Degenerate:
        case ErrorKind::ShapeMismatch:
        case ErrorKind::OutOfRange: return kDataError;
        default: return kFailure;
    }
}

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void echo_config(std::ostream& out, const GlobalConfig& config) {
    out << "\n```config\n" << config.to_json() << "\n```\n";
}

GlobalConfig load_config(const std::string& path) {
    GlobalConfig c = path.empty() ? GlobalConfig{} : GlobalConfig::load(path);
    c.validate();
    return c;
}

/// "model.dmod" + "vertical" -> "model.vertical.dmod"
fs::path with_task_suffix(const fs::path& path, TaskKind task) {
    fs::path p = path;
    const std::string ext = p.extension().string();
    p.replace_extension();
    return p.string() + "." + std::string(to_string(task)) + (ext.empty() ? ".dmod" : ext);
}

std::vector<TaskKind> tasks_for(const LabeledDataset& data, const std::string& requested) {
    if (requested.empty() || requested == "position") {
        if (data.kind == DatasetKind::Position) return {TaskKind::Vertical, TaskKind::Horizontal};
        if (!requested.empty()) throw Error(ErrorKind::TaskMismatch, "data holds " + std::string(to_string(data.kind)) + " labels, not position");
        return {task_of(data.kind)};
    }
    return {parse_task(requested)};
}

struct ReportRow {
    EvalReport report;
    std::size_t train_size = 0;
};

void print_table(std::ostream& out, const std::vector<ReportRow>& rows, const std::string& format) {
    if (format == "csv") {
        out << "task,model,train_samples,validation_samples,accuracy,ms_per_sample*,train_seconds*\n";
        for (const auto& r : rows)
            out << to_string(r.report.task) << "," << to_string(r.report.model) << "," << r.train_size << ","
                << r.report.samples << "," << fmt("%.4f", r.report.accuracy) << ","
                << fmt("%.4g", r.report.ms_per_sample) << "," << fmt("%.4g", r.report.train_seconds) << "\n";
    } else {
        out << "| task       | model  | train | val | accuracy | ms/sample* | train s* |\n";
        out << "|------------|--------|-------|-----|----------|------------|----------|\n";
        for (const auto& r : rows) {
            char line[160];
            std::snprintf(line, sizeof line, "| %-10s | %-6s | %5zu | %3zu | %8.4f | %10.4g | %8.4g |\n",
                          std::string(to_string(r.report.task)).c_str(), std::string(to_string(r.report.model)).c_str(),
                          r.train_size, r.report.samples, r.report.accuracy, r.report.ms_per_sample,
                          r.report.train_seconds);
            out << line;
        }
    }
    out << "* wall-clock timing, not reproducible across runs\n";
}

void print_confusion(std::ostream& out, const EvalReport& r) {
    out << "confusion (" << to_string(r.model) << ", " << to_string(r.task) << "; rows = truth, cols = predicted)\n";
    for (Eigen::Index i = 0; i < r.confusion.rows(); ++i) {
        out << "  " << i << ":";
        for (Eigen::Index j = 0; j < r.confusion.cols(); ++j) out << " " << fmt("%4.0f", r.confusion(i, j));
        out << "\n";
    }
}

// --- gen --------------------------------------------------------------------

struct GenArgs {
    std::string task, out, config;
    std::uint64_t seed = 42;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
    const GlobalConfig config = load_config(a.config);
    const LabeledDataset data = a.task == "angle" ? generate_angle_dataset(a.seed, config.generation)
                                                  : generate_position_dataset(a.seed, config.generation);
    const auto manifest = dataio::write_dataset(data, a.out, config.train.train_fraction);
    out << "dataset   " << to_string(data.kind) << " (" << manifest.protocol << ")\n";
    out << "samples   " << data.size() << "\n";
    out << "seed      " << a.seed << "\n";
    out << "file      " << a.out << "\n";
    out << "manifest  " << dataio::manifest_path(a.out).string() << "\n";
    out << "checksum  fnv1a64 " << manifest.checksum << "\n";
    out << "classes  ";
    for (int c : data.class_counts()) out << " " << c;
    out << "\n";
    echo_config(out, config);
    return kOk;
}

// --- train / bench ----------------------------------------------------------

struct TrainArgs {
    std::string model, task, data, out, config, format = "table";
    std::uint64_t seed = 42;
    int epochs = 0;
};

GlobalConfig training_config(const TrainArgs& a) {
    GlobalConfig config = load_config(a.config);
    config.train.seed = a.seed;
    if (a.epochs > 0) config.train.epochs = a.epochs;
    config.validate();
    return config;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
    const GlobalConfig config = training_config(a);
    const LabeledDataset data = dataio::read_dataset(a.data);
    const auto tasks = tasks_for(data, a.task);
    const auto [train_all, val_all] = split(data, config.train.train_fraction, a.seed);
    const ModelKind kind = parse_model_kind(a.model);

    std::vector<ReportRow> rows;
    std::vector<std::string> written;
    for (TaskKind task : tasks) {
        const LabeledDataset tr = relabel(train_all, task), va = relabel(val_all, task);
        const ModelArtifact m = fit_model(kind, tr, va, config.train);
        const fs::path path = tasks.size() > 1 ? with_task_suffix(a.out, task) : fs::path(a.out);
        dataio::write_model(m, path);
        written.push_back(path.string());
        rows.push_back({evaluate(m, va), tr.size()});
    }
    print_table(out, rows, a.format);
    if (a.format != "csv")
        for (const auto& r : rows) print_confusion(out, r.report);
    for (const auto& w : written) out << "model written to " << w << "\n";
    echo_config(out, config);
    return kOk;
}

int cmd_bench(const TrainArgs& a, std::ostream& out) {
    const GlobalConfig config = training_config(a);
    const LabeledDataset data = dataio::read_dataset(a.data);
    const auto tasks = tasks_for(data, a.task);
    const auto [train_all, val_all] = split(data, config.train.train_fraction, a.seed);

    std::vector<ReportRow> rows;
    for (TaskKind task : tasks) {
        const LabeledDataset tr = relabel(train_all, task), va = relabel(val_all, task);
        std::vector<ReportRow> block;
        for (ModelKind kind : kAllModels) block.push_back({evaluate(fit_model(kind, tr, va, config.train), va), tr.size()});
        std::stable_sort(block.begin(), block.end(),
                         [](const ReportRow& x, const ReportRow& y) { return x.report.accuracy > y.report.accuracy; });
        rows.insert(rows.end(), block.begin(), block.end());
    }
    print_table(out, rows, a.format);
    echo_config(out, config);
    return kOk;
}

// --- dock -------------------------------------------------------------------

struct DockArgs {
    int episodes = 100;
    std::uint64_t seed = 42;
    std::string models, trace, config;
    bool oracle = false;
    std::vector<double> phi, error;
};

int cmd_dock(const DockArgs& a, std::ostream& out) {
    const GlobalConfig config = load_config(a.config);
    if (a.episodes < 1) throw Error(ErrorKind::InvalidArgument, "--episodes must be positive");
    std::unique_ptr<dock::Perception> perception;
    if (a.oracle) {
        perception = std::make_unique<dock::OraclePerception>();
    } else {
        if (a.models.empty()) throw Error(ErrorKind::InvalidArgument, "--models DIR or --oracle is required");
        const fs::path dir = a.models;
        perception = std::make_unique<dock::ModelPerception>(dataio::read_model(dir / "angle.dmod"),
                                                             dataio::read_model(dir / "vertical.dmod"),
                                                             dataio::read_model(dir / "horizontal.dmod"));
    }

    std::map<dock::Outcome, int> histogram;
    std::string traces;
    int max_transitions = 0;
    for (int i = 0; i < a.episodes; ++i) {
        dock::Scenario sc = dock::random_scenario(derive_seed(a.seed, 2 * i), config.dock);
        if (!a.phi.empty()) sc.phi_deg = a.phi[0];
        if (!a.error.empty()) sc.vision_error = dock::Pose(a.error[0], a.error[1], a.error[2]);
        const auto ep = dock::run_episode(sc, *perception, derive_seed(a.seed, 2 * i + 1), config.dock,
                                          config.generation.plan);
        histogram[ep.outcome]++;
        max_transitions = std::max(max_transitions, static_cast<int>(ep.trace.size()));
        traces += dock::format_trace(ep, i);
    }

    out << "episodes  " << a.episodes << " (" << (a.oracle ? "oracle" : "model") << " perception)\n";
    for (auto o : {dock::Outcome::Charged, dock::Outcome::FailedAngle, dock::Outcome::FailedNoContact,
                   dock::Outcome::FailedLoopLimit}) {
        char line[96];
        std::snprintf(line, sizeof line, "%-16s %5d\n", std::string(dock::to_string(o)).c_str(), histogram[o]);
        out << line;
    }
    out << "max transitions " << max_transitions << " (bound " << dock::transition_bound(config.dock) << ")\n";
    if (a.trace.empty()) {
        out << "\n" << traces;
    } else {
        dataio::write_file(a.trace, traces);
        out << "traces written to " << a.trace << "\n";
    }
    echo_config(out, config);
    return kOk;
}

// --- render -----------------------------------------------------------------

struct RenderArgs {
    std::vector<double> state;
    std::string out, config;
    std::uint64_t seed = 42;
    double dz = std::nan("");
    bool noiseless = false;
    int scale = 16;
};

std::string pgm(const contact::Grid& g, int scale, double max_n) {
    const int side = contact::kGridSide * scale;
    std::string img = "P5\n" + std::to_string(side) + " " + std::to_string(side) + "\n255\n";
    for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
            const double f = std::clamp(g(y / scale, x / scale) / max_n, 0.0, 1.0);
            img += static_cast<char>(static_cast<unsigned char>(std::lround(255 * f)));
        }
    return img;
}

int cmd_render(const RenderArgs& a, std::ostream& out) {
    const GlobalConfig config = load_config(a.config);
    if (a.scale < 1 || a.scale > 64) throw Error(ErrorKind::InvalidArgument, "--scale must lie in [1, 64]");
    const auto& plan = config.generation.plan;
    const contact::MisalignmentState state{a.state[0], a.state[1], a.state[2],
                                           std::isnan(a.dz) ? plan.nominal_penetration_mm : a.dz};
    state.validate();
    const contact::TactileFrame frame =
        a.noiseless ? contact::render_frame_noiseless(plan, state) : contact::render_frame(plan, state, a.seed);

    const std::string names[2] = {a.out + "_A.pgm", a.out + "_B.pgm"};
    for (int s = 0; s < contact::kSensors; ++s) dataio::write_file(names[s], pgm(frame.sensors[s], a.scale, plan.noise.max_n));

    static const char* shades = " .:-=+*#%@";
    out << "state phi=" << format_double(state.phi_deg) << " dx=" << format_double(state.dx_mm)
        << " dy=" << format_double(state.dy_mm) << " dz=" << format_double(state.dz_mm)
        << (a.noiseless ? " (noiseless)" : " seed=" + std::to_string(a.seed)) << "\n";
    out << "verdict " << contact::to_string(contact::short_circuit_oracle(plan, state)) << "\n";
    out << "sensor A     sensor B\n";
    for (int r = 0; r < contact::kGridSide; ++r) {
        for (int s = 0; s < contact::kSensors; ++s) {
            out << '|';
            for (int c = 0; c < contact::kGridSide; ++c) {
                const double f = frame.sensors[s](r, c);
                out << shades[std::clamp(static_cast<int>(std::lround(f)), 0, 9)];
            }
            out << (s == 0 ? "|  " : "|\n");
        }
    }
    for (int s = 0; s < contact::kSensors; ++s) {
        const auto c = contact::centroid(frame, s);
        out << "centroid " << (s == 0 ? 'A' : 'B') << " "
            << (c ? "row " + fmt("%.3f", c->x()) + " col " + fmt("%.3f", c->y()) : std::string("none")) << "\n";
    }
    out << "images " << names[0] << " " << names[1] << " (black = 0 N, white = " << format_double(plan.noise.max_n)
        << " N)\n";
    echo_config(out, config);
    return kOk;
}

// --- report -----------------------------------------------------------------

struct ReportArgs {
    std::string trace, config;
};

int cmd_report(const ReportArgs& a, std::ostream& out) {
    const GlobalConfig config = load_config(a.config);
    const auto episodes = dock::parse_traces(dataio::read_file(a.trace), a.trace);
    std::map<dock::Outcome, int> histogram;
    std::map<std::string, int> visits;
    int max_t = 0;
    double total_t = 0;
    for (const auto& e : episodes) {
        histogram[e.outcome]++;
        max_t = std::max(max_t, e.transitions);
        total_t += e.transitions;
        for (const auto& p : e.phases) visits[p]++;
    }
    out << "episodes " << episodes.size() << "\n";
    for (auto o : {dock::Outcome::Charged, dock::Outcome::FailedAngle, dock::Outcome::FailedNoContact,
                   dock::Outcome::FailedLoopLimit}) {
        char line[96];
        std::snprintf(line, sizeof line, "%-16s %5d\n", std::string(dock::to_string(o)).c_str(), histogram[o]);
        out << line;
    }
    out << "transitions mean " << fmt("%.2f", episodes.empty() ? 0.0 : total_t / episodes.size()) << " max " << max_t
        << "\n";
    out << "phase visits\n";
    for (const auto& [p, n] : visits) out << "  " << p << " " << n << "\n";
    echo_config(out, config);
    return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Delta charger docking simulator: data generation, training, benchmarking, docking, rendering"};
    app.name("deltacharger");
    app.require_subcommand(1);

    GenArgs gen;
    auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic tactile dataset (DTAC v1 + manifest)");
    gen_cmd->add_option("--task", gen.task, "angle | position")->required()->check(CLI::IsMember({"angle", "position"}));
    gen_cmd->add_option("--seed", gen.seed, "generation seed");
    gen_cmd->add_option("--out", gen.out, "output dataset path")->required();
    gen_cmd->add_option("--config", gen.config, "JSON config file");

    const std::vector<std::string> model_names{"cnn", "nn", "knn", "dt", "rf", "svm", "logreg"};
    const std::vector<std::string> task_names{"angle", "vertical", "horizontal", "position"};
    TrainArgs train;
    auto* train_cmd = app.add_subcommand("train", "train one model and write a DMOD v1 file");
    train_cmd->add_option("--model", train.model, "cnn | nn | knn | dt | rf | svm | logreg")
        ->required()
        ->check(CLI::IsMember(model_names));
    train_cmd->add_option("--task", train.task, "angle | vertical | horizontal | position")->check(CLI::IsMember(task_names));
    train_cmd->add_option("--data", train.data, "DTAC dataset")->required();
    train_cmd->add_option("--seed", train.seed, "split and training seed");
    train_cmd->add_option("--out", train.out, "output model path")->required();
    train_cmd->add_option("--epochs", train.epochs, "override deep-model epochs");
    train_cmd->add_option("--format", train.format, "table | csv")->check(CLI::IsMember({"table", "csv"}));
    train_cmd->add_option("--config", train.config, "JSON config file");

    TrainArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "train all seven models and print one comparison table");
    bench_cmd->add_option("--data", bench.data, "DTAC dataset")->required();
    bench_cmd->add_option("--task", bench.task, "angle | vertical | horizontal | position")->check(CLI::IsMember(task_names));
    bench_cmd->add_option("--seed", bench.seed, "split and training seed");
    bench_cmd->add_option("--epochs", bench.epochs, "override deep-model epochs");
    bench_cmd->add_option("--format", bench.format, "table | csv")->check(CLI::IsMember({"table", "csv"}));
    bench_cmd->add_option("--config", bench.config, "JSON config file");

    DockArgs dock_args;
    auto* dock_cmd = app.add_subcommand("dock", "run docking episodes and print outcomes and traces");
    dock_cmd->add_option("--episodes", dock_args.episodes, "number of episodes");
    dock_cmd->add_option("--seed", dock_args.seed, "episode seed");
    dock_cmd->add_option("--models", dock_args.models, "directory with angle.dmod, vertical.dmod, horizontal.dmod");
    dock_cmd->add_flag("--oracle", dock_args.oracle, "use ground-truth perception instead of models");
    dock_cmd->add_option("--phi", dock_args.phi, "fixed tilt in degrees for every episode")->expected(1);
    dock_cmd->add_option("--error", dock_args.error, "fixed vision error x,y,z in mm")->delimiter(',')->expected(3);
    dock_cmd->add_option("--trace", dock_args.trace, "write traces here instead of stdout");
    dock_cmd->add_option("--config", dock_args.config, "JSON config file");

    RenderArgs render;
    auto* render_cmd = app.add_subcommand("render", "render a tactile frame pair as PGM images and ASCII");
    render_cmd->add_option("--state", render.state, "phi,dx,dy (deg, mm, mm)")->required()->delimiter(',')->expected(3);
    render_cmd->add_option("--out", render.out, "output prefix; writes <out>_A.pgm and <out>_B.pgm")->required();
    render_cmd->add_option("--dz", render.dz, "penetration in mm (default nominal)");
    render_cmd->add_option("--seed", render.seed, "noise seed");
    render_cmd->add_flag("--noiseless", render.noiseless, "disable all noise");
    render_cmd->add_option("--scale", render.scale, "pixels per taxel");
    render_cmd->add_option("--config", render.config, "JSON config file");

    ReportArgs report;
    auto* report_cmd = app.add_subcommand("report", "summarize a docking trace log");
    report_cmd->add_option("--trace", report.trace, "trace log written by dock")->required();
    report_cmd->add_option("--config", report.config, "JSON config file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (gen_cmd->parsed()) return cmd_gen(gen, out);
        if (train_cmd->parsed()) return cmd_train(train, out);
        if (bench_cmd->parsed()) return cmd_bench(bench, out);
        if (dock_cmd->parsed()) return cmd_dock(dock_args, out);
        if (render_cmd->parsed()) return cmd_render(render, out);
        if (report_cmd->parsed()) return cmd_report(report, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return exit_code_for(e.kind());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

}  // namespace deltacharger::cli
