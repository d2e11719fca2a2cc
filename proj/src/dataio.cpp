#include "deltacharger/dataio.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "deltacharger/error.hpp"

namespace deltacharger::dataio {

namespace {

class LineReader {
public:
    LineReader(std::string_view text, std::string source) : text_(text), source_(std::move(source)) {}

    bool next(std::string_view& line) {
        if (pos_ >= text_.size()) return false;
        const std::size_t end = text_.find('\n', pos_);
        if (end == std::string_view::npos) {
            line = text_.substr(pos_);
            pos_ = text_.size();
            unterminated_ = true;
        } else {
            line = text_.substr(pos_, end - pos_);
            pos_ = end + 1;
        }
        ++line_no_;
        return true;
    }

    std::string_view require(const std::string& section) {
        std::string_view line;
        if (!next(line)) fail("unexpected end of file, missing " + section);
        return line;
    }

    [[noreturn]] void fail(const std::string& message) const {
        throw Error(ErrorKind::MalformedFile, source_ + ":" + std::to_string(line_no_) + ": " + message);
    }

    std::string where() const { return source_ + ":" + std::to_string(line_no_); }
    int line() const { return line_no_; }
    // last line read ran into end of file without a newline
    bool cut_short() const { return unterminated_; }

private:
    std::string_view text_;
    std::string source_;
    std::size_t pos_ = 0;
    int line_no_ = 0;
    bool unterminated_ = false;
};

std::vector<std::string_view> split_fields(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t end = line.find(sep, start);
        out.push_back(line.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start));
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
    return out;
}

void append_fixed(std::string& out, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", quantize(v));
    out += buf;
}

/// "key,value" where value may itself contain commas.
std::string_view keyed(LineReader& in, const std::string& key) {
    const std::string_view line = in.require("'" + key + "' line");
    if (line.substr(0, key.size() + 1) != key + ",") in.fail("expected '" + key + ",...'");
    return line.substr(key.size() + 1);
}

}  // namespace

std::string checksum(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

// --- DTAC -------------------------------------------------------------------

std::string format_dataset(const LabeledDataset& data) {
    std::string out = "dtac,1," + std::string(to_string(data.kind)) + "," + std::to_string(data.size()) + "," +
                      std::to_string(data.seed) + "\n";
    out.reserve(data.size() * 200 * 9);
    for (const auto& s : data.samples) {
        append_fixed(out, s.truth.phi_deg);
        out += ',';
        append_fixed(out, s.truth.dx_mm);
        out += ',';
        append_fixed(out, s.truth.dy_mm);
        out += ',';
        out += std::to_string(s.label);
        for (int i = 0; i < contact::kFeatures; ++i) {
            out += ',';
            append_fixed(out, s.features[i]);
        }
        out += '\n';
    }
    return out;
}

LabeledDataset parse_dataset(std::string_view text, const std::string& source) {
    LineReader in(text, source);
    const auto header = split_fields(in.require("header"));
    if (header.size() != 5 || header[0] != "dtac") in.fail("missing 'dtac' header");
    if (header[1] != "1") in.fail("unsupported DTAC version '" + std::string(header[1]) + "'");

    LabeledDataset data;
    try {
        data.kind = parse_dataset_kind(header[2]);
    } catch (const Error&) {
        in.fail("unknown task '" + std::string(header[2]) + "'");
    }
    const int count = parse_int(header[3], in.where() + " sample count");
    if (count < 0) in.fail("negative sample count");
    std::uint64_t seed = 0;
    {
        const auto res = std::from_chars(header[4].data(), header[4].data() + header[4].size(), seed);
        if (res.ec != std::errc() || res.ptr != header[4].data() + header[4].size()) in.fail("bad seed");
    }
    data.seed = seed;
    const int classes = class_count(data.kind);

    data.samples.reserve(count);
    for (int row = 0; row < count; ++row) {
        std::string_view line;
        if (!in.next(line) || line.empty())
            in.fail("truncated sample section: expected " + std::to_string(count) + " samples, found " +
                    std::to_string(row));
        auto parse_row = [&] {
            const auto f = split_fields(line);
            if (f.size() != 4 + contact::kFeatures)
                in.fail("expected " + std::to_string(4 + contact::kFeatures) + " fields, found " +
                        std::to_string(f.size()));
            Sample s;
            const std::string where = in.where();
            s.truth.phi_deg = parse_double(f[0], where);
            s.truth.dx_mm = parse_double(f[1], where);
            s.truth.dy_mm = parse_double(f[2], where);
            s.label = parse_int(f[3], where);
            if (s.label < 0 || s.label >= classes) in.fail("label " + std::to_string(s.label) + " out of range");
            for (int i = 0; i < contact::kFeatures; ++i) {
                const double v = parse_double(f[4 + i], where);
                if (!(v >= 0 && v <= 9)) in.fail("force value outside [0, 9] N in column " + std::to_string(5 + i));
                s.features[i] = v;
            }
            return s;
        };
        Sample s;
        try {
            s = parse_row();
        } catch (const Error& e) {
            // an unterminated last row that fails to parse is a cut file
            if (!in.cut_short()) throw;
            in.fail("truncated sample section: sample " + std::to_string(row + 1) + " of " + std::to_string(count) +
                    " cut short (" + e.what() + ")");
        }
        data.samples.push_back(std::move(s));
    }
    std::string_view extra;
    while (in.next(extra))
        if (!extra.empty()) in.fail("trailing data after " + std::to_string(count) + " samples");
    return data;
}

std::string protocol_of(DatasetKind kind) {
    return kind == DatasetKind::Angle ? "angle-tilt-0to5deg-v1" : "position-grid-5x5-v1";
}

std::string DatasetManifest::to_json() const {
    nlohmann::ordered_json j;
    j["format"] = format;
    j["version"] = version;
    j["task"] = std::string(to_string(kind));
    j["count"] = count;
    j["protocol"] = protocol;
    j["seed"] = seed;
    j["split"] = {{"train", train_fraction}, {"validation", 1.0 - train_fraction}};
    j["checksum"] = {{"algorithm", "fnv1a64"}, {"value", checksum}};
    return j.dump(2) + "\n";
}

DatasetManifest DatasetManifest::from_json(std::string_view text, const std::string& source) {
    try {
        const auto j = nlohmann::json::parse(text);
        DatasetManifest m;
        m.format = j.at("format").get<std::string>();
        m.version = j.at("version").get<int>();
        m.kind = parse_dataset_kind(j.at("task").get<std::string>());
        m.count = j.at("count").get<std::size_t>();
        m.protocol = j.at("protocol").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.train_fraction = j.at("split").at("train").get<double>();
        m.checksum = j.at("checksum").at("value").get<std::string>();
        if (m.format != "dtac" || m.version != 1) throw Error(ErrorKind::MalformedFile, "not a DTAC v1 manifest");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::MalformedFile, source + ": " + e.what());
    } catch (const Error& e) {
        throw Error(ErrorKind::MalformedFile, source + ": " + e.what());
    }
}

DatasetManifest make_manifest(const LabeledDataset& data, std::string_view file_bytes, double train_fraction) {
    DatasetManifest m;
    m.kind = data.kind;
    m.count = data.size();
    m.protocol = protocol_of(data.kind);
    m.seed = data.seed;
    m.train_fraction = train_fraction;
    m.checksum = checksum(file_bytes);
    return m;
}

std::filesystem::path manifest_path(const std::filesystem::path& dataset) {
    return dataset.string() + ".manifest.json";
}

DatasetManifest write_dataset(const LabeledDataset& data, const std::filesystem::path& path, double train_fraction) {
    const std::string bytes = format_dataset(data);
    const DatasetManifest m = make_manifest(data, bytes, train_fraction);
    write_file(path, bytes);
    write_file(manifest_path(path), m.to_json());
    return m;
}

LabeledDataset read_dataset(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    LabeledDataset data = parse_dataset(bytes, path.string());
    const auto mpath = manifest_path(path);
    if (std::filesystem::exists(mpath)) {
        const DatasetManifest m = DatasetManifest::from_json(read_file(mpath), mpath.string());
        if (m.kind != data.kind || m.count != data.size())
            throw Error(ErrorKind::MalformedFile, mpath.string() + ": task/count disagree with " + path.string());
        const std::string actual = checksum(bytes);
        if (m.checksum != actual)
            throw Error(ErrorKind::MalformedFile, mpath.string() + ": checksum mismatch (manifest " + m.checksum +
                                                      ", file " + actual + ")");
    }
    return data;
}

// --- DMOD -------------------------------------------------------------------

std::string format_model(const ModelArtifact& model) {
    std::string out = "dmod,1\n";
    out += "task," + std::string(to_string(model.task)) + "\n";
    out += "model," + std::string(to_string(model.kind)) + "\n";
    out += "classes," + std::to_string(model.classes) + "\n";
    out += "spec," + model.spec + "\n";
    out += "config,";
    bool first = true;
    for (const auto& [k, v] : model.config) {
        if (k.find_first_of(";=\n") != std::string::npos || v.find_first_of(";=\n") != std::string::npos)
            throw Error(ErrorKind::InvalidArgument, "config entry '" + k + "' cannot be serialized");
        out += (first ? "" : ";") + k + "=" + v;
        first = false;
    }
    out += "\n";
    const Blocks blocks = model.blocks();
    out += "blocks," + std::to_string(blocks.size()) + "\n";
    for (const auto& [name, m] : blocks) {
        out += "block," + name + "," + std::to_string(m.rows()) + "," + std::to_string(m.cols()) + "\n";
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                if (r || c) out += ',';
                out += format_double(m(r, c));
            }
        out += "\n";
    }
    out += "end\n";
    return out;
}

ModelArtifact parse_model(std::string_view text, const std::string& source) {
    LineReader in(text, source);
    if (in.require("header") != "dmod,1") in.fail("missing 'dmod,1' header");

    TaskKind task{};
    ModelKind kind{};
    try {
        task = parse_task(keyed(in, "task"));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::MalformedFile) throw;
        in.fail(e.what());
    }
    try {
        kind = parse_model_kind(keyed(in, "model"));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::MalformedFile) throw;
        in.fail(e.what());
    }
    const int classes = parse_int(keyed(in, "classes"), in.where());
    const std::string spec(keyed(in, "spec"));

    ConfigMap config;
    const std::string_view cfg = keyed(in, "config");
    if (!cfg.empty())
        for (auto item : split_fields(cfg, ';')) {
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) in.fail("config entry without '='");
            config.emplace(std::string(item.substr(0, eq)), std::string(item.substr(eq + 1)));
        }

    const int n_blocks = parse_int(keyed(in, "blocks"), in.where());
    if (n_blocks < 0) in.fail("negative block count");
    Blocks blocks;
    for (int b = 0; b < n_blocks; ++b) {
        const std::string section = "block " + std::to_string(b + 1) + " of " + std::to_string(n_blocks);
        const auto head = split_fields(in.require(section + " header"));
        if (head.size() != 4 || head[0] != "block") in.fail("expected 'block,<name>,<rows>,<cols>' for " + section);
        const int rows = parse_int(head[2], in.where());
        const int cols = parse_int(head[3], in.where());
        if (rows < 0 || cols < 0) in.fail("negative block shape");
        const std::string_view body = in.require(section + " values");
        const auto values = body.empty() ? std::vector<std::string_view>{} : split_fields(body);
        if (values.size() != static_cast<std::size_t>(rows) * cols)
            in.fail("block '" + std::string(head[1]) + "' declares " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " but holds " + std::to_string(values.size()) + " values");
        Eigen::MatrixXd m(rows, cols);
        const std::string where = in.where();
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = parse_double(values[r * cols + c], where);
        blocks.emplace_back(std::string(head[1]), std::move(m));
    }
    if (in.require("'end' marker") != "end") in.fail("expected 'end'");

    try {
        return ModelArtifact::assemble(kind, task, classes, spec, std::move(config), blocks);
    } catch (const Error& e) {
        throw Error(ErrorKind::MalformedFile, source + ": " + e.what());
    }
}

void write_model(const ModelArtifact& model, const std::filesystem::path& path) {
    write_file(path, format_model(model));
}

ModelArtifact read_model(const std::filesystem::path& path) { return parse_model(read_file(path), path.string()); }

}  // namespace deltacharger::dataio
