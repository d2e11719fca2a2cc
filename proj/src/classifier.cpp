#include "deltacharger/classifier.hpp"

#include <charconv>

#include "deltacharger/error.hpp"

namespace deltacharger {

const Eigen::MatrixXd& find_block(const Blocks& blocks, const std::string& name) {
    for (const auto& [key, value] : blocks)
        if (key == name) return value;
    throw Error(ErrorKind::MalformedFile, "missing parameter block '" + name + "'");
}

std::vector<int> argmax_rows(const Eigen::MatrixXd& scores) {
    std::vector<int> out(scores.rows());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        int best = 0;
        for (int c = 1; c < scores.cols(); ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        out[i] = best;
    }
    return out;
}

std::vector<int> Classifier::predict(const FeatureMatrix& x) const { return argmax_rows(predict_proba(x)); }

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::string_view what) {
    double v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
        throw Error(ErrorKind::MalformedFile, "bad number '" + std::string(text) + "' in " + std::string(what));
    return v;
}

int parse_int(std::string_view text, std::string_view what) {
    int v = 0;
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size() || text.empty())
        throw Error(ErrorKind::MalformedFile, "bad integer '" + std::string(text) + "' in " + std::string(what));
    return v;
}

}  // namespace deltacharger
