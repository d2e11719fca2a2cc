#include "deltacharger/network.hpp"

#include <regex>
#include <sstream>

#include "deltacharger/error.hpp"

namespace deltacharger::nn {

std::string regular_nn_spec(int classes) {
    return "in(200,1,1) dense(200,128) bn(128) relu dense(128,64) bn(64) relu dense(64," + std::to_string(classes) +
           ")";
}

std::string cnn_spec(int classes) {
    return "in(2,10,10) conv3x3(2,16) bn(16) relu conv3x3(16,32) bn(32) relu flatten dense(1152,128) bn(128) relu "
           "dense(128,64) bn(64) relu dense(64," +
           std::to_string(classes) + ")";
}

namespace {

struct Token {
    std::string name;
    std::vector<int> args;
};

Token parse_token(const std::string& text) {
    static const std::regex pattern(R"(([a-z0-9]+)(?:\(([0-9, ]*)\))?)");
    std::smatch m;
    if (!std::regex_match(text, m, pattern)) throw Error(ErrorKind::InvalidArgument, "bad layer token '" + text + "'");
    Token tok{m[1], {}};
    if (m[2].matched) {
        std::stringstream ss(m[2]);
        std::string item;
        while (std::getline(ss, item, ',')) {
            try {
                tok.args.push_back(std::stoi(item));
            } catch (const std::exception&) {
                throw Error(ErrorKind::InvalidArgument, "bad layer argument in '" + text + "'");
            }
        }
    }
    return tok;
}

void expect_args(const Token& tok, std::size_t n) {
    if (tok.args.size() != n)
        throw Error(ErrorKind::InvalidArgument,
                    tok.name + " takes " + std::to_string(n) + " arguments, got " + std::to_string(tok.args.size()));
}

}  // namespace

Network::Network(const std::string& spec) : spec_(spec) {
    std::istringstream in(spec);
    std::string word;
    if (!(in >> word)) throw Error(ErrorKind::InvalidArgument, "empty network spec");
    const Token head = parse_token(word);
    if (head.name != "in") throw Error(ErrorKind::InvalidArgument, "network spec must start with in(c,h,w)");
    expect_args(head, 3);
    input_ = {head.args[0], head.args[1], head.args[2]};
    if (input_.size() <= 0) throw Error(ErrorKind::ShapeMismatch, "input shape must be positive");

    Shape cur = input_;
    while (in >> word) {
        const Token tok = parse_token(word);
        std::unique_ptr<Layer> layer;
        if (tok.name == "dense") {
            expect_args(tok, 2);
            if (!cur.flat() || cur.channels != tok.args[0])
                throw Error(ErrorKind::ShapeMismatch, word + " does not accept " + std::to_string(cur.size()) +
                                                          " inputs (flat=" + (cur.flat() ? "yes" : "no") + ")");
            layer = std::make_unique<Dense>(tok.args[0], tok.args[1]);
        } else if (tok.name == "conv3x3") {
            expect_args(tok, 2);
            if (cur.channels != tok.args[0] || cur.flat())
                throw Error(ErrorKind::ShapeMismatch, word + " does not match input channels " +
                                                          std::to_string(cur.channels));
            layer = std::make_unique<Conv3x3>(tok.args[0], tok.args[1], cur.height, cur.width);
        } else if (tok.name == "bn") {
            expect_args(tok, 1);
            if (cur.channels != tok.args[0])
                throw Error(ErrorKind::ShapeMismatch, word + " does not match " + std::to_string(cur.channels) +
                                                          " channels");
            layer = std::make_unique<BatchNorm>(cur);
        } else if (tok.name == "relu") {
            expect_args(tok, 0);
            layer = std::make_unique<ReLU>(cur);
        } else if (tok.name == "flatten") {
            expect_args(tok, 0);
            layer = std::make_unique<Flatten>(cur);
        } else {
            throw Error(ErrorKind::InvalidArgument, "unknown layer '" + tok.name + "'");
        }
        cur = layer->output_shape();
        layers_.push_back(std::move(layer));
    }
    if (layers_.empty()) throw Error(ErrorKind::InvalidArgument, "network has no layers");
    if (!cur.flat()) throw Error(ErrorKind::ShapeMismatch, "network output must be flat");
}

Network::Network(const Network& other) : spec_(other.spec_), input_(other.input_) {
    for (const auto& l : other.layers_) layers_.push_back(l->clone());
}

Network& Network::operator=(const Network& other) {
    if (this != &other) {
        Network copy(other);
        *this = std::move(copy);
    }
    return *this;
}

int Network::output_width() const { return layers_.empty() ? 0 : layers_.back()->output_shape().size(); }

void Network::initialize(Rng& rng) {
    for (auto& l : layers_) l->initialize(rng);
}

Matrix Network::forward(const Matrix& x, Mode mode) {
    Matrix h = x;
    for (auto& l : layers_) h = l->forward(h, mode);
    return h;
}

Matrix Network::backward(const Matrix& dlogits) {
    Matrix g = dlogits;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

void Network::zero_grad() {
    for (auto& l : layers_) l->zero_grad();
}

std::vector<Parameter> Network::parameters() {
    std::vector<Parameter> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (auto p : layers_[i]->parameters()) {
            p.name = "l" + std::to_string(i) + "." + p.name;
            out.push_back(p);
        }
    return out;
}

std::vector<Parameter> Network::buffers() {
    std::vector<Parameter> out;
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (auto p : layers_[i]->buffers()) {
            p.name = "l" + std::to_string(i) + "." + p.name;
            out.push_back(p);
        }
    return out;
}

std::size_t Network::parameter_count() {
    std::size_t n = 0;
    for (const auto& p : parameters()) n += p.value->size();
    return n;
}

}  // namespace deltacharger::nn
