#include <doctest.h>

#include "deltacharger/error.hpp"
#include "deltacharger/network.hpp"
#include "gradcheck.hpp"

using namespace deltacharger;
using namespace deltacharger::nn;

namespace {

ErrorKind error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("reference architectures compose") {
    Network nn(regular_nn_spec(6));
    CHECK(nn.input_shape() == Shape{200, 1, 1});
    CHECK(nn.output_width() == 6);
    CHECK(nn.parameter_count() == 200 * 128 + 128 + 2 * 128 + 128 * 64 + 64 + 2 * 64 + 64 * 6 + 6);

    Network cnn(cnn_spec(5));
    CHECK(cnn.input_shape() == Shape{2, 10, 10});
    CHECK(cnn.output_width() == 5);
    bool has_flatten = false;
    for (std::size_t i = 0; i < cnn.size(); ++i)
        if (cnn.layer(i).describe() == "flatten") {
            has_flatten = true;
            CHECK(cnn.layer(i).output_shape().channels == 32 * 6 * 6);
        }
    CHECK(has_flatten);
}

TEST_CASE("spec strings round trip through describe") {
    Network a(cnn_spec(6));
    Network b(a.spec());
    CHECK(b.spec() == a.spec());
    CHECK(b.parameter_count() == a.parameter_count());
}

TEST_CASE("bad specs are rejected") {
    CHECK(error_of([] { Network("in(4,1,1) dense(4,2) softmax"); }) == ErrorKind::InvalidArgument);
    CHECK(error_of([] { Network("dense(4,2)"); }) == ErrorKind::InvalidArgument);
    CHECK(error_of([] { Network("in(4,1,1) dense(5,2)"); }) == ErrorKind::ShapeMismatch);
    CHECK(error_of([] { Network("in(2,10,10) dense(200,3)"); }) == ErrorKind::ShapeMismatch);
    CHECK(error_of([] { Network("in(1,2,2) conv3x3(1,1)"); }) == ErrorKind::ShapeMismatch);
}

TEST_CASE("parameters are named by layer index") {
    Network net("in(3,1,1) dense(3,4) bn(4) relu dense(4,2)");
    std::vector<std::string> names;
    for (const auto& p : net.parameters()) names.push_back(p.name);
    CHECK(names == std::vector<std::string>{"l0.weight", "l0.bias", "l1.gamma", "l1.beta", "l3.weight", "l3.bias"});
    std::vector<std::string> buffers;
    for (const auto& p : net.buffers()) buffers.push_back(p.name);
    CHECK(buffers == std::vector<std::string>{"l1.running_mean", "l1.running_var"});
}

TEST_CASE("copies are deep") {
    Rng rng(3);
    Network a("in(3,1,1) dense(3,2)");
    a.initialize(rng);
    Network b = a;
    a.parameters()[0].value->setZero();
    CHECK_FALSE(b.parameters()[0].value->isZero());
}

TEST_CASE("whole-network gradients match finite differences") {
    Rng rng(31);
    SUBCASE("dense stack") {
        Network net("in(6,1,1) dense(6,5) bn(5) relu dense(5,3)");
        net.initialize(rng);
        const Matrix x = gradcheck::random_matrix(rng, 7, 6);
        CHECK(gradcheck::worst(gradcheck::check_network(net, x, {0, 1, 2, 0, 1, 2, 1})) <= 1e-3);
    }
    SUBCASE("small cnn") {
        Network net("in(2,5,5) conv3x3(2,3) bn(3) relu conv3x3(3,2) bn(2) relu flatten dense(2,4)");
        net.initialize(rng);
        const Matrix x = gradcheck::random_matrix(rng, 4, 50);
        CHECK(gradcheck::worst(gradcheck::check_network(net, x, {3, 1, 0, 2})) <= 1e-3);
    }
}

TEST_CASE("forward checks the input width") {
    Network net(regular_nn_spec(6));
    CHECK(error_of([&] { net.forward(Matrix::Zero(2, 199), Mode::Eval); }) == ErrorKind::ShapeMismatch);
}
