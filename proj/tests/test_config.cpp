#include <doctest.h>

#include <json.hpp>

#include "deltacharger/config.hpp"
#include "deltacharger/error.hpp"

using namespace deltacharger;

namespace {

ErrorKind error_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

}  // namespace

TEST_CASE("defaults round trip through JSON") {
    const GlobalConfig c;
    const std::string text = c.to_json();
    CHECK(GlobalConfig::from_json(text).to_json() == text);
    const auto j = nlohmann::json::parse(text);
    CHECK(j.at("geometry").at("forearm") == 280.0);
    CHECK(j.at("train").at("epochs") == 50);
    CHECK(j.at("dock").at("max_align_loops") == 15);
}

TEST_CASE("partial configs keep the remaining defaults") {
    const auto c = GlobalConfig::from_json(R"({"train": {"epochs": 7}, "noise": {"dropout": 0.0}})");
    CHECK(c.train.epochs == 7);
    CHECK(c.train.batch_size == 32);
    CHECK(c.generation.plan.noise.dropout == 0.0);
    CHECK(c.generation.plan.noise.cell_sigma == 0.15);
    CHECK(GlobalConfig::from_json("{}").to_json() == GlobalConfig{}.to_json());
}

TEST_CASE("bad configs are rejected") {
    CHECK(error_of([] { GlobalConfig::from_json(R"({"trian": {}})"); }) == ErrorKind::InvalidArgument);
    CHECK(error_of([] { GlobalConfig::from_json(R"({"train": {"epoch": 3}})"); }) == ErrorKind::InvalidArgument);
    CHECK(error_of([] { GlobalConfig::from_json(R"({"train": {"epochs": "many"}})"); }) ==
          ErrorKind::InvalidArgument);
    CHECK(error_of([] { GlobalConfig::from_json("{not json"); }) == ErrorKind::InvalidArgument);
    CHECK(error_of([] { GlobalConfig::from_json(R"({"train": {"plateau_factor": 0.9}})"); }) ==
          ErrorKind::InvalidArgument);
    CHECK(error_of([] { GlobalConfig::from_json(R"({"geometry": {"upper_arm": 0}})"); }) ==
          ErrorKind::InvalidArgument);
    CHECK(error_of([] { GlobalConfig::load("/nonexistent/config.json"); }) == ErrorKind::Io);
}
