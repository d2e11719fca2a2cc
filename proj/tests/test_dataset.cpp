#include <doctest.h>

#include <cmath>
#include <set>

#include "deltacharger/dataio.hpp"
#include "deltacharger/dataset.hpp"
#include "deltacharger/error.hpp"

using namespace deltacharger;

namespace {

const LabeledDataset& angle42() {
    static const LabeledDataset d = generate_angle_dataset(42);
    return d;
}

const LabeledDataset& position42() {
    static const LabeledDataset d = generate_position_dataset(42);
    return d;
}

bool same_sample(const Sample& a, const Sample& b) {
    return a.label == b.label && a.features == b.features && a.truth.phi_deg == b.truth.phi_deg &&
           a.truth.dx_mm == b.truth.dx_mm && a.truth.dy_mm == b.truth.dy_mm;
}

}  // namespace

TEST_CASE("angle dataset is balanced with 200 features per sample") {
    const auto& d = angle42();
    CHECK(d.size() == 600u);
    CHECK(d.kind == DatasetKind::Angle);
    CHECK(d.class_counts() == std::vector<int>(6, 100));
    for (const auto& s : d.samples) {
        CHECK(s.features.size() == 200);
        CHECK(s.label == label_of(TaskSpec::of(TaskKind::Angle), s.truth));
        CHECK(std::abs(s.truth.dx_mm) <= 5.0);
        CHECK(std::abs(s.truth.dy_mm) <= 5.0);
    }
}

TEST_CASE("generation is a pure function of the seed") {
    const auto a = dataio::format_dataset(angle42());
    CHECK(dataio::checksum(a) == dataio::checksum(dataio::format_dataset(generate_angle_dataset(42))));
    CHECK(dataio::checksum(a) != dataio::checksum(dataio::format_dataset(generate_angle_dataset(43))));
    CHECK(dataio::format_dataset(position42()) == dataio::format_dataset(generate_position_dataset(42)));
}

TEST_CASE("position dataset covers the 5 x 5 grid") {
    const auto& d = position42();
    CHECK(d.size() == 500u);
    CHECK(d.class_counts() == std::vector<int>(25, 20));
    std::set<std::pair<int, int>> cells;
    for (const auto& s : d.samples) {
        const int v = s.label / 5, h = s.label % 5;
        cells.insert({v, h});
        CHECK(std::abs(s.truth.dx_mm - (h - 2) * 5.0) <= 1.0 + 1e-9);
        CHECK(std::abs(s.truth.dy_mm - (v - 2) * 5.0) <= 1.0 + 1e-9);
        CHECK(s.truth.phi_deg == 0);
    }
    CHECK(cells.size() == 25u);
}

TEST_CASE("axis relabeling gives 100 per class and zero-centre for aligned samples") {
    const auto v = relabel(position42(), TaskKind::Vertical);
    const auto h = relabel(position42(), TaskKind::Horizontal);
    CHECK(v.kind == DatasetKind::Vertical);
    CHECK(v.class_counts() == std::vector<int>(5, 100));
    CHECK(h.class_counts() == std::vector<int>(5, 100));
    int aligned = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        CHECK(v.samples[i].label == label_of(TaskSpec::of(TaskKind::Vertical), v.samples[i].truth));
        CHECK(h.samples[i].label == label_of(TaskSpec::of(TaskKind::Horizontal), h.samples[i].truth));
        if (position42().samples[i].label == 12) {
            ++aligned;
            CHECK(v.samples[i].label == 2);
            CHECK(h.samples[i].label == 2);
        }
    }
    CHECK(aligned == 20);
    CHECK_THROWS_AS(relabel(angle42(), TaskKind::Vertical), Error);
    CHECK_THROWS_AS(task_of(DatasetKind::Position), Error);
}

TEST_CASE("stratified split counts") {
    const auto [train, val] = split(angle42(), 0.67, 42);
    CHECK(train.size() == 402u);
    CHECK(val.size() == 198u);
    const auto tc = train.class_counts();
    for (int c = 0; c < 6; ++c) {
        const double share = tc[c] / 100.0;
        CHECK(share >= 0.66);
        CHECK(share <= 0.68);
    }
    // independent count: round(0.67 * 100) per class
    CHECK(tc == std::vector<int>(6, static_cast<int>(std::lround(0.67 * 100))));
}

TEST_CASE("split halves are disjoint and deterministic") {
    const auto [train, val] = split(angle42(), 0.67, 42);
    for (const auto& v : val.samples)
        for (const auto& t : train.samples) REQUIRE_FALSE(same_sample(v, t));
    CHECK(train.size() + val.size() == angle42().size());
    const auto [train2, val2] = split(angle42(), 0.67, 42);
    CHECK(dataio::format_dataset(train) == dataio::format_dataset(train2));
    CHECK(dataio::format_dataset(val) == dataio::format_dataset(val2));
    const auto [train3, val3] = split(angle42(), 0.67, 7);
    CHECK(dataio::format_dataset(train) != dataio::format_dataset(train3));
}

TEST_CASE("position split is stratified over all 25 cells") {
    const auto [train, val] = split(position42(), 0.67, 42);
    CHECK(train.size() == 25u * 13u);
    CHECK(val.size() == 25u * 7u);
}

TEST_CASE("classes with fewer than two samples are degenerate") {
    LabeledDataset d = angle42();
    d.samples.erase(d.samples.begin() + 1, d.samples.begin() + 100);  // one sample of class 0 left
    try {
        split(d, 0.67, 1);
        FAIL("expected Degenerate");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Degenerate);
    }
}

TEST_CASE("quantize rounds to six decimals and removes negative zero") {
    CHECK(quantize(1.23456789) == 1.234568);
    CHECK(std::signbit(quantize(-0.0000001)) == false);
    CHECK(quantize(-2.5) == -2.5);
}
