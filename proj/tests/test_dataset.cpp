#include <doctest.h>

#include <cmath>

#include "trajflow/dataset.hpp"
#include "trajflow/errors.hpp"
#include "trajflow/rng.hpp"

using namespace trajflow;

namespace {

Array traj_from(std::initializer_list<std::initializer_list<double>> rows) {
    std::vector<double> flat;
    std::size_t d = 0;
    for (const auto& r : rows) {
        d = r.size();
        flat.insert(flat.end(), r.begin(), r.end());
    }
    return Array({rows.size(), d}, std::move(flat));
}

}  // namespace

TEST_CASE("split_sizes uses largest remainder with ties to the later section") {
    CHECK(split_sizes(474) == std::array<std::size_t, 3>{379, 47, 48});
    CHECK(split_sizes(10) == std::array<std::size_t, 3>{8, 1, 1});
    CHECK(split_sizes(0) == std::array<std::size_t, 3>{0, 0, 0});
    // 1 -> floors (0, 0, 0), remainders (.8, .1, .1); train wins the leftover
    CHECK(split_sizes(1) == std::array<std::size_t, 3>{1, 0, 0});
    // 5 -> floors (4, 0, 0), remainders (0, .5, .5); the tie goes to test
    CHECK(split_sizes(5) == std::array<std::size_t, 3>{4, 0, 1});
    for (std::size_t n = 0; n < 300; ++n) {
        const auto s = split_sizes(n);
        CHECK(s[0] + s[1] + s[2] == n);
        CHECK(s[0] >= s[1]);
        CHECK(s[0] >= s[2]);
    }
}

TEST_CASE("NormStats maps the fitted range onto [-1, 1]") {
    const std::vector<Array> trajs = {traj_from({{0.0, 10.0}, {4.0, 30.0}}),
                                      traj_from({{2.0, 20.0}, {1.0, 50.0}})};
    const NormStats st = NormStats::fit(trajs, {0, 1});
    CHECK(st.lo == std::vector<double>{0.0, 10.0});
    CHECK(st.hi == std::vector<double>{4.0, 50.0});
    CHECK(st.normalize_value(0.0, 0) == -1.0);
    CHECK(st.normalize_value(4.0, 0) == 1.0);
    CHECK(st.normalize_value(2.0, 0) == 0.0);
    CHECK(st.normalize_value(30.0, 1) == 0.0);

    // values already in [-1, 1] with stats (-1, 1) pass through unchanged
    NormStats unit;
    unit.lo = {-1.0};
    unit.hi = {1.0};
    for (double v : {-1.0, -0.25, 0.0, 0.5, 1.0}) {
        CHECK(unit.normalize_value(v, 0) == v);
        CHECK(unit.denormalize_value(v, 0) == v);
    }
}

TEST_CASE("NormStats roundtrips random data") {
    SeededRng rng(41);
    const Array traj = rng.normal_array({6, 3});
    std::vector<Array> trajs{traj};
    const NormStats st = NormStats::fit(trajs, {0});
    const Array back = st.denormalize(st.normalize(traj));
    for (std::size_t i = 0; i < traj.size(); ++i) {
        CHECK(back[i] == doctest::Approx(traj[i]).epsilon(1e-12));
    }
    const Array norm = st.normalize(traj);
    for (std::size_t i = 0; i < norm.size(); ++i) {
        CHECK(norm[i] >= -1.0);
        CHECK(norm[i] <= 1.0);
    }
}

TEST_CASE("NormStats degenerate dimension maps to zero and back to its constant") {
    const std::vector<Array> trajs = {traj_from({{5.0, 1.0}, {5.0, 2.0}})};
    const NormStats st = NormStats::fit(trajs, {0});
    CHECK(st.degenerate(0));
    CHECK_FALSE(st.degenerate(1));
    CHECK(st.normalize_value(5.0, 0) == 0.0);
    CHECK(st.normalize_value(123.0, 0) == 0.0);
    CHECK(st.denormalize_value(0.7, 0) == 5.0);

    const Array norm = st.normalize(trajs[0]);
    CHECK(norm.at(0, 0) == 0.0);
    CHECK(norm.at(1, 0) == 0.0);
}

TEST_CASE("NormStats fit rejects an empty split and survives json") {
    std::vector<Array> trajs = {traj_from({{1.0}, {2.0}})};
    CHECK_THROWS_AS(NormStats::fit(trajs, {}), DataError);
    const NormStats st = NormStats::fit(trajs, {0});
    CHECK(NormStats::from_json(st.to_json()) == st);
}

TEST_CASE("ContextLayout lengths per kind") {
    CHECK(ContextLayout{ContextLayout::Kind::none, 0, 0}.length() == 0);
    CHECK(ContextLayout{ContextLayout::Kind::detections, 8, 2}.length() == 32);
    CHECK(ContextLayout{ContextLayout::Kind::history, 8, 3}.length() == 24);
    CHECK(ContextLayout{ContextLayout::Kind::endpoints, 0, 2}.length() == 4);
}

TEST_CASE("ContextLayout normalizes state entries and passes flags through") {
    NormStats st;
    st.lo = {0.0, 0.0};
    st.hi = {10.0, 20.0};

    const ContextLayout det{ContextLayout::Kind::detections, 2, 2};
    // slots of (age, x, y, valid)
    const std::vector<double> raw = {0.25, 5.0, 10.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    const std::vector<double> norm = det.normalize(raw, st);
    CHECK(norm[0] == 0.25);  // age untouched
    CHECK(norm[1] == 0.0);   // x: 5 of [0,10]
    CHECK(norm[2] == 0.0);   // y: 10 of [0,20]
    CHECK(norm[3] == 1.0);   // valid untouched
    CHECK(norm[5] == -1.0);  // zeroed slot state normalizes to the range floor
    CHECK(norm[7] == 0.0);

    const ContextLayout ends{ContextLayout::Kind::endpoints, 0, 2};
    const std::vector<double> e = ends.normalize({0.0, 20.0, 10.0, 0.0}, st);
    CHECK(e == std::vector<double>{-1.0, 1.0, 1.0, -1.0});

    const ContextLayout hist{ContextLayout::Kind::history, 2, 2};
    const std::vector<double> h = hist.normalize({0.0, 0.0, 10.0, 20.0}, st);
    CHECK(h == std::vector<double>{-1.0, -1.0, 1.0, 1.0});
}

TEST_CASE("ContextLayout kind strings and json roundtrip") {
    for (auto kind : {ContextLayout::Kind::none, ContextLayout::Kind::detections,
                      ContextLayout::Kind::history, ContextLayout::Kind::endpoints}) {
        CHECK(context_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(context_kind_from_string("nope"), SchemaError);
    const ContextLayout l{ContextLayout::Kind::detections, 8, 2};
    CHECK(ContextLayout::from_json(l.to_json()) == l);
}

TEST_CASE("TrajectoryDataset finalize fits stats on the train split only") {
    TrajectoryDataset ds;
    ds.horizon = 2;
    ds.state_dim = 1;
    ds.layout = ContextLayout{ContextLayout::Kind::none, 0, 1};
    // 10 items: splits 8/1/1; the last two items have out-of-train extremes
    for (int i = 0; i < 8; ++i) ds.trajectories.push_back(traj_from({{0.0}, {1.0}}));
    ds.trajectories.push_back(traj_from({{-100.0}, {0.5}}));
    ds.trajectories.push_back(traj_from({{100.0}, {0.5}}));
    ds.contexts.assign(10, {});
    ds.finalize();
    CHECK(ds.train_idx.size() == 8);
    CHECK(ds.val_idx == std::vector<std::size_t>{8});
    CHECK(ds.test_idx == std::vector<std::size_t>{9});
    CHECK(ds.stats.lo == std::vector<double>{0.0});
    CHECK(ds.stats.hi == std::vector<double>{1.0});
    // normalized accessor agrees with the stats object
    const Array n0 = ds.normalized_trajectory(0);
    CHECK(n0.at(0, 0) == -1.0);
    CHECK(n0.at(1, 0) == 1.0);
}

TEST_CASE("TrajectoryDataset validate rejects inconsistent members") {
    TrajectoryDataset ds;
    ds.horizon = 2;
    ds.state_dim = 1;
    ds.layout = ContextLayout{ContextLayout::Kind::endpoints, 0, 1};
    ds.trajectories.push_back(traj_from({{0.0}, {1.0}}));
    ds.contexts.push_back({0.0, 1.0});

    SUBCASE("wrong horizon") {
        ds.trajectories[0] = traj_from({{0.0}, {1.0}, {2.0}});
        CHECK_THROWS_AS(ds.validate(), DataError);
    }
    SUBCASE("wrong context length") {
        ds.contexts[0] = {0.0};
        CHECK_THROWS_AS(ds.validate(), DataError);
    }
    SUBCASE("non-finite state") {
        ds.trajectories[0].at(1, 0) = std::nan("");
        CHECK_THROWS_AS(ds.validate(), DataError);
    }
    SUBCASE("count mismatch") {
        ds.contexts.push_back({0.0, 1.0});
        CHECK_THROWS_AS(ds.validate(), DataError);
    }
}
