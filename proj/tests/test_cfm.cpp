#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajflow/cfm.hpp"
#include "trajflow/errors.hpp"

using namespace trajflow;

namespace {

NetConfig tiny_net_config(int horizon, int state_dim, int context_dim) {
    NetConfig nc;
    nc.horizon = horizon;
    nc.state_dim = state_dim;
    nc.context_dim = context_dim;
    nc.base_channels = 8;
    nc.depth = 1;
    nc.kernel_size = 3;
    nc.time_embed_dim = 8;
    nc.groups = 4;
    return nc;
}

// Endpoint-conditioned toy data: straight lines between random endpoints.
TrajectoryDataset line_dataset(std::size_t count, int horizon, std::uint64_t seed) {
    TrajectoryDataset ds;
    ds.horizon = horizon;
    ds.state_dim = 1;
    ds.layout = ContextLayout{ContextLayout::Kind::endpoints, 0, 1};
    SeededRng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const double a = rng.uniform() * 2.0 - 1.0;
        const double b = rng.uniform() * 2.0 - 1.0;
        std::vector<double> flat;
        for (int r = 0; r < horizon; ++r) {
            flat.push_back(a + (b - a) * static_cast<double>(r) / (horizon - 1));
        }
        ds.trajectories.push_back(Array({static_cast<std::size_t>(horizon), 1}, std::move(flat)));
        ds.contexts.push_back({a, b});
    }
    ds.finalize();
    return ds;
}

TrajectoryDataset constant_dataset(std::size_t count, int horizon) {
    TrajectoryDataset ds;
    ds.horizon = horizon;
    ds.state_dim = 1;
    ds.layout = ContextLayout{ContextLayout::Kind::none, 0, 1};
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<double> flat;
        for (int r = 0; r < horizon; ++r) flat.push_back(0.25 + 0.5 * r / (horizon - 1));
        ds.trajectories.push_back(Array({static_cast<std::size_t>(horizon), 1}, std::move(flat)));
        ds.contexts.push_back({});
    }
    ds.finalize();
    return ds;
}

}  // namespace

TEST_CASE("probability path endpoints and midpoint at sigma zero") {
    SeededRng rng(3);
    const Array tau0 = rng.normal_array({4, 2});
    const Array tau1 = rng.normal_array({4, 2});

    Array at0 = sample_probability_path(tau0, tau1, 0.0, 0.0, rng);
    Array at1 = sample_probability_path(tau0, tau1, 1.0, 0.0, rng);
    for (std::size_t i = 0; i < tau0.size(); ++i) {
        CHECK(at0[i] == tau0[i]);
        CHECK(at1[i] == tau1[i]);
    }

    const Array zeros = Array::zeros({3, 2});
    const Array twos = Array::full({3, 2}, 2.0);
    Array mid = sample_probability_path(zeros, twos, 0.5, 0.0, rng);
    for (std::size_t i = 0; i < mid.size(); ++i) CHECK(mid[i] == 1.0);
}

TEST_CASE("probability path draws noise even at sigma zero") {
    SeededRng a(9), b(9);
    const Array tau0 = Array::zeros({2, 2});
    const Array tau1 = Array::full({2, 2}, 1.0);
    sample_probability_path(tau0, tau1, 0.5, 0.0, a);
    sample_probability_path(tau0, tau1, 0.5, 0.3, b);
    // both consumed the same number of draws, so the streams stay aligned
    CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("probability path perturbation has the configured scale") {
    SeededRng rng(12);
    const Array tau0 = Array::zeros({1, 1});
    const Array tau1 = Array::zeros({1, 1});
    const double sigma = 0.1;
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const Array x = sample_probability_path(tau0, tau1, 0.5, sigma, rng);
        sum += x[0];
        sumsq += x[0] * x[0];
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sumsq / n - mean * mean);
    CHECK(sd > 0.099);
    CHECK(sd < 0.101);
}

TEST_CASE("probability path argument validation") {
    SeededRng rng(1);
    const Array a = Array::zeros({2, 2});
    const Array b = Array::zeros({3, 2});
    CHECK_THROWS_AS(sample_probability_path(a, b, 0.5, 0.0, rng), ShapeError);
    CHECK_THROWS_AS(sample_probability_path(a, a, -0.01, 0.0, rng), DomainError);
    CHECK_THROWS_AS(sample_probability_path(a, a, 1.01, 0.0, rng), DomainError);
    CHECK_THROWS_AS(sample_probability_path(a, a, 0.5, -1.0, rng), ConfigError);
}

TEST_CASE("target field is the straight-line displacement") {
    SeededRng rng(4);
    const Array tau0 = rng.normal_array({5, 3});
    const Array tau1 = rng.normal_array({5, 3});

    const Array same = target_vector_field(tau0, tau0);
    for (std::size_t i = 0; i < same.size(); ++i) CHECK(same[i] == 0.0);

    Array zeros = Array::zeros({2, 2});
    Array one_entry = Array::zeros({2, 2});
    one_entry.at(1, 0) = 4.0;
    const Array f = target_vector_field(zeros, one_entry);
    CHECK(f.at(1, 0) == 4.0);
    CHECK(f.at(0, 0) == 0.0);
    CHECK(f.at(0, 1) == 0.0);
    CHECK(f.at(1, 1) == 0.0);

    // algebraic identity: u + tau0 recovers tau1 up to the one rounding in the subtraction
    const Array u = target_vector_field(tau0, tau1);
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double err = std::abs((u[i] + tau0[i]) - tau1[i]);
        CHECK(err <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(tau1[i])));
    }
}

TEST_CASE("cfm loss is the elementwise mean square") {
    SeededRng rng(5);
    const Array t = rng.normal_array({3, 2});
    CHECK(cfm_loss(t, t) == 0.0);

    Array shifted = t;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += 1.0;
    CHECK(cfm_loss(shifted, t) == doctest::Approx(1.0).epsilon(1e-12));

    const Array pred({1, 2}, {1.0, 0.0});
    const Array target({1, 2}, {0.0, 0.0});
    CHECK(cfm_loss(pred, target) == 0.5);
}

TEST_CASE("trainer runs zero steps as a no-op") {
    const TrajectoryDataset ds = line_dataset(10, 8, 21);
    const NetConfig nc = tiny_net_config(8, 1, 2);
    SeededRng init(0);
    VectorFieldNet net = VectorFieldNet::init(nc, init);
    const ParamSet before = net.params();
    AdamState opt = AdamState::init(net.params());

    TrainerConfig tc;
    tc.steps = 0;
    tc.batch_size = 2;
    const TrainResult r = train_flow_matching(ds, net, opt, tc);
    CHECK(r.losses.empty());
    CHECK(opt.step == 0);
    for (const auto& [name, arr] : net.params().entries()) {
        const Array& old = before.at(name);
        for (std::size_t i = 0; i < arr.size(); ++i) CHECK(arr[i] == old[i]);
    }
}

TEST_CASE("trainer is deterministic and resume matches an uninterrupted run") {
    const TrajectoryDataset ds = line_dataset(12, 8, 22);
    const NetConfig nc = tiny_net_config(8, 1, 2);
    TrainerConfig tc;
    tc.batch_size = 3;
    tc.steps = 12;

    auto fresh_net = [&] {
        SeededRng init(7);
        return VectorFieldNet::init(nc, init);
    };

    VectorFieldNet a = fresh_net();
    AdamState oa = AdamState::init(a.params());
    const TrainResult ra = train_flow_matching(ds, a, oa, tc);
    CHECK(ra.losses.size() == 12);
    CHECK(oa.step == 12);

    VectorFieldNet b = fresh_net();
    AdamState ob = AdamState::init(b.params());
    const TrainResult rb = train_flow_matching(ds, b, ob, tc);
    CHECK(ra.losses == rb.losses);

    // 7 steps then 5 more lands exactly where 12 straight steps did
    VectorFieldNet c = fresh_net();
    AdamState oc = AdamState::init(c.params());
    TrainerConfig first = tc;
    first.steps = 7;
    TrainerConfig second = tc;
    second.steps = 5;
    const TrainResult r1 = train_flow_matching(ds, c, oc, first);
    const TrainResult r2 = train_flow_matching(ds, c, oc, second);
    CHECK(oc.step == 12);
    std::vector<double> joined = r1.losses;
    joined.insert(joined.end(), r2.losses.begin(), r2.losses.end());
    CHECK(joined == ra.losses);
    for (const auto& [name, arr] : a.params().entries()) {
        const Array& other = c.params().at(name);
        for (std::size_t i = 0; i < arr.size(); ++i) CHECK(arr[i] == other[i]);
    }
}

TEST_CASE("trainer step hook sees global step numbers and checkpoints fire on schedule") {
    const TrajectoryDataset ds = line_dataset(10, 8, 23);
    const NetConfig nc = tiny_net_config(8, 1, 2);
    SeededRng init(1);
    VectorFieldNet net = VectorFieldNet::init(nc, init);
    AdamState opt = AdamState::init(net.params());
    opt.step = 4;  // as if resumed

    TrainerConfig tc;
    tc.steps = 6;
    tc.batch_size = 2;
    tc.checkpoint_every = 3;

    std::vector<std::int64_t> seen, saved;
    TrainHooks hooks;
    hooks.on_step = [&](std::int64_t step, double) { seen.push_back(step); };
    hooks.save_checkpoint = [&](std::int64_t step) {
        saved.push_back(step);
        return std::string("mem");
    };
    train_flow_matching(ds, net, opt, tc, hooks);
    CHECK(seen == std::vector<std::int64_t>{5, 6, 7, 8, 9, 10});
    CHECK(saved == std::vector<std::int64_t>{6, 9});
}

TEST_CASE("trainer aborts with a non-finite loss error") {
    const TrajectoryDataset ds = line_dataset(10, 8, 24);
    const NetConfig nc = tiny_net_config(8, 1, 2);
    SeededRng init(2);
    VectorFieldNet net = VectorFieldNet::init(nc, init);
    AdamState opt = AdamState::init(net.params());

    TrainerConfig tc;
    tc.steps = 40;
    tc.batch_size = 2;
    tc.adam.lr = 1e160;  // loss scales with lr^2 and overflows
    CHECK_THROWS_AS(train_flow_matching(ds, net, opt, tc), NonFiniteError);
}

TEST_CASE("trainer config validation") {
    TrainerConfig tc;
    tc.batch_size = 0;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainerConfig{};
    tc.sigma = -0.1;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
    tc = TrainerConfig{};
    tc.steps = -1;
    CHECK_THROWS_AS(tc.validate(), ConfigError);
}

TEST_CASE("trained net output depends on the context") {
    const TrajectoryDataset ds = line_dataset(24, 8, 25);
    const NetConfig nc = tiny_net_config(8, 1, 2);
    SeededRng init(3);
    VectorFieldNet net = VectorFieldNet::init(nc, init);
    AdamState opt = AdamState::init(net.params());

    TrainerConfig tc;
    tc.steps = 100;
    tc.batch_size = 4;
    train_flow_matching(ds, net, opt, tc);

    SeededRng rng(30);
    const Array tau = rng.normal_array({8, 1});
    const Array ca({2}, {-0.8, 0.8});
    const Array cb({2}, {0.8, -0.8});
    const Array va = net.forward(0.5, tau, ca);
    const Array vb = net.forward(0.5, tau, cb);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < va.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(va[i] - vb[i]));
    }
    CHECK(max_diff > 0.0);
}

TEST_CASE("training on a constant dataset drives the loss down") {
    const TrajectoryDataset ds = constant_dataset(10, 8);
    NetConfig nc = tiny_net_config(8, 1, 0);
    SeededRng init(5);
    VectorFieldNet net = VectorFieldNet::init(nc, init);
    AdamState opt = AdamState::init(net.params());

    TrainerConfig tc;
    tc.steps = 400;
    tc.batch_size = 4;
    tc.sigma = 0.0;
    tc.adam.lr = 3e-3;
    const TrainResult r = train_flow_matching(ds, net, opt, tc);
    const double best = *std::min_element(r.losses.begin(), r.losses.end());
    double tail = 0.0;
    for (std::size_t i = r.losses.size() - 20; i < r.losses.size(); ++i) tail += r.losses[i];
    tail /= 20.0;
    CHECK(best < 0.05);
    CHECK(tail < r.losses.front());
}
