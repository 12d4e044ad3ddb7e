#include <doctest.h>

#include <cmath>

#include "trajflow/diffusion.hpp"
#include "trajflow/errors.hpp"
#include "trajflow/sampler.hpp"

using namespace trajflow;

namespace {

TrajectoryDataset small_dataset(std::size_t count, int horizon, std::uint64_t seed) {
    TrajectoryDataset ds;
    ds.horizon = horizon;
    ds.state_dim = 2;
    ds.layout = ContextLayout{ContextLayout::Kind::none, 0, 2};
    SeededRng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        ds.trajectories.push_back(rng.normal_array({static_cast<std::size_t>(horizon), 2}));
        ds.contexts.push_back({});
    }
    ds.finalize();
    return ds;
}

NetConfig tiny_net_config(int horizon) {
    NetConfig nc;
    nc.horizon = horizon;
    nc.state_dim = 2;
    nc.context_dim = 0;
    nc.base_channels = 8;
    nc.depth = 1;
    nc.kernel_size = 3;
    nc.time_embed_dim = 8;
    nc.groups = 4;
    return nc;
}

}  // namespace

TEST_CASE("cosine schedule starts at one and decreases strictly") {
    for (int t : {1, 8, 64, 256}) {
        const DiffusionSchedule s = DiffusionSchedule::cosine(t);
        CHECK(s.timesteps == t);
        CHECK(s.alpha_bar.size() == static_cast<std::size_t>(t) + 1);
        CHECK(s.alpha_bar[0] == 1.0);
        for (int k = 1; k <= t; ++k) {
            CHECK(s.alpha_bar[k] < s.alpha_bar[k - 1]);
            CHECK(s.alpha_bar[k] > 0.0);
            // beta clip at 0.999 floors the per-step signal ratio at 0.001
            CHECK(s.alpha_bar[k] / s.alpha_bar[k - 1] >= 0.001 - 1e-15);
        }
    }
    CHECK_THROWS_AS(DiffusionSchedule::cosine(0), ConfigError);
}

TEST_CASE("beta clip engages at the tail of a long schedule") {
    const DiffusionSchedule s = DiffusionSchedule::cosine(256);
    const std::size_t t = 256;
    // unclipped cosine would push the final ratio below the floor
    CHECK(s.alpha_bar[t] / s.alpha_bar[t - 1] == doctest::Approx(0.001).epsilon(1e-9));
}

TEST_CASE("model_time maps the discrete levels onto [0, 1]") {
    const DiffusionSchedule s = DiffusionSchedule::cosine(64);
    CHECK(s.model_time(1) == 0.0);
    CHECK(s.model_time(64) == 1.0);
    CHECK(s.model_time(32) == doctest::Approx(31.0 / 63.0).epsilon(1e-15));
    CHECK_THROWS_AS(s.model_time(0), DomainError);
    CHECK_THROWS_AS(s.model_time(65), DomainError);
}

TEST_CASE("diffusion trainer is deterministic and resumable") {
    const TrajectoryDataset ds = small_dataset(10, 8, 31);
    const NetConfig nc = tiny_net_config(8);
    const DiffusionSchedule sched = DiffusionSchedule::cosine(16);
    TrainerConfig tc;
    tc.steps = 10;
    tc.batch_size = 3;

    auto fresh_net = [&] {
        SeededRng init(11);
        return VectorFieldNet::init(nc, init);
    };

    VectorFieldNet a = fresh_net();
    AdamState oa = AdamState::init(a.params());
    const TrainResult ra = train_diffusion(ds, a, sched, oa, tc);
    CHECK(ra.losses.size() == 10);

    VectorFieldNet b = fresh_net();
    AdamState ob = AdamState::init(b.params());
    const TrainResult rb = train_diffusion(ds, b, sched, ob, tc);
    CHECK(ra.losses == rb.losses);

    VectorFieldNet c = fresh_net();
    AdamState oc = AdamState::init(c.params());
    TrainerConfig head = tc;
    head.steps = 6;
    TrainerConfig tail = tc;
    tail.steps = 4;
    const TrainResult r1 = train_diffusion(ds, c, sched, oc, head);
    const TrainResult r2 = train_diffusion(ds, c, sched, oc, tail);
    std::vector<double> joined = r1.losses;
    joined.insert(joined.end(), r2.losses.begin(), r2.losses.end());
    CHECK(joined == ra.losses);
    for (const auto& [name, arr] : a.params().entries()) {
        const Array& other = c.params().at(name);
        for (std::size_t i = 0; i < arr.size(); ++i) CHECK(arr[i] == other[i]);
    }
}

TEST_CASE("full-schedule denoising recovers a constant dataset") {
    TrajectoryDataset ds;
    ds.horizon = 8;
    ds.state_dim = 1;
    ds.layout = ContextLayout{ContextLayout::Kind::none, 0, 1};
    for (std::size_t i = 0; i < 10; ++i) {
        std::vector<double> flat;
        for (int r = 0; r < 8; ++r) flat.push_back(0.25 + 0.5 * r / 7.0);
        ds.trajectories.push_back(Array({8, 1}, std::move(flat)));
        ds.contexts.push_back({});
    }
    ds.finalize();

    NetConfig nc = tiny_net_config(8);
    nc.state_dim = 1;
    const DiffusionSchedule sched = DiffusionSchedule::cosine(16);
    SeededRng init(17);
    VectorFieldNet net = VectorFieldNet::init(nc, init);
    AdamState opt = AdamState::init(net.params());
    TrainerConfig tc;
    tc.steps = 800;
    tc.batch_size = 8;
    tc.adam.lr = 3e-3;
    train_diffusion(ds, net, sched, opt, tc);

    const Array target = ds.normalized_trajectory(0);
    SampleRequest req;
    req.context = Array({0}, {});
    req.num_steps = 16;  // the whole schedule
    req.num_samples = 8;
    req.seed = 29;
    double sq = 0.0;
    std::size_t n = 0;
    for (const Array& tau : ddpm_sample(net, sched, req)) {
        for (std::size_t i = 0; i < tau.size(); ++i) {
            const double e = tau[i] - target[i];
            sq += e * e;
            ++n;
        }
    }
    CHECK(std::sqrt(sq / static_cast<double>(n)) < 0.05);
}

TEST_CASE("diffusion training reduces the noise-prediction loss") {
    const TrajectoryDataset ds = small_dataset(16, 8, 33);
    const NetConfig nc = tiny_net_config(8);
    const DiffusionSchedule sched = DiffusionSchedule::cosine(16);
    SeededRng init(13);
    VectorFieldNet net = VectorFieldNet::init(nc, init);
    AdamState opt = AdamState::init(net.params());

    TrainerConfig tc;
    tc.steps = 200;
    tc.batch_size = 4;
    const TrainResult r = train_diffusion(ds, net, sched, opt, tc);
    double head = 0.0, tail = 0.0;
    for (std::size_t i = 0; i < 20; ++i) head += r.losses[i];
    for (std::size_t i = r.losses.size() - 20; i < r.losses.size(); ++i) tail += r.losses[i];
    // the zero-initialized net predicts zero noise, so the loss starts near 1
    CHECK(head / 20.0 == doctest::Approx(1.0).epsilon(0.2));
    CHECK(tail < head);
}
