#include <doctest.h>

#include "gt/env.hpp"
#include "gt/error.hpp"
#include "gt/train.hpp"

using namespace gt;

TEST_CASE("training at least halves validation loss on a generated dataset") {
    for (auto task : {Task::reach_pick, Task::push}) {
        EnvSpec spec;
        spec.task = task;
        const auto gen = generate_dataset(spec, 200, 11, StyleWeights{0.2, 0.2, 0.15, 0.15, 0.15, 0.15});
        TrainConfig tc;
        tc.epochs = 100;
        tc.seed = 2;
        const auto r = train(tc, gen.dataset, {64, 64});
        REQUIRE(r.trace.size() == 101);
        CHECK(r.trace.front().epoch == 0);
        INFO(task_name(task), " initial ", r.trace.front().val_loss, " final ", r.trace.back().val_loss);
        CHECK(r.trace.back().val_loss < 0.5 * r.trace.front().val_loss);
    }
}

TEST_CASE("training is deterministic in config and data") {
    EnvSpec spec;
    const auto gen = generate_dataset(spec, 10, 3, StyleWeights{1, 0, 0, 0, 0, 0});
    TrainConfig tc;
    tc.epochs = 3;
    tc.batch_size = 4;
    const auto a = train(tc, gen.dataset, {16});
    const auto b = train(tc, gen.dataset, {16});
    CHECK(a.model == b.model);
    CHECK(loss_trace_csv(a.trace) == loss_trace_csv(b.trace));
    tc.seed = 1;
    CHECK_FALSE(train(tc, gen.dataset, {16}).model == a.model);
}

TEST_CASE("training rejects bad configs") {
    EnvSpec spec;
    const auto gen = generate_dataset(spec, 2, 3, StyleWeights{1, 0, 0, 0, 0, 0});
    TrainConfig tc;
    tc.batch_size = gen.dataset.pairs.size() + 1;
    CHECK_THROWS_AS(train(tc, gen.dataset, {8}), ValidationError);
    tc.batch_size = 1;
    CHECK_THROWS_AS(train(tc, gen.dataset, {}), ValidationError);
    tc.epochs = 0;
    CHECK_THROWS_AS(train(tc, gen.dataset, {8}), ValidationError);
}
