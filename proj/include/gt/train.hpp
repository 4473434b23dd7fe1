#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gt/dataset.hpp"
#include "gt/flow.hpp"

namespace gt {

struct TrainConfig {
    int epochs = 100;
    std::size_t batch_size = 20;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    double validation_fraction = 0.1;

    void validate() const;
};

struct EpochLoss {
    int epoch = 0; // 0 is the untrained model
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainResult {
    FlowModel model;
    std::vector<EpochLoss> trace;
};

/// Called after every epoch; for progress logging only.
using EpochCallback = std::function<void(const EpochLoss&)>;

/// Mini-batch Adam on the flow-matching loss. `hidden` lists hidden-layer
/// widths; the network is [D + C + 1] -> hidden... -> [D]. Deterministic in
/// (config, dataset, hidden).
TrainResult train(const TrainConfig& config, const Dataset& dataset, const std::vector<std::size_t>& hidden,
                  const EpochCallback& on_epoch = {});

/// Per-dimension mean and standard deviation (unit scale for constant dims).
void condition_stats(const Dataset& dataset, std::vector<float>& offset, std::vector<float>& scale);

/// CSV "epoch,train_loss,val_loss".
std::string loss_trace_csv(const std::vector<EpochLoss>& trace);

} // namespace gt
