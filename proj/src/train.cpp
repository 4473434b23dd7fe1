#include "gt/train.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include "gt/binary_io.hpp"
#include "gt/error.hpp"
#include "gt/format.hpp"

namespace gt {

void TrainConfig::validate() const {
    if (epochs < 1) {
        throw ValidationError("train: epochs must be >= 1");
    }
    if (batch_size < 1) {
        throw ValidationError("train: batch_size must be >= 1");
    }
    if (!(lr > 0.0) || !std::isfinite(lr)) {
        throw ValidationError("train: lr must be positive");
    }
    if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
        throw ValidationError("train: validation_fraction must lie in (0, 1)");
    }
}

void condition_stats(const Dataset& dataset, std::vector<float>& offset, std::vector<float>& scale) {
    const std::size_t c = dataset.cond_dim;
    std::vector<double> mean(c, 0.0), sq(c, 0.0);
    for (const auto& p : dataset.pairs) {
        for (std::size_t i = 0; i < c; ++i) {
            mean[i] += p.cond[i];
        }
    }
    const double n = static_cast<double>(dataset.pairs.size());
    for (auto& m : mean) {
        m /= n;
    }
    for (const auto& p : dataset.pairs) {
        for (std::size_t i = 0; i < c; ++i) {
            const double d = p.cond[i] - mean[i];
            sq[i] += d * d;
        }
    }
    offset.assign(c, 0.0f);
    scale.assign(c, 1.0f);
    for (std::size_t i = 0; i < c; ++i) {
        const double sd = std::sqrt(sq[i] / n);
        offset[i] = static_cast<float>(mean[i]);
        scale[i] = sd > 1e-6 ? static_cast<float>(sd) : 1.0f;
    }
}

namespace {

std::uint64_t config_digest(const TrainConfig& cfg, const Dataset& ds, const std::vector<std::size_t>& hidden) {
    std::ostringstream s;
    s << "epochs=" << cfg.epochs << ";batch=" << cfg.batch_size << ";lr=" << format_double(cfg.lr)
      << ";seed=" << cfg.seed << ";val=" << format_double(cfg.validation_fraction) << ";hidden=";
    for (auto h : hidden) {
        s << h << ',';
    }
    s << ";data=" << hex64(content_hash(encode_dataset(ds)));
    return content_hash(s.str());
}

// Loss over a fixed example set with frozen draws, evaluated in slices to bound memory.
double frozen_loss(const FlowModel& model, const std::vector<FlowExample>& examples, const std::vector<FlowDraw>& draws) {
    constexpr std::size_t kSlice = 256;
    double total = 0.0;
    for (std::size_t start = 0; start < examples.size(); start += kSlice) {
        const std::size_t n = std::min(kSlice, examples.size() - start);
        DenseMatrix input(n, model.chunk_dim + model.cond_dim + 1);
        const std::size_t d = model.chunk_dim;
        const std::size_t c = model.cond_dim;
        for (std::size_t b = 0; b < n; ++b) {
            const auto& ex = examples[start + b];
            const auto& dr = draws[start + b];
            auto row = input.row(b);
            for (std::size_t i = 0; i < d; ++i) {
                row[i] = (1.0f - dr.tau) * ex.x[i] + dr.tau * dr.eps[i];
            }
            std::copy(ex.cond.begin(), ex.cond.end(), row.begin() + static_cast<std::ptrdiff_t>(d));
            row[d + c] = dr.tau;
        }
        const auto fwd = mlp_forward(model.net, input);
        for (std::size_t b = 0; b < n; ++b) {
            const auto& ex = examples[start + b];
            const auto& dr = draws[start + b];
            for (std::size_t i = 0; i < d; ++i) {
                const double r = static_cast<double>(fwd.output(b, i)) - (dr.eps[i] - ex.x[i]);
                total += r * r;
            }
        }
    }
    return total / static_cast<double>(examples.size());
}

} // namespace

TrainResult train(const TrainConfig& config, const Dataset& dataset, const std::vector<std::size_t>& hidden,
                  const EpochCallback& on_epoch) {
    config.validate();
    dataset.validate();
    if (config.batch_size > dataset.pairs.size()) {
        throw ValidationError("train: batch_size exceeds dataset size");
    }
    if (hidden.empty()) {
        throw ValidationError("train: at least one hidden layer is required");
    }

    TrainResult result;
    FlowModel& model = result.model;
    model.chunk_dim = dataset.chunk_dim;
    model.cond_dim = dataset.cond_dim;
    model.action_horizon = dataset.action_horizon;
    model.action_dim = dataset.action_dim;
    condition_stats(dataset, model.cond_offset, model.cond_scale);
    model.config_digest = config_digest(config, dataset, hidden);

    std::vector<std::size_t> widths{model.chunk_dim + model.cond_dim + 1};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(model.chunk_dim);
    model.net = init_mlp(widths, derive_seed(config.seed, "init"));
    model.validate();

    // Normalized conditions, stored once.
    std::vector<std::vector<float>> conds;
    conds.reserve(dataset.pairs.size());
    for (const auto& p : dataset.pairs) {
        conds.push_back(model.normalize_cond(p.cond));
    }

    std::vector<std::size_t> order(dataset.pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitMix64 split_rng(derive_seed(config.seed, "split"));
    split_rng.shuffle(std::span<std::size_t>(order));
    auto n_val = static_cast<std::size_t>(std::floor(config.validation_fraction * static_cast<double>(order.size())));
    std::vector<std::size_t> train_idx, val_idx;
    if (n_val == 0 || n_val >= order.size() || order.size() - n_val < config.batch_size) {
        // Too small to hold out: validate on the training pairs.
        train_idx = order;
        val_idx = order;
    } else {
        val_idx.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_val));
        train_idx.assign(order.begin() + static_cast<std::ptrdiff_t>(n_val), order.end());
    }

    auto example = [&](std::size_t i) { return FlowExample{dataset.pairs[i].chunk, conds[i]}; };
    std::vector<FlowExample> val_examples, train_examples;
    for (auto i : val_idx) {
        val_examples.push_back(example(i));
    }
    for (auto i : train_idx) {
        train_examples.push_back(example(i));
    }
    SplitMix64 val_rng(derive_seed(config.seed, "val-noise"));
    const auto val_draws = draw_flow_noise(val_examples.size(), model.chunk_dim, val_rng);
    SplitMix64 probe_rng(derive_seed(config.seed, "train-probe"));
    const auto train_probe_draws = draw_flow_noise(train_examples.size(), model.chunk_dim, probe_rng);

    result.trace.push_back({0, frozen_loss(model, train_examples, train_probe_draws),
                            frozen_loss(model, val_examples, val_draws)});
    if (on_epoch) {
        on_epoch(result.trace.back());
    }

    AdamState adam = AdamState::for_params(model.net, config.lr);
    SplitMix64 rng(derive_seed(config.seed, "train"));
    std::vector<FlowExample> batch;
    batch.reserve(config.batch_size);
    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(train_idx));
        double epoch_total = 0.0;
        for (std::size_t start = 0; start < train_idx.size(); start += config.batch_size) {
            const std::size_t n = std::min(config.batch_size, train_idx.size() - start);
            batch.clear();
            for (std::size_t k = 0; k < n; ++k) {
                batch.push_back(example(train_idx[start + k]));
            }
            auto loss = fm_loss(model, batch, rng);
            epoch_total += loss.loss * static_cast<double>(n);
            adam_step(adam, model.net, loss.grads);
        }
        result.trace.push_back(
            {epoch, epoch_total / static_cast<double>(train_idx.size()), frozen_loss(model, val_examples, val_draws)});
        if (on_epoch) {
            on_epoch(result.trace.back());
        }
    }
    return result;
}

std::string loss_trace_csv(const std::vector<EpochLoss>& trace) {
    std::string out = "epoch,train_loss,val_loss\n";
    for (const auto& e : trace) {
        out += std::to_string(e.epoch) + ',' + format_double(e.train_loss) + ',' + format_double(e.val_loss) + '\n';
    }
    return out;
}

} // namespace gt
