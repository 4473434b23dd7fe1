#pragma once

// Test-side reference implementations. They share no code with the library
// beyond the parameter containers they read.

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "gt/nn.hpp"
#include "gt/search.hpp"

namespace oracle {

inline double gelu(double x) { return 0.5 * x * std::erfc(-x / std::sqrt(2.0)); }

/// Double-precision forward pass for one sample.
inline std::vector<double> forward(const gt::MlpParams& p, const std::vector<double>& x) {
    std::vector<double> a = x;
    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& layer = p.layers[l];
        std::vector<double> y(layer.out_dim());
        for (std::size_t j = 0; j < layer.out_dim(); ++j) {
            double s = layer.bias[j];
            for (std::size_t i = 0; i < layer.in_dim(); ++i) {
                s += a[i] * static_cast<double>(layer.weight(i, j));
            }
            y[j] = l + 1 < p.layers.size() ? gelu(s) : s;
        }
        a = std::move(y);
    }
    return a;
}

/// sum_b sum_j out[b][j] * probe[b][j] for a batch of inputs.
inline double probe_loss(const gt::MlpParams& p, const std::vector<std::vector<double>>& inputs,
                         const std::vector<std::vector<double>>& probe) {
    double s = 0.0;
    for (std::size_t b = 0; b < inputs.size(); ++b) {
        const auto y = forward(p, inputs[b]);
        for (std::size_t j = 0; j < y.size(); ++j) {
            s += y[j] * probe[b][j];
        }
    }
    return s;
}

/// Binary-exact non-dominated set by pairwise comparison; input order.
inline std::vector<std::size_t> brute_force_frontier(const std::vector<gt::TicketReport>& r) {
    auto len = [](const gt::TicketReport& t) {
        return t.mean_success_len ? *t.mean_success_len : std::numeric_limits<double>::infinity();
    };
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < r.size(); ++i) {
        bool dominated = false;
        for (std::size_t j = 0; j < r.size() && !dominated; ++j) {
            if (i == j) {
                continue;
            }
            const bool no_worse = r[j].success_rate >= r[i].success_rate && len(r[j]) <= len(r[i]);
            const bool better = r[j].success_rate > r[i].success_rate || len(r[j]) < len(r[i]);
            dominated = no_worse && better;
        }
        if (!dominated) {
            keep.push_back(i);
        }
    }
    return keep;
}

} // namespace oracle
