#pragma once

// Central finite-difference gradient check for the MLP.

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <limits>
#include <random>

#include "rankattack/mlp.hpp"

namespace gradcheck {

/// Small random network (at most 200 parameters) with random biases.
inline rankattack::MlpModel random_small_mlp(std::mt19937_64& gen) {
    std::uniform_int_distribution<std::size_t> in(2, 5), hid(2, 5), out(1, 4);
    for (;;) {
        const auto m0 = in(gen), o = out(gen);
        std::vector<std::size_t> hidden{hid(gen), hid(gen), hid(gen)};
        auto m = rankattack::make_mlp(m0, hidden, o, 0.0, gen());
        if (m.parameter_count() > 200) continue;
        std::normal_distribution<double> nd(0.0, 0.5);
        for (auto& b : m.biases)
            for (auto& x : b) x = nd(gen);
        return m;
    }
}

inline double loss_at(const rankattack::MlpModel& m, std::span<const double> x, std::span<const double> y) {
    return rankattack::bce_loss(rankattack::predict(m, x), y);
}

/// Max over all parameters of |analytic - numeric| / max(|analytic|, |numeric|, 1e-8), where each
/// parameter takes the step in `steps` whose central difference agrees best. Roundoff swamps a single
/// step on gradients near 1e-7; a wrong gradient disagrees at every step.
inline double max_relative_error(rankattack::MlpModel m, std::span<const double> x, std::span<const double> y,
                                 std::initializer_list<double> steps = {1e-4, 1e-5, 1e-6}) {
    rankattack::Rng rng(0);
    const auto fr = rankattack::forward(m, x, false, rng);
    const auto g = rankattack::backward(m, fr.cache, y);
    double worst = 0.0;
    auto check = [&](double& param, double analytic) {
        const double saved = param;
        double best = std::numeric_limits<double>::infinity();
        for (const double h : steps) {
            param = saved + h;
            const double up = loss_at(m, x, y);
            param = saved - h;
            const double down = loss_at(m, x, y);
            param = saved;
            const double numeric = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
            best = std::min(best, std::abs(analytic - numeric) / denom);
        }
        worst = std::max(worst, best);
    };
    for (std::size_t l = 0; l < m.weights.size(); ++l) {
        for (std::size_t i = 0; i < m.weights[l].data.size(); ++i) check(m.weights[l].data[i], g.weights[l].data[i]);
        for (std::size_t i = 0; i < m.biases[l].size(); ++i) check(m.biases[l][i], g.biases[l][i]);
    }
    return worst;
}

/// Runs the check on one random network with a random input and target.
inline double check_random_network(std::mt19937_64& gen) {
    const auto m = random_small_mlp(gen);
    std::normal_distribution<double> nd;
    std::bernoulli_distribution coin(0.5);
    std::vector<double> x(m.input_dim()), y(m.output_dim());
    for (auto& v : x) v = nd(gen);
    for (auto& v : y) v = coin(gen) ? 1.0 : 0.0;
    return max_relative_error(m, x, y);
}

}  // namespace gradcheck
