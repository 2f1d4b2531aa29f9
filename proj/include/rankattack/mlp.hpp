#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "rankattack/error.hpp"
#include "rankattack/ranking.hpp"
#include "rankattack/rng.hpp"

namespace rankattack {

/// Dense row-major matrix of doubles.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    bool operator==(const Matrix&) const = default;
};

inline double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

/// Input, three hidden layers, output. Hidden units use ReLU, outputs use
/// sigmoid. weights[l] has shape layer_sizes[l+1] x layer_sizes[l].
struct MlpModel {
    std::vector<std::size_t> layer_sizes;
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;
    double dropout_rate = 0.0;
    std::uint64_t seed = 0;
    /// Bumped on every parameter update; forward caches remember it.
    std::uint64_t generation = 0;

    std::size_t input_dim() const { return layer_sizes.front(); }
    std::size_t output_dim() const { return layer_sizes.back(); }
    std::size_t layer_count() const { return weights.size(); }

    std::size_t parameter_count() const {
        std::size_t n = 0;
        for (std::size_t l = 0; l < weights.size(); ++l) n += weights[l].data.size() + biases[l].size();
        return n;
    }

    void validate() const {
        if (layer_sizes.size() != 5) throw ArgumentError("MLP must have exactly 3 hidden layers");
        for (auto s : layer_sizes) {
            if (s == 0) throw ArgumentError("MLP layer sizes must be positive");
        }
        if (weights.size() != 4 || biases.size() != 4) throw ArgumentError("MLP parameter count mismatch");
        for (std::size_t l = 0; l < 4; ++l) {
            if (weights[l].rows != layer_sizes[l + 1] || weights[l].cols != layer_sizes[l] ||
                weights[l].data.size() != weights[l].rows * weights[l].cols)
                throw ArgumentError("MLP weight shape mismatch at layer " + std::to_string(l));
            if (biases[l].size() != layer_sizes[l + 1])
                throw ArgumentError("MLP bias shape mismatch at layer " + std::to_string(l));
            for (double w : weights[l].data) {
                if (!std::isfinite(w)) throw NumericError("non-finite MLP weight");
            }
            for (double b : biases[l]) {
                if (!std::isfinite(b)) throw NumericError("non-finite MLP bias");
            }
        }
        if (!(dropout_rate >= 0.0 && dropout_rate <= 0.5)) throw ArgumentError("dropout rate must be in [0, 0.5]");
    }
};

/// He-normal init for the ReLU layers, Xavier-normal for the sigmoid output,
/// zero biases.
inline MlpModel make_mlp(std::size_t input_dim, std::vector<std::size_t> hidden, std::size_t output_dim,
                         double dropout_rate, std::uint64_t seed) {
    if (hidden.size() != 3) throw ArgumentError("MLP must have exactly 3 hidden layers");
    MlpModel m;
    m.layer_sizes = {input_dim, hidden[0], hidden[1], hidden[2], output_dim};
    m.dropout_rate = dropout_rate;
    m.seed = seed;
    for (auto s : m.layer_sizes) {
        if (s == 0) throw ArgumentError("MLP layer sizes must be positive");
    }
    Rng rng(derive_seed(seed, "init"));
    for (std::size_t l = 0; l < 4; ++l) {
        const auto fan_in = static_cast<double>(m.layer_sizes[l]);
        const auto fan_out = static_cast<double>(m.layer_sizes[l + 1]);
        const double stddev = l < 3 ? std::sqrt(2.0 / fan_in) : std::sqrt(2.0 / (fan_in + fan_out));
        Matrix w(m.layer_sizes[l + 1], m.layer_sizes[l]);
        for (auto& x : w.data) x = rng.normal() * stddev;
        m.weights.push_back(std::move(w));
        m.biases.emplace_back(m.layer_sizes[l + 1], 0.0);
    }
    m.validate();
    return m;
}

struct ForwardCache {
    std::vector<std::vector<double>> activations;  // a0 (input) .. a4 (output)
    std::vector<std::vector<double>> pre;          // z1 .. z4
    std::vector<std::vector<double>> masks;        // per hidden layer: 0 or 1/(1-rate)
    std::uint64_t generation = 0;
    std::vector<std::size_t> layer_sizes;
};

struct ForwardResult {
    std::vector<double> output;
    ForwardCache cache;
};

/// With training set, inverted dropout is applied to each hidden activation
/// using masks drawn from rng. Without it the network is deterministic and
/// rng is untouched.
inline ForwardResult forward(const MlpModel& model, std::span<const double> x, bool training, Rng& rng) {
    if (model.layer_sizes.size() != 5) throw ArgumentError("forward: malformed model");
    if (x.size() != model.input_dim())
        throw ArgumentError("forward: input has " + std::to_string(x.size()) + " features, model expects " +
                            std::to_string(model.input_dim()));
    ForwardResult res;
    auto& c = res.cache;
    c.generation = model.generation;
    c.layer_sizes = model.layer_sizes;
    c.activations.emplace_back(x.begin(), x.end());
    const double keep = 1.0 - model.dropout_rate;
    for (std::size_t l = 0; l < 4; ++l) {
        const auto& w = model.weights[l];
        const auto& in = c.activations.back();
        std::vector<double> z(model.biases[l]);
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double* wr = w.data.data() + o * w.cols;
            double s = 0.0;
            for (std::size_t i = 0; i < w.cols; ++i) s += wr[i] * in[i];
            z[o] += s;
        }
        std::vector<double> a(z.size());
        if (l < 3) {
            std::vector<double> mask(z.size(), 1.0);
            if (training && model.dropout_rate > 0.0) {
                for (auto& m : mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
            }
            for (std::size_t o = 0; o < z.size(); ++o) a[o] = (z[o] > 0.0 ? z[o] : 0.0) * mask[o];
            c.masks.push_back(std::move(mask));
        } else {
            for (std::size_t o = 0; o < z.size(); ++o) a[o] = sigmoid(z[o]);
        }
        c.pre.push_back(std::move(z));
        c.activations.push_back(std::move(a));
    }
    res.output = c.activations.back();
    return res;
}

/// Inference-mode forward pass.
inline std::vector<double> predict(const MlpModel& model, std::span<const double> x) {
    Rng unused(0);
    return forward(model, x, false, unused).output;
}

inline constexpr double kBceEpsilon = 1e-12;

/// Mean binary cross-entropy over coordinates, predictions clamped to
/// [1e-12, 1 - 1e-12].
inline double bce_loss(std::span<const double> y_pred, std::span<const double> y_true) {
    if (y_pred.size() != y_true.size()) throw ArgumentError("bce_loss: dimension mismatch");
    if (y_pred.empty()) throw ArgumentError("bce_loss: empty vectors");
    double s = 0.0;
    for (std::size_t i = 0; i < y_pred.size(); ++i) {
        const double p = std::clamp(y_pred[i], kBceEpsilon, 1.0 - kBceEpsilon);
        const double t = y_true[i];
        s -= t * std::log(p) + (1.0 - t) * std::log(1.0 - p);
    }
    return s / static_cast<double>(y_pred.size());
}

struct Gradients {
    std::vector<Matrix> weights;
    std::vector<std::vector<double>> biases;

    static Gradients zeros_like(const MlpModel& m) {
        Gradients g;
        for (std::size_t l = 0; l < m.weights.size(); ++l) {
            g.weights.emplace_back(m.weights[l].rows, m.weights[l].cols);
            g.biases.emplace_back(m.biases[l].size(), 0.0);
        }
        return g;
    }

    void add(const Gradients& o) {
        for (std::size_t l = 0; l < weights.size(); ++l) {
            for (std::size_t i = 0; i < weights[l].data.size(); ++i) weights[l].data[i] += o.weights[l].data[i];
            for (std::size_t i = 0; i < biases[l].size(); ++i) biases[l][i] += o.biases[l][i];
        }
    }

    void scale(double f) {
        for (auto& w : weights) {
            for (auto& x : w.data) x *= f;
        }
        for (auto& b : biases) {
            for (auto& x : b) x *= f;
        }
    }

    double norm() const {
        double s = 0.0;
        for (const auto& w : weights) {
            for (double x : w.data) s += x * x;
        }
        for (const auto& b : biases) {
            for (double x : b) s += x * x;
        }
        return std::sqrt(s);
    }
};

namespace detail {

// Accumulates the gradient of bce_loss(forward(x), y) into g. The output
// delta uses (p - t) / k, the derivative of the unclamped loss through the
// sigmoid.
inline void backward_into(const MlpModel& model, const ForwardCache& cache, std::span<const double> y_true,
                          Gradients& g) {
    if (cache.generation != model.generation || cache.layer_sizes != model.layer_sizes ||
        cache.activations.size() != 5 || cache.pre.size() != 4 || cache.masks.size() != 3)
        throw ArgumentError("backward: stale or mismatched forward cache");
    if (y_true.size() != model.output_dim()) throw ArgumentError("backward: target dimension mismatch");

    const auto& out = cache.activations[4];
    std::vector<double> delta(out.size());
    const double k = static_cast<double>(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) delta[i] = (out[i] - y_true[i]) / k;

    for (std::size_t l = 4; l-- > 0;) {
        const auto& w = model.weights[l];
        const auto& in = cache.activations[l];
        auto& gw = g.weights[l];
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double d = delta[o];
            g.biases[l][o] += d;
            if (d == 0.0) continue;
            double* gr = gw.data.data() + o * w.cols;
            for (std::size_t i = 0; i < w.cols; ++i) gr[i] += d * in[i];
        }
        if (l == 0) break;
        std::vector<double> prev(w.cols, 0.0);
        for (std::size_t o = 0; o < w.rows; ++o) {
            const double d = delta[o];
            if (d == 0.0) continue;
            const double* wr = w.data.data() + o * w.cols;
            for (std::size_t i = 0; i < w.cols; ++i) prev[i] += wr[i] * d;
        }
        const auto& z = cache.pre[l - 1];
        const auto& mask = cache.masks[l - 1];
        for (std::size_t i = 0; i < prev.size(); ++i) prev[i] *= (z[i] > 0.0 ? mask[i] : 0.0);
        delta = std::move(prev);
    }
}

}  // namespace detail

/// Exact gradients of bce_loss o forward, dropout masks from the cache held
/// constant.
inline Gradients backward(const MlpModel& model, const ForwardCache& cache, std::span<const double> y_true) {
    auto g = Gradients::zeros_like(model);
    detail::backward_into(model, cache, y_true, g);
    return g;
}

struct TrainConfig {
    std::size_t batch_size = 50;
    std::size_t epochs = 100;
    double learning_rate = 0.001;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    std::uint64_t seed = 0;
    /// Share of the rows given to train() held out for validation.
    double validation_fraction = 0.3;
};

struct AdamState {
    std::vector<Matrix> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    std::uint64_t timestep = 0;

    static AdamState for_model(const MlpModel& model) {
        auto z = Gradients::zeros_like(model);
        return {z.weights, z.weights, z.biases, z.biases, 0};
    }
};

namespace detail {

inline void adam_update(std::span<double> theta, std::span<const double> g, std::span<double> m,
                        std::span<double> v, const TrainConfig& c, double bc1, double bc2) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m[i] = c.adam_beta1 * m[i] + (1.0 - c.adam_beta1) * g[i];
        v[i] = c.adam_beta2 * v[i] + (1.0 - c.adam_beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        theta[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.adam_epsilon);
    }
}

}  // namespace detail

/// One bias-corrected Adam update; increments the timestep once.
inline void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, const TrainConfig& config) {
    if (state.m_weights.size() != model.weights.size() || grads.weights.size() != model.weights.size())
        throw ArgumentError("adam_step: state/gradient shape mismatch");
    ++state.timestep;
    const auto t = static_cast<double>(state.timestep);
    const double bc1 = 1.0 - std::pow(config.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(config.adam_beta2, t);
    for (std::size_t l = 0; l < model.weights.size(); ++l) {
        if (grads.weights[l].data.size() != model.weights[l].data.size() ||
            state.m_weights[l].data.size() != model.weights[l].data.size())
            throw ArgumentError("adam_step: shape mismatch at layer " + std::to_string(l));
        detail::adam_update(model.weights[l].data, grads.weights[l].data, state.m_weights[l].data,
                            state.v_weights[l].data, config, bc1, bc2);
        detail::adam_update(model.biases[l], grads.biases[l], state.m_biases[l], state.v_biases[l], config,
                            bc1, bc2);
    }
    ++model.generation;
}

struct EpochMetrics {
    std::size_t epoch = 0;
    std::string split;
    double loss = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;

    bool operator==(const EpochMetrics&) const = default;
};

struct TrainResult {
    MlpModel model;
    std::vector<EpochMetrics> metrics;
};

struct Evaluation {
    double loss = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Mean loss plus micro-averaged precision/recall/F1 over every
/// (sample, label) pair at threshold 0.5.
inline Evaluation evaluate(const MlpModel& model, const Matrix& X, const Matrix& Y,
                           std::span<const std::size_t> rows) {
    Evaluation e;
    if (rows.empty()) return e;
    std::size_t tp = 0, fp = 0, fn = 0;
    double loss = 0.0;
    for (auto r : rows) {
        const auto p = predict(model, X.row(r));
        const auto t = Y.row(r);
        loss += bce_loss(p, t);
        for (std::size_t i = 0; i < p.size(); ++i) {
            const bool pred = p[i] >= 0.5;
            const bool truth = t[i] >= 0.5;
            tp += pred && truth;
            fp += pred && !truth;
            fn += !pred && truth;
        }
    }
    e.loss = loss / static_cast<double>(rows.size());
    e.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    e.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    e.f1 = e.precision + e.recall > 0.0 ? 2.0 * e.precision * e.recall / (e.precision + e.recall) : 0.0;
    return e;
}

/// Mini-batch Adam training. The last validation_fraction of the rows (in
/// the given order) is held out; training rows are reshuffled every epoch.
/// Records train and validation metrics after each epoch and returns the
/// final-epoch model. Throws NumericError if the loss stops being finite.
inline TrainResult train(MlpModel model, const Matrix& X, const Matrix& Y, const TrainConfig& config) {
    model.validate();
    if (X.rows != Y.rows) throw ArgumentError("train: X and Y row counts differ");
    if (X.cols != model.input_dim() || Y.cols != model.output_dim())
        throw ArgumentError("train: data width does not match model");
    if (config.batch_size == 0) throw ArgumentError("train: batch size must be positive");
    if (X.rows < 2 * config.batch_size)
        throw ArgumentError("train: need at least 2 x batch_size rows, got " + std::to_string(X.rows));
    const auto n_val = static_cast<std::size_t>(std::llround(config.validation_fraction * static_cast<double>(X.rows)));
    if (n_val == 0 || n_val >= X.rows) throw ArgumentError("train: degenerate train/validation split");
    const auto finite = [](const Matrix& m) {
        return std::all_of(m.data.begin(), m.data.end(), [](double v) { return std::isfinite(v); });
    };
    if (!finite(X) || !finite(Y)) throw NumericError("train: non-finite value in training data");

    TrainResult result{std::move(model), {}};
    auto& m = result.model;
    const std::size_t n_train = X.rows - n_val;
    std::vector<std::size_t> train_rows(n_train), val_rows(n_val);
    std::iota(train_rows.begin(), train_rows.end(), std::size_t{0});
    std::iota(val_rows.begin(), val_rows.end(), n_train);

    Rng shuffle_rng(derive_seed(config.seed, "shuffle"));
    Rng dropout_rng(derive_seed(config.seed, "dropout"));
    auto state = AdamState::for_model(m);

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(train_rows);
        for (std::size_t start = 0; start < n_train; start += config.batch_size) {
            const std::size_t end = std::min(n_train, start + config.batch_size);
            auto grads = Gradients::zeros_like(m);
            for (std::size_t k = start; k < end; ++k) {
                const auto r = train_rows[k];
                const auto fr = forward(m, X.row(r), true, dropout_rng);
                detail::backward_into(m, fr.cache, Y.row(r), grads);
            }
            grads.scale(1.0 / static_cast<double>(end - start));
            adam_step(m, grads, state, config);
        }
        const auto tr = evaluate(m, X, Y, train_rows);
        const auto va = evaluate(m, X, Y, val_rows);
        if (!std::isfinite(tr.loss) || !std::isfinite(va.loss))
            throw NumericError("training diverged at epoch " + std::to_string(epoch));
        result.metrics.push_back({epoch, "train", tr.loss, tr.precision, tr.recall, tr.f1});
        result.metrics.push_back({epoch, "validation", va.loss, va.precision, va.recall, va.f1});
    }
    return result;
}

/// Indices of the k largest outputs, ties by lower index.
inline std::vector<std::size_t> predict_topk(const MlpModel& model, std::span<const double> x, std::size_t k) {
    if (k > model.output_dim()) throw ArgumentError("predict_topk: k exceeds output dimension");
    const auto p = predict(model, x);
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    idx.resize(k);
    return idx;
}

/// Indices whose output is >= tau, ascending.
inline std::vector<std::size_t> predict_threshold(const MlpModel& model, std::span<const double> x, double tau) {
    if (!(tau > 0.0 && tau < 1.0)) throw ArgumentError("predict_threshold: tau must be in (0, 1)");
    const auto p = predict(model, x);
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] >= tau) out.push_back(i);
    }
    return out;
}

inline nlohmann::json to_json(const MlpModel& m) {
    nlohmann::json weights = nlohmann::json::array();
    for (const auto& w : m.weights) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t r = 0; r < w.rows; ++r) {
            const auto row = w.row(r);
            rows.push_back(std::vector<double>(row.begin(), row.end()));
        }
        weights.push_back(std::move(rows));
    }
    return {{"layer_sizes", m.layer_sizes},
            {"weights", std::move(weights)},
            {"biases", m.biases},
            {"dropout_rate", m.dropout_rate},
            {"seed", m.seed}};
}

inline MlpModel mlp_from_json(const nlohmann::json& j) {
    MlpModel m;
    m.layer_sizes = j.at("layer_sizes").get<std::vector<std::size_t>>();
    m.dropout_rate = j.at("dropout_rate").get<double>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.biases = j.at("biases").get<std::vector<std::vector<double>>>();
    for (const auto& layer : j.at("weights")) {
        const auto rows = layer.get<std::vector<std::vector<double>>>();
        Matrix w(rows.size(), rows.empty() ? 0 : rows.front().size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (rows[r].size() != w.cols) throw ArgumentError("model JSON: ragged weight matrix");
            std::copy(rows[r].begin(), rows[r].end(), w.row(r).begin());
        }
        m.weights.push_back(std::move(w));
    }
    m.validate();
    return m;
}

inline void save_mlp(const MlpModel& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << to_json(m).dump() << '\n';
}

inline MlpModel load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return mlp_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed model file " + path + ": " + e.what());
    }
}

inline void write_metrics_csv(std::ostream& out, std::span<const EpochMetrics> metrics) {
    out << "epoch,split,loss,precision,recall,f1\n";
    for (const auto& m : metrics) {
        out << m.epoch << ',' << m.split << ',' << format_score(m.loss) << ',' << format_score(m.precision) << ','
            << format_score(m.recall) << ',' << format_score(m.f1) << '\n';
    }
}

}  // namespace rankattack
