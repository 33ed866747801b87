// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The appraisal-annot Authors

#include "appraisal/probe.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "appraisal/random.hpp"

namespace appraisal {

using nlohmann::json;

void TrainConfig::check() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
    if (!(l2_lambda > 0.0)) throw std::invalid_argument("l2_lambda must be positive");
    if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
    if (!(early_stop_tol > 0.0)) throw std::invalid_argument("early_stop_tol must be positive");
    if (!(2.0 * learning_rate * l2_lambda < 1.0))
        throw std::invalid_argument("learning_rate * l2_lambda too large for weight decay");
}

void to_json(json& j, const TrainConfig& c) {
    j = json{{"learning_rate", c.learning_rate}, {"epochs", c.epochs},   {"l2_lambda", c.l2_lambda},
             {"batch_size", c.batch_size},       {"seed", c.seed},       {"early_stop_tol", c.early_stop_tol}};
}

void from_json(const json& j, TrainConfig& c) {
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.seed = j.value("seed", c.seed);
    c.early_stop_tol = j.value("early_stop_tol", c.early_stop_tol);
}

ProbeModel ProbeModel::zeros(Dimension dimension, std::uint32_t d) {
    ProbeModel m;
    m.dimension = dimension;
    m.d = d;
    m.weights.assign(static_cast<std::size_t>(d) * kClasses, 0.0);
    return m;
}

Distribution softmax(const Distribution& logits) noexcept {
    const double top = std::max({logits[0], logits[1], logits[2]});
    Distribution q;
    double sum = 0.0;
    for (std::size_t c = 0; c < kClasses; ++c) {
        q[c] = std::exp(logits[c] - top);
        sum += q[c];
    }
    for (auto& v : q) v /= sum;
    return q;
}

namespace {

// Loss of one example under W_true = scale * weights, and its data-term
// gradient (times coeff) added into grad_w / grad_b.
double accumulate_example(std::span<const double> weights, double scale, const Distribution& bias,
                          const TrainingExample& ex, double coeff, std::span<double> grad_w,
                          Distribution& grad_b) {
    Distribution z = {0.0, 0.0, 0.0};
    for (const auto& e : ex.features->entries()) {
        const double* row = &weights[static_cast<std::size_t>(e.index) * kClasses];
        z[0] += e.value * row[0];
        z[1] += e.value * row[1];
        z[2] += e.value * row[2];
    }
    for (std::size_t c = 0; c < kClasses; ++c) z[c] = scale * z[c] + bias[c];

    const double top = std::max({z[0], z[1], z[2]});
    double sum = 0.0;
    for (double v : z) sum += std::exp(v - top);
    const double log_norm = top + std::log(sum);

    double loss = 0.0;
    Distribution g;
    for (std::size_t c = 0; c < kClasses; ++c) {
        const double log_q = z[c] - log_norm;
        if (ex.target[c] > 0.0) loss -= ex.target[c] * log_q;
        g[c] = coeff * (std::exp(log_q) - ex.target[c]);
        grad_b[c] += g[c];
    }
    for (const auto& e : ex.features->entries()) {
        double* row = &grad_w[static_cast<std::size_t>(e.index) * kClasses];
        row[0] += e.value * g[0];
        row[1] += e.value * g[1];
        row[2] += e.value * g[2];
    }
    return loss;
}

double squared_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
}

}  // namespace

double probe_objective(const ProbeModel& model, std::span<const TrainingExample> batch, double l2_lambda,
                       ProbeGradient* gradient) {
    if (batch.empty()) throw std::invalid_argument("empty batch");
    ProbeGradient local;
    ProbeGradient& g = gradient ? *gradient : local;
    g.weights.assign(model.weights.size(), 0.0);
    g.bias = {0.0, 0.0, 0.0};

    const double coeff = 1.0 / static_cast<double>(batch.size());
    double loss = 0.0;
    for (const auto& ex : batch) {
        if (ex.features->dimension() != model.d) throw std::invalid_argument("feature dimensionality mismatch");
        loss += accumulate_example(model.weights, 1.0, model.bias, ex, coeff, g.weights, g.bias);
    }
    loss *= coeff;
    loss += l2_lambda * squared_norm(model.weights);
    for (std::size_t i = 0; i < g.weights.size(); ++i) g.weights[i] += 2.0 * l2_lambda * model.weights[i];
    return loss;
}

ProbeModel train_probe(Dimension dimension, const FeatureMap& features, const SoftLabelMap& labels,
                       const TrainConfig& config) {
    config.check();

    std::vector<TrainingExample> examples;
    std::optional<std::uint32_t> d;
    for (const auto& [id, label] : labels) {
        auto it = features.find(id);
        if (it == features.end()) continue;
        if (d && *d != it->second.dimension())
            throw TrainingError("inconsistent feature dimensionality at id \"" + id + "\"");
        d = it->second.dimension();
        examples.push_back({&it->second, {label.p_neg(), label.p_zero(), label.p_pos()}});
    }
    if (examples.empty()) throw TrainingError("no verbatim has both features and a label");

    ProbeModel model = ProbeModel::zeros(dimension, *d);
    model.config = config;
    model.initial_loss = probe_objective(model, examples, config.l2_lambda);

    // W_true = scale * model.weights; weight decay only touches scale.
    double scale = 1.0;
    const double decay = 1.0 - 2.0 * config.learning_rate * config.l2_lambda;
    const double eta = config.learning_rate;

    std::vector<double> grad_w(model.weights.size(), 0.0);
    std::vector<std::uint8_t> touched_mark(model.d, 0);
    std::vector<std::uint32_t> touched;
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(config.seed);

    std::vector<double> history;
    const std::size_t n = examples.size();
    for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(std::span<std::size_t>(order));
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += config.batch_size) {
            const std::size_t stop = std::min(n, start + config.batch_size);
            const double coeff = 1.0 / static_cast<double>(stop - start);
            Distribution grad_b = {0.0, 0.0, 0.0};
            for (std::size_t i = start; i < stop; ++i) {
                const auto& ex = examples[order[i]];
                for (const auto& e : ex.features->entries()) {
                    if (!touched_mark[e.index]) {
                        touched_mark[e.index] = 1;
                        touched.push_back(e.index);
                    }
                }
                epoch_loss += accumulate_example(model.weights, scale, model.bias, ex, coeff, grad_w, grad_b);
            }
            scale *= decay;
            const double step = eta / scale;
            for (std::uint32_t j : touched) {
                double* w = &model.weights[static_cast<std::size_t>(j) * kClasses];
                double* g = &grad_w[static_cast<std::size_t>(j) * kClasses];
                for (std::size_t c = 0; c < kClasses; ++c) {
                    w[c] -= step * g[c];
                    g[c] = 0.0;
                }
                touched_mark[j] = 0;
            }
            touched.clear();
            for (std::size_t c = 0; c < kClasses; ++c) model.bias[c] -= eta * grad_b[c];

            if (scale < 1e-6) {
                for (double& w : model.weights) w *= scale;
                scale = 1.0;
            }
        }
        epoch_loss = epoch_loss / static_cast<double>(n) +
                     config.l2_lambda * scale * scale * squared_norm(model.weights);
        if (!std::isfinite(epoch_loss))
            throw TrainingError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                                "; lower the learning rate");
        history.push_back(epoch_loss);
        ++model.epochs_run;
        if (history.size() > 10) {
            const double then = history[history.size() - 11];
            if (std::abs(epoch_loss - then) <= config.early_stop_tol * std::abs(then)) break;
        }
    }
    for (double& w : model.weights) w *= scale;

    model.final_loss = probe_objective(model, examples, config.l2_lambda);
    if (!std::isfinite(model.final_loss)) throw TrainingError("non-finite final loss");
    return model;
}

Distribution predict_dist(const ProbeModel& model, const FeatureVector& x) {
    if (x.dimension() != model.d)
        throw std::invalid_argument("input has dimensionality " + std::to_string(x.dimension()) +
                                    ", model expects " + std::to_string(model.d));
    Distribution z = model.bias;
    for (const auto& e : x.entries()) {
        for (std::size_t c = 0; c < kClasses; ++c) z[c] += e.value * model.weight(e.index, c);
    }
    return softmax(z);
}

double predict_value(const ProbeModel& model, const FeatureVector& x) {
    const Distribution q = predict_dist(model, x);
    return q[2] - q[0];
}

json model_to_json(const ProbeModel& model) {
    return json{{"dimension", std::string(dimension_code(model.dimension))},
                {"d", model.d},
                {"class_order", {"neg", "zero", "pos"}},
                {"W", model.weights},
                {"b", model.bias},
                {"config", model.config},
                {"seed", model.config.seed},
                {"epochs_run", model.epochs_run},
                {"initial_loss", model.initial_loss},
                {"final_loss", model.final_loss},
                {"feature_source", model.feature_source}};
}

ProbeModel model_from_json(const json& j) {
    ProbeModel m;
    auto dim = parse_dimension(j.at("dimension").get<std::string>());
    if (!dim) throw std::invalid_argument("unknown dimension in model file");
    if (j.at("class_order") != json({"neg", "zero", "pos"}))
        throw std::invalid_argument("unsupported class order in model file");
    m.dimension = *dim;
    m.d = j.at("d").get<std::uint32_t>();
    m.weights = j.at("W").get<std::vector<double>>();
    if (m.weights.size() != static_cast<std::size_t>(m.d) * kClasses)
        throw std::invalid_argument("weight matrix size does not match d");
    m.bias = j.at("b").get<Distribution>();
    m.config = j.at("config").get<TrainConfig>();
    m.epochs_run = j.value("epochs_run", 0u);
    m.initial_loss = j.value("initial_loss", 0.0);
    m.final_loss = j.value("final_loss", 0.0);
    m.feature_source = j.value("feature_source", std::string{});
    return m;
}

}  // namespace appraisal
