#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "vsql/grad.hpp"
#include "vsql/rng.hpp"

namespace vsql {

enum class Optimizer { Adam, Sgd };

struct TrainConfig {
    double learning_rate = 0.01;
    int batch_size = 20;
    int epochs = 1;
    Optimizer optimizer = Optimizer::Adam;
    std::uint64_t seed = 0;
    ShotConfig shots;
    double stop_tolerance = 0.0; // epoch-mean loss delta; 0 disables early stop
    long max_iterations = 0;     // hard iteration cap; 0 disables
    int eval_every = 1;          // accuracy evaluation cadence in iterations

    void validate() const;
};

// Adam moment buffers for one parameter group. Defaults beta1 0.9, beta2
// 0.999, eps 1e-8 with bias correction.
struct AdamState {
    Vector m;
    Vector v;
    long t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One in-place update. Throws TrainError on non-finite gradient entries.
void adam_step(Vector& params, const Vector& grad, AdamState& state, double learning_rate);
void sgd_step(Vector& params, const Vector& grad, double learning_rate);

struct MetricsRow {
    long iteration = 0;
    double loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct Checkpoint {
    int format_version = 1;
    int n_qubits = 0;
    int n_classes = 2; // dataset label count; head is 1-output when this is 2
    ShadowEnsemble ensemble;
    ClassifierHead head;
    nlohmann::json config; // effective run configuration snapshot
    std::vector<MetricsRow> history;
};

// Angle init uniform in [0, 2pi); head init standard normal.
ShadowEnsemble init_ensemble(const ShadowCircuit& circuit, int n_circuits, Rng& rng);
ClassifierHead init_head(int n_classes_dataset, int n_features, Rng& rng);

// Mini-batch training: seeded shuffle each epoch, batch-mean gradients,
// optimizer step per iteration. Runs until epochs are exhausted, the epoch
// mean loss improves by less than stop_tolerance, or max_iterations is hit.
// Evaluation (train/val accuracy) happens every eval_every iterations and at
// the last iteration; accuracies carry forward in between so the metrics
// history always has one row per iteration.
Checkpoint fit(const Dataset& dataset, const ShadowEnsemble& init, const ClassifierHead& head0,
               const TrainConfig& cfg);

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
    std::vector<int> predicted;
    Eigen::MatrixXi confusion; // rows: true label, cols: predicted
};

// Exact-expectation inference with the checkpoint's ensemble and head.
EvalResult infer(const std::vector<LabeledState>& samples, const Checkpoint& ckpt);

// Multinomial logistic regression on raw vectors; the parameter-matched
// classical reference for the image experiments. Returns the final test
// accuracy and appends per-iteration rows to history if given.
double classical_baseline_fit(const VectorDataset& data, const TrainConfig& cfg,
                              std::vector<MetricsRow>* history = nullptr);

} // namespace vsql
