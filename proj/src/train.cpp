#include "vsql/train.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vsql/threading.hpp"

namespace vsql {

namespace {

LossKind loss_kind_for(const ClassifierHead& head) {
    return head.n_classes == 1 ? LossKind::BinaryMse : LossKind::CrossEntropy;
}

int head_outputs_for(int n_classes_dataset) {
    if (n_classes_dataset < 2) throw ConfigError("dataset needs at least two classes");
    return n_classes_dataset == 2 ? 1 : n_classes_dataset;
}

struct EvalNumbers {
    double accuracy = 0.0;
    double mean_loss = 0.0;
};

// Exact-expectation accuracy over prepared samples: features are dot
// products against the flattened forward observables.
EvalNumbers eval_prepared(const std::vector<PreparedSample>& samples,
                          const ShadowEnsemble& ensemble, const ClassifierHead& head,
                          LossKind kind) {
    int n_circuits = static_cast<int>(ensemble.circuits.size());
    std::vector<Vector> fwd(n_circuits);
    for (int s = 0; s < n_circuits; ++s)
        fwd[s] = flatten_hermitian(
            conjugated_observable(ensemble.circuits[s], ensemble.thetas[s]));
    int windows = samples.empty() ? 0 : static_cast<int>(samples.front().rdm_flat.size());

    std::vector<int> hits(samples.size());
    std::vector<double> losses(samples.size());
    parallel_for(samples.size(), [&](std::size_t m) {
        const PreparedSample& ps = samples[m];
        Vector features(static_cast<long>(n_circuits) * windows);
        for (int s = 0; s < n_circuits; ++s)
            for (int i = 0; i < windows; ++i)
                features[static_cast<long>(s) * windows + i] = ps.rdm_flat[i].dot(fwd[s]);
        Prediction pred = head_forward(features, head);
        hits[m] = predict_label(pred) == ps.label ? 1 : 0;
        losses[m] = head_loss(pred, ps.label, kind);
    });

    EvalNumbers out;
    if (samples.empty()) return out;
    out.accuracy = static_cast<double>(std::accumulate(hits.begin(), hits.end(), 0)) /
                   static_cast<double>(samples.size());
    out.mean_loss = std::accumulate(losses.begin(), losses.end(), 0.0) /
                    static_cast<double>(samples.size());
    return out;
}

std::vector<PreparedSample> prepare_all(const std::vector<LabeledState>& samples,
                                        int n_qsc, std::uint64_t tag_offset) {
    std::vector<PreparedSample> out(samples.size());
    parallel_for(samples.size(), [&](std::size_t m) {
        out[m] = prepare_sample(samples[m].state, n_qsc, samples[m].label, tag_offset + m);
    });
    return out;
}

nlohmann::json config_snapshot(const TrainConfig& cfg) {
    nlohmann::json j;
    j["learning_rate"] = cfg.learning_rate;
    j["batch_size"] = cfg.batch_size;
    j["epochs"] = cfg.epochs;
    j["optimizer"] = cfg.optimizer == Optimizer::Adam ? "adam" : "sgd";
    j["seed"] = cfg.seed;
    j["shots"] = {{"mode", cfg.shots.mode == ShotMode::Exact ? "exact" : "sampled"},
                  {"shots", cfg.shots.shots},
                  {"seed", cfg.shots.seed}};
    j["stop_tolerance"] = cfg.stop_tolerance;
    j["max_iterations"] = cfg.max_iterations;
    j["eval_every"] = cfg.eval_every;
    return j;
}

} // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0) || !std::isfinite(learning_rate))
        throw ConfigError("learning_rate must be positive");
    if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
    if (epochs < 1) throw ConfigError("epochs must be at least 1");
    if (stop_tolerance < 0) throw ConfigError("stop_tolerance must be non-negative");
    if (max_iterations < 0) throw ConfigError("max_iterations must be non-negative");
    if (eval_every < 1) throw ConfigError("eval_every must be at least 1");
    shots.validate();
}

void adam_step(Vector& params, const Vector& grad, AdamState& state, double learning_rate) {
    if (grad.size() != params.size()) throw TrainError("gradient length mismatch");
    if (!grad.allFinite()) throw TrainError("non-finite gradient");
    if (state.m.size() == 0) {
        state.m = Vector::Zero(params.size());
        state.v = Vector::Zero(params.size());
    }
    if (state.m.size() != params.size()) throw TrainError("optimizer state length mismatch");
    state.t += 1;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * grad;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * grad.cwiseProduct(grad);
    double mc = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
    double vc = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
    Vector mhat = state.m / mc;
    Vector vhat = state.v / vc;
    params -= learning_rate * (mhat.array() / (vhat.array().sqrt() + state.eps)).matrix();
}

void sgd_step(Vector& params, const Vector& grad, double learning_rate) {
    if (grad.size() != params.size()) throw TrainError("gradient length mismatch");
    if (!grad.allFinite()) throw TrainError("non-finite gradient");
    params -= learning_rate * grad;
}

ShadowEnsemble init_ensemble(const ShadowCircuit& circuit, int n_circuits, Rng& rng) {
    if (n_circuits < 1) throw ConfigError("need at least one shadow circuit");
    circuit.validate();
    ShadowEnsemble ens;
    for (int s = 0; s < n_circuits; ++s) {
        ens.circuits.push_back(circuit);
        Vector theta(circuit.n_params);
        for (int l = 0; l < circuit.n_params; ++l) theta[l] = rng.uniform(0.0, 2.0 * M_PI);
        ens.thetas.push_back(theta);
    }
    return ens;
}

ClassifierHead init_head(int n_classes_dataset, int n_features, Rng& rng) {
    if (n_features < 1) throw ConfigError("head needs at least one feature");
    ClassifierHead head;
    head.n_classes = head_outputs_for(n_classes_dataset);
    head.w.resize(head.n_classes, n_features);
    head.b.resize(head.n_classes);
    for (int k = 0; k < head.n_classes; ++k) {
        for (int f = 0; f < n_features; ++f) head.w(k, f) = rng.normal();
        head.b[k] = rng.normal();
    }
    return head;
}

Checkpoint fit(const Dataset& dataset, const ShadowEnsemble& init, const ClassifierHead& head0,
               const TrainConfig& cfg) {
    cfg.validate();
    dataset.validate();
    init.validate();
    head0.validate();
    if (head0.n_classes != head_outputs_for(dataset.n_classes))
        throw ConfigError("head outputs do not match the dataset class count");
    int windows = init.n_windows(dataset.n_qubits);
    if (head0.w.cols() != static_cast<long>(init.circuits.size()) * windows)
        throw ConfigError("head width does not match the feature map");
    if (dataset.train.empty()) throw ConfigError("empty training split");

    ShadowEnsemble ensemble = init;
    ClassifierHead head = head0;
    LossKind kind = loss_kind_for(head);

    std::vector<PreparedSample> train =
        prepare_all(dataset.train, ensemble.n_qsc(), 0);
    std::vector<PreparedSample> val =
        prepare_all(dataset.val, ensemble.n_qsc(), dataset.train.size());

    std::vector<AdamState> theta_state(ensemble.circuits.size());
    AdamState w_state, b_state;

    Checkpoint ckpt;
    ckpt.n_qubits = dataset.n_qubits;
    ckpt.n_classes = dataset.n_classes;
    ckpt.config = config_snapshot(cfg);

    Rng shuffle_rng(mix_seed(cfg.seed, {0x5485ull}));
    std::vector<int> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    long iter = 0;
    double train_acc = 0.0, val_acc = 0.0;
    bool evaluated_once = false;
    double prev_epoch_loss = std::numeric_limits<double>::infinity();
    bool done = false;

    for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
        shuffle_rng.shuffle(order);
        double epoch_loss_sum = 0.0;
        for (std::size_t start = 0; start < order.size() && !done; start += cfg.batch_size) {
            std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            std::vector<const PreparedSample*> batch;
            batch.reserve(stop - start);
            for (std::size_t k = start; k < stop; ++k) batch.push_back(&train[order[k]]);

            BatchGrads grads = loss_grad(batch, ensemble, head, kind, cfg.shots);
            if (!std::isfinite(grads.loss)) throw TrainError("non-finite training loss");
            epoch_loss_sum += grads.loss * static_cast<double>(batch.size());

            if (cfg.optimizer == Optimizer::Adam) {
                for (std::size_t s = 0; s < ensemble.circuits.size(); ++s)
                    adam_step(ensemble.thetas[s], grads.theta[s], theta_state[s],
                              cfg.learning_rate);
                Eigen::Map<Vector> wflat(head.w.data(), head.w.size());
                Eigen::Map<const Vector> wgrad(grads.w.data(), grads.w.size());
                Vector wvec = wflat, gvec = wgrad;
                adam_step(wvec, gvec, w_state, cfg.learning_rate);
                wflat = wvec;
                adam_step(head.b, grads.b, b_state, cfg.learning_rate);
            } else {
                for (std::size_t s = 0; s < ensemble.circuits.size(); ++s)
                    sgd_step(ensemble.thetas[s], grads.theta[s], cfg.learning_rate);
                Eigen::Map<Vector> wflat(head.w.data(), head.w.size());
                Eigen::Map<const Vector> wgrad(grads.w.data(), grads.w.size());
                Vector wvec = wflat, gvec = wgrad;
                sgd_step(wvec, gvec, cfg.learning_rate);
                wflat = wvec;
                sgd_step(head.b, grads.b, cfg.learning_rate);
            }

            ++iter;
            bool last = (cfg.max_iterations > 0 && iter >= cfg.max_iterations) ||
                        (epoch + 1 == cfg.epochs && stop == order.size());
            if (!evaluated_once || iter % cfg.eval_every == 0 || last) {
                train_acc = eval_prepared(train, ensemble, head, kind).accuracy;
                val_acc = val.empty() ? 0.0
                                      : eval_prepared(val, ensemble, head, kind).accuracy;
                evaluated_once = true;
            }
            ckpt.history.push_back({iter, grads.loss, train_acc, val_acc});
            if (cfg.max_iterations > 0 && iter >= cfg.max_iterations) done = true;
        }
        double epoch_loss = epoch_loss_sum / static_cast<double>(order.size());
        if (cfg.stop_tolerance > 0 &&
            std::abs(prev_epoch_loss - epoch_loss) < cfg.stop_tolerance)
            done = true;
        prev_epoch_loss = epoch_loss;
    }

    ckpt.ensemble = ensemble;
    ckpt.head = head;
    return ckpt;
}

EvalResult infer(const std::vector<LabeledState>& samples, const Checkpoint& ckpt) {
    ckpt.ensemble.validate();
    ckpt.head.validate();
    if (samples.empty()) throw ConfigError("empty evaluation set");
    for (const LabeledState& ls : samples) {
        if (input_qubits(ls.state) != ckpt.n_qubits)
            throw ConfigError("sample register size does not match the checkpoint");
        if (ls.label < 0 || ls.label >= ckpt.n_classes)
            throw ConfigError("sample label outside the checkpoint class range");
    }
    LossKind kind = loss_kind_for(ckpt.head);

    std::vector<PreparedSample> prepared =
        prepare_all(samples, ckpt.ensemble.n_qsc(), 0);
    int n_circuits = static_cast<int>(ckpt.ensemble.circuits.size());
    int windows = ckpt.ensemble.n_windows(ckpt.n_qubits);
    std::vector<Vector> fwd(n_circuits);
    for (int s = 0; s < n_circuits; ++s)
        fwd[s] = flatten_hermitian(
            conjugated_observable(ckpt.ensemble.circuits[s], ckpt.ensemble.thetas[s]));

    EvalResult out;
    out.predicted.resize(samples.size());
    out.confusion = Eigen::MatrixXi::Zero(ckpt.n_classes, ckpt.n_classes);
    std::vector<double> losses(samples.size());
    parallel_for(samples.size(), [&](std::size_t m) {
        Vector features(static_cast<long>(n_circuits) * windows);
        for (int s = 0; s < n_circuits; ++s)
            for (int i = 0; i < windows; ++i)
                features[static_cast<long>(s) * windows + i] =
                    prepared[m].rdm_flat[i].dot(fwd[s]);
        Prediction pred = head_forward(features, ckpt.head);
        out.predicted[m] = predict_label(pred);
        losses[m] = head_loss(pred, prepared[m].label, kind);
    });

    long correct = 0;
    for (std::size_t m = 0; m < samples.size(); ++m) {
        if (out.predicted[m] == samples[m].label) ++correct;
        out.confusion(samples[m].label, out.predicted[m]) += 1;
    }
    out.accuracy = static_cast<double>(correct) / static_cast<double>(samples.size());
    out.mean_loss = std::accumulate(losses.begin(), losses.end(), 0.0) /
                    static_cast<double>(samples.size());
    return out;
}

double classical_baseline_fit(const VectorDataset& data, const TrainConfig& cfg,
                              std::vector<MetricsRow>* history) {
    cfg.validate();
    if (data.train_x.rows() == 0 || data.test_x.rows() == 0)
        throw ConfigError("baseline needs non-empty train and test splits");
    if (data.train_x.rows() != static_cast<long>(data.train_y.size()) ||
        data.test_x.rows() != static_cast<long>(data.test_y.size()))
        throw ConfigError("baseline labels do not match the vector count");
    int k = data.n_classes;
    long d = data.train_x.cols();

    Matrix w = Matrix::Zero(k, d);
    Vector b = Vector::Zero(k);
    AdamState w_state, b_state;

    auto accuracy_of = [&](const Matrix& x, const std::vector<int>& y) {
        long correct = 0;
        for (long m = 0; m < x.rows(); ++m) {
            Vector z = w * x.row(m).transpose() + b;
            int best = 0;
            for (int c = 1; c < k; ++c)
                if (z[c] > z[best]) best = c;
            if (best == y[m]) ++correct;
        }
        return static_cast<double>(correct) / static_cast<double>(x.rows());
    };

    Rng shuffle_rng(mix_seed(cfg.seed, {0x5485ull}));
    std::vector<int> order(data.train_x.rows());
    std::iota(order.begin(), order.end(), 0);

    long iter = 0;
    double test_acc = 0.0, train_acc = 0.0;
    bool done = false;
    for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
        shuffle_rng.shuffle(order);
        for (std::size_t start = 0; start < order.size() && !done; start += cfg.batch_size) {
            std::size_t stop = std::min(order.size(), start + cfg.batch_size);
            long bsz = static_cast<long>(stop - start);
            Matrix xb(bsz, d);
            std::vector<int> yb(bsz);
            for (long m = 0; m < bsz; ++m) {
                xb.row(m) = data.train_x.row(order[start + m]);
                yb[m] = data.train_y[order[start + m]];
            }
            Matrix z = xb * w.transpose();
            z.rowwise() += b.transpose();
            Matrix p(bsz, k);
            double loss = 0.0;
            for (long m = 0; m < bsz; ++m) {
                Vector row = z.row(m).transpose();
                row.array() -= row.maxCoeff();
                Vector e = row.array().exp();
                p.row(m) = (e / e.sum()).transpose();
                loss += -std::log(std::max(p(m, yb[m]), 1e-12));
            }
            loss /= static_cast<double>(bsz);
            Matrix dz = p;
            for (long m = 0; m < bsz; ++m) dz(m, yb[m]) -= 1.0;
            Matrix wg = dz.transpose() * xb / static_cast<double>(bsz);
            Vector bg = dz.colwise().mean().transpose();

            Eigen::Map<Vector> wflat(w.data(), w.size());
            Eigen::Map<const Vector> wgflat(wg.data(), wg.size());
            Vector wvec = wflat, gvec = wgflat;
            adam_step(wvec, gvec, w_state, cfg.learning_rate);
            wflat = wvec;
            adam_step(b, bg, b_state, cfg.learning_rate);

            ++iter;
            bool last = (cfg.max_iterations > 0 && iter >= cfg.max_iterations) ||
                        (epoch + 1 == cfg.epochs && stop == order.size());
            if (iter == 1 || iter % cfg.eval_every == 0 || last) {
                train_acc = accuracy_of(data.train_x, data.train_y);
                test_acc = accuracy_of(data.test_x, data.test_y);
            }
            if (history) history->push_back({iter, loss, train_acc, test_acc});
            if (cfg.max_iterations > 0 && iter >= cfg.max_iterations) done = true;
        }
    }
    return test_acc;
}

} // namespace vsql
