#include "vsql/grad.hpp"

#include <cmath>

#include "vsql/threading.hpp"

namespace vsql {

namespace {

// One shadow feature, exact expectation.
double feature_exact(const QuantumInput& input, const ShadowCircuit& circuit,
                     const Vector& theta, int window) {
    int n = input_qubits(input);
    if (circuit.n_qsc == n && std::holds_alternative<PureState>(input)) {
        PureState run = std::get<PureState>(input);
        apply_circuit(run, circuit.gates, theta);
        return expectation_xx(run, 0, n);
    }
    CMatrix rdm = std::visit(
        [&](const auto& s) { return partial_trace_window(s, window, circuit.n_qsc).matrix; },
        input);
    CMatrix m = conjugated_observable(circuit, theta);
    return rdm.transpose().cwiseProduct(m).sum().real();
}

void check_slot(const ShadowEnsemble& ensemble, int s, int i, int l, int n_qubits) {
    ensemble.validate();
    if (s < 0 || s >= static_cast<int>(ensemble.circuits.size()))
        throw DomainError("circuit index out of range");
    if (i < 0 || i >= ensemble.n_windows(n_qubits))
        throw DomainError("window index out of range");
    if (l < 0 || l >= ensemble.circuits[s].n_params)
        throw DomainError("parameter index out of range");
}

CMatrix embed_pauli(GateKind kind, int q, int n_qubits) {
    Eigen::Matrix2cd g = pauli_matrix(kind);
    long dim = 1L << n_qubits;
    long stride = 1L << (n_qubits - 1 - q);
    CMatrix p = CMatrix::Zero(dim, dim);
    for (long j = 0; j < dim; ++j) {
        int bj = (j & stride) ? 1 : 0;
        p(j & ~stride, j) = g(0, bj);
        p(j | stride, j) = g(1, bj);
    }
    return p;
}

} // namespace

double param_shift_grad(const QuantumInput& input, const ShadowEnsemble& ensemble,
                        int s, int i, int l, const ShotConfig& shots,
                        std::uint64_t sample_tag) {
    check_slot(ensemble, s, i, l, input_qubits(input));
    shots.validate();
    Vector plus = ensemble.thetas[s];
    Vector minus = ensemble.thetas[s];
    plus[l] += M_PI / 2.0;
    minus[l] -= M_PI / 2.0;
    double op = sample_expectation(feature_exact(input, ensemble.circuits[s], plus, i),
                                   shots, feature_shot_tag(sample_tag, s, i, l + 1, 1));
    double om = sample_expectation(feature_exact(input, ensemble.circuits[s], minus, i),
                                   shots, feature_shot_tag(sample_tag, s, i, l + 1, 2));
    return (op - om) / 2.0;
}

double analytic_grad(const QuantumInput& input, const ShadowEnsemble& ensemble,
                     int s, int i, int l) {
    check_slot(ensemble, s, i, l, input_qubits(input));
    const ShadowCircuit& circuit = ensemble.circuits[s];
    const Vector& theta = ensemble.thetas[s];
    int w = circuit.n_qsc;
    CMatrix rdm = std::visit(
        [&](const auto& st) { return partial_trace_window(st, i, w).matrix; }, input);

    double total = 0.0;
    // Sum over every gate carrying parameter l (product rule if shared).
    for (std::size_t gi = 0; gi < circuit.gates.size(); ++gi) {
        const Gate& gate = circuit.gates[gi];
        if (!gate_is_rotation(gate.kind) || gate.parameter_index != l) continue;

        // A = U_<= rho U_<=^dag, prefix inclusive of the gate at gi
        DensityMatrix a;
        a.n_qubits = w;
        a.matrix = rdm;
        std::vector<Gate> prefix(circuit.gates.begin(), circuit.gates.begin() + gi + 1);
        apply_circuit(a, prefix, theta);

        // B = U_>^dag O U_>
        long dim = 1L << w;
        CMatrix b = CMatrix::Zero(dim, dim);
        for (long r = 0; r < dim; ++r) b(r, dim - 1 - r) = 1.0;
        for (std::size_t k = circuit.gates.size(); k > gi + 1; --k) {
            const Gate& g2 = circuit.gates[k - 1];
            double angle = gate_is_rotation(g2.kind) ? theta[g2.parameter_index] : 0.0;
            conjugate_by_gate(b, w, g2, angle);
        }

        CMatrix p = embed_pauli(gate.kind, gate.targets[0], w);
        cxd tr = (b * (p * a.matrix - a.matrix * p)).trace();
        total += (cxd(0, -0.5) * tr).real();
    }
    return total;
}

double fd_grad(const QuantumInput& input, const ShadowEnsemble& ensemble,
               int s, int i, int l, double step) {
    check_slot(ensemble, s, i, l, input_qubits(input));
    if (step <= 0) throw DomainError("finite-difference step must be positive");
    Vector plus = ensemble.thetas[s];
    Vector minus = ensemble.thetas[s];
    plus[l] += step;
    minus[l] -= step;
    return (feature_exact(input, ensemble.circuits[s], plus, i) -
            feature_exact(input, ensemble.circuits[s], minus, i)) /
           (2.0 * step);
}

Vector flatten_hermitian(const CMatrix& m) {
    long sz = m.size();
    Vector out(2 * sz);
    const cxd* p = m.data();
    for (long k = 0; k < sz; ++k) {
        out[k] = p[k].real();
        out[sz + k] = p[k].imag();
    }
    return out;
}

PreparedSample prepare_sample(const QuantumInput& input, int n_qsc, int label,
                              std::uint64_t tag) {
    PreparedSample out;
    out.label = label;
    out.tag = tag;
    for (const CMatrix& rdm : window_rdms(input, n_qsc))
        out.rdm_flat.push_back(flatten_hermitian(rdm));
    return out;
}

BatchGrads loss_grad(const std::vector<const PreparedSample*>& batch,
                     const ShadowEnsemble& ensemble, const ClassifierHead& head,
                     LossKind kind, const ShotConfig& shots) {
    ensemble.validate();
    head.validate();
    shots.validate();
    if (batch.empty()) throw DomainError("empty gradient batch");
    int n_circuits = static_cast<int>(ensemble.circuits.size());
    int windows = static_cast<int>(batch.front()->rdm_flat.size());
    for (const PreparedSample* ps : batch)
        if (static_cast<int>(ps->rdm_flat.size()) != windows)
            throw DomainError("batch mixes window counts");
    if (head.w.cols() != static_cast<long>(n_circuits) * windows)
        throw DomainError("head width does not match the feature map");

    // Observables depend only on the angles: build the forward and the two
    // shifted versions per parameter once and share them across the batch.
    std::vector<Vector> fwd(n_circuits);
    std::vector<std::vector<Vector>> shift_plus(n_circuits), shift_minus(n_circuits);
    for (int s = 0; s < n_circuits; ++s) {
        fwd[s] = flatten_hermitian(conjugated_observable(ensemble.circuits[s], ensemble.thetas[s]));
        int np = ensemble.circuits[s].n_params;
        shift_plus[s].resize(np);
        shift_minus[s].resize(np);
        for (int l = 0; l < np; ++l) {
            Vector tp = ensemble.thetas[s];
            Vector tm = ensemble.thetas[s];
            tp[l] += M_PI / 2.0;
            tm[l] -= M_PI / 2.0;
            shift_plus[s][l] =
                flatten_hermitian(conjugated_observable(ensemble.circuits[s], tp));
            shift_minus[s][l] =
                flatten_hermitian(conjugated_observable(ensemble.circuits[s], tm));
        }
    }

    struct SampleOut {
        std::vector<Vector> theta;
        Matrix w;
        Vector b;
        double loss = 0.0;
    };
    std::vector<SampleOut> slots(batch.size());

    parallel_for(batch.size(), [&](std::size_t m) {
        const PreparedSample& ps = *batch[m];
        SampleOut& out = slots[m];

        Vector features(static_cast<long>(n_circuits) * windows);
        for (int s = 0; s < n_circuits; ++s)
            for (int i = 0; i < windows; ++i)
                features[static_cast<long>(s) * windows + i] =
                    sample_expectation(ps.rdm_flat[i].dot(fwd[s]), shots,
                                       feature_shot_tag(ps.tag, s, i, 0, 0));

        Prediction pred = head_forward(features, head);
        out.loss = head_loss(pred, ps.label, kind);
        HeadGrads hg = head_backward(features, pred, ps.label, head, kind);
        out.w = hg.w;
        out.b = hg.b;

        out.theta.resize(n_circuits);
        for (int s = 0; s < n_circuits; ++s) {
            int np = ensemble.circuits[s].n_params;
            out.theta[s] = Vector::Zero(np);
            for (int l = 0; l < np; ++l) {
                double acc = 0.0;
                for (int i = 0; i < windows; ++i) {
                    double op = sample_expectation(ps.rdm_flat[i].dot(shift_plus[s][l]),
                                                   shots,
                                                   feature_shot_tag(ps.tag, s, i, l + 1, 1));
                    double om = sample_expectation(ps.rdm_flat[i].dot(shift_minus[s][l]),
                                                   shots,
                                                   feature_shot_tag(ps.tag, s, i, l + 1, 2));
                    acc += hg.features[static_cast<long>(s) * windows + i] * (op - om) / 2.0;
                }
                out.theta[s][l] = acc;
            }
        }
    });

    // Deterministic index-order reduction
    BatchGrads total;
    total.theta.resize(n_circuits);
    for (int s = 0; s < n_circuits; ++s)
        total.theta[s] = Vector::Zero(ensemble.circuits[s].n_params);
    total.w = Matrix::Zero(head.w.rows(), head.w.cols());
    total.b = Vector::Zero(head.b.size());
    for (const SampleOut& out : slots) {
        for (int s = 0; s < n_circuits; ++s) total.theta[s] += out.theta[s];
        total.w += out.w;
        total.b += out.b;
        total.loss += out.loss;
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    for (int s = 0; s < n_circuits; ++s) total.theta[s] *= inv;
    total.w *= inv;
    total.b *= inv;
    total.loss *= inv;
    return total;
}

BatchGrads loss_grad(const std::vector<LabeledState>& batch, const ShadowEnsemble& ensemble,
                     const ClassifierHead& head, LossKind kind, const ShotConfig& shots) {
    ensemble.validate();
    if (batch.empty()) throw DomainError("empty gradient batch");
    std::vector<PreparedSample> prepared;
    prepared.reserve(batch.size());
    for (std::size_t m = 0; m < batch.size(); ++m)
        prepared.push_back(
            prepare_sample(batch[m].state, ensemble.n_qsc(), batch[m].label, m));
    std::vector<const PreparedSample*> ptrs;
    ptrs.reserve(prepared.size());
    for (const PreparedSample& ps : prepared) ptrs.push_back(&ps);
    return loss_grad(ptrs, ensemble, head, kind, shots);
}

} // namespace vsql
