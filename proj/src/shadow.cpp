#include "vsql/shadow.hpp"

#include <algorithm>

#include "vsql/rng.hpp"

namespace vsql {

namespace {

// Antidiagonal X x ... x X on the window space: flipping every window bit
// maps index i to dim-1-i.
CMatrix x_string_observable(int n_qsc) {
    long dim = 1L << n_qsc;
    CMatrix o = CMatrix::Zero(dim, dim);
    for (long i = 0; i < dim; ++i) o(i, dim - 1 - i) = 1.0;
    return o;
}

std::uint64_t shot_tag(std::uint64_t sample_tag, int s, int i, int param_plus1,
                       int shift_code) {
    return mix_seed(sample_tag, {static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(i),
                                 static_cast<std::uint64_t>(param_plus1),
                                 static_cast<std::uint64_t>(shift_code)});
}

} // namespace

void ShadowCircuit::validate() const {
    if (n_qsc < 1) throw DomainError("shadow circuit needs at least one qubit");
    if (depth < 0) throw DomainError("negative circuit depth");
    int max_param = -1;
    for (const Gate& g : gates) {
        int want = g.kind == GateKind::CNOT ? 2 : 1;
        if (static_cast<int>(g.targets.size()) != want)
            throw DomainError("gate has wrong target count");
        for (int q : g.targets)
            if (q < 0 || q >= n_qsc) throw DomainError("gate target outside window");
        if (gate_is_rotation(g.kind)) {
            if (g.parameter_index < 0) throw DomainError("rotation gate without parameter");
            max_param = std::max(max_param, g.parameter_index);
        }
    }
    if (n_params != max_param + 1)
        throw DomainError("n_params does not match the highest parameter index");
}

ShadowCircuit build_ansatz_qsd() {
    ShadowCircuit c;
    c.n_qsc = 1;
    c.depth = 0;
    c.gates.push_back({GateKind::RY, {0}, 0});
    c.n_params = 1;
    return c;
}

ShadowCircuit build_ansatz_mnist(int n_qsc, int depth) {
    if (n_qsc < 2) throw DomainError("image ansatz needs a window of at least 2 qubits");
    if (depth < 1) throw DomainError("image ansatz needs depth >= 1");
    ShadowCircuit c;
    c.n_qsc = n_qsc;
    c.depth = depth;
    int p = 0;
    for (GateKind kind : {GateKind::RZ, GateKind::RY, GateKind::RZ})
        for (int q = 0; q < n_qsc; ++q) c.gates.push_back({kind, {q}, p++});
    for (int d = 0; d < depth; ++d) {
        if (n_qsc == 2) {
            c.gates.push_back({GateKind::CNOT, {0, 1}, -1});
            c.gates.push_back({GateKind::CNOT, {1, 0}, -1});
        } else {
            for (int q = 0; q + 1 < n_qsc; ++q)
                c.gates.push_back({GateKind::CNOT, {q, q + 1}, -1});
        }
        for (int q = 0; q < n_qsc; ++q) c.gates.push_back({GateKind::RY, {q}, p++});
    }
    c.n_params = p;
    c.validate();
    return c;
}

ShadowCircuit build_ansatz_ry_cnot(int n_qsc, int n_layers) {
    if (n_qsc < 1) throw DomainError("ry-cnot ansatz needs at least one qubit");
    if (n_layers < 1) throw DomainError("ry-cnot ansatz needs at least one layer");
    ShadowCircuit c;
    c.n_qsc = n_qsc;
    c.depth = n_layers - 1;
    int p = 0;
    for (int layer = 0; layer < n_layers; ++layer) {
        for (int q = 0; q < n_qsc; ++q) c.gates.push_back({GateKind::RY, {q}, p++});
        if (layer + 1 < n_layers)
            for (int q = 0; q + 1 < n_qsc; ++q)
                c.gates.push_back({GateKind::CNOT, {q, q + 1}, -1});
    }
    c.n_params = p;
    c.validate();
    return c;
}

int ShadowEnsemble::n_qsc() const {
    if (circuits.empty()) throw DomainError("empty shadow ensemble");
    return circuits.front().n_qsc;
}

int ShadowEnsemble::n_windows(int n_qubits) const {
    int w = n_qsc();
    if (n_qubits < w) throw DomainError("register smaller than the circuit window");
    return n_qubits - w + 1;
}

void ShadowEnsemble::validate() const {
    if (circuits.empty()) throw DomainError("empty shadow ensemble");
    if (thetas.size() != circuits.size())
        throw DomainError("one angle vector per circuit required");
    int w = circuits.front().n_qsc;
    for (std::size_t s = 0; s < circuits.size(); ++s) {
        circuits[s].validate();
        if (circuits[s].n_qsc != w)
            throw DomainError("all circuits in an ensemble share one window width");
        if (thetas[s].size() != circuits[s].n_params)
            throw DomainError("angle vector length does not match circuit " + std::to_string(s));
    }
}

Vector FeatureMap::flat() const {
    Vector out(values.size());
    long k = 0;
    for (long s = 0; s < values.rows(); ++s)
        for (long i = 0; i < values.cols(); ++i) out[k++] = values(s, i);
    return out;
}

std::vector<CMatrix> window_rdms(const QuantumInput& input, int n_qsc) {
    int n = input_qubits(input);
    if (n < n_qsc) throw DomainError("register smaller than the circuit window");
    int windows = n - n_qsc + 1;
    std::vector<CMatrix> out;
    out.reserve(windows);
    for (int i = 0; i < windows; ++i)
        out.push_back(std::visit(
            [&](const auto& s) { return partial_trace_window(s, i, n_qsc).matrix; }, input));
    return out;
}

CMatrix conjugated_observable(const ShadowCircuit& circuit, const Vector& theta) {
    if (theta.size() != circuit.n_params)
        throw DomainError("angle vector length does not match circuit");
    CMatrix m = x_string_observable(circuit.n_qsc);
    for (auto it = circuit.gates.rbegin(); it != circuit.gates.rend(); ++it) {
        double angle = gate_is_rotation(it->kind) ? theta[it->parameter_index] : 0.0;
        conjugate_by_gate(m, circuit.n_qsc, *it, angle);
    }
    return m;
}

FeatureMap extract_features(const QuantumInput& input, const ShadowEnsemble& ensemble,
                            const ShotConfig& shots, std::uint64_t sample_tag) {
    ensemble.validate();
    shots.validate();
    int n = input_qubits(input);
    int w = ensemble.n_qsc();
    int windows = ensemble.n_windows(n);
    int n_circuits = static_cast<int>(ensemble.circuits.size());

    // Full-register window on a pure input: skip the RDM and run the circuit
    // on the statevector directly.
    if (w == n && std::holds_alternative<PureState>(input)) {
        const auto& pure = std::get<PureState>(input);
        FeatureMap fm;
        fm.values.resize(n_circuits, 1);
        for (int s = 0; s < n_circuits; ++s) {
            PureState run = pure;
            apply_circuit(run, ensemble.circuits[s].gates, ensemble.thetas[s]);
            fm.values(s, 0) =
                sample_expectation(expectation_xx(run, 0, n), shots, shot_tag(sample_tag, s, 0, 0, 0));
        }
        return fm;
    }

    std::vector<CMatrix> rdms = window_rdms(input, w);
    (void)windows;
    return extract_features_from_rdms(rdms, ensemble, shots, sample_tag);
}

FeatureMap extract_features_from_rdms(const std::vector<CMatrix>& rdms,
                                      const ShadowEnsemble& ensemble,
                                      const ShotConfig& shots, std::uint64_t sample_tag) {
    ensemble.validate();
    shots.validate();
    int n_circuits = static_cast<int>(ensemble.circuits.size());
    int windows = static_cast<int>(rdms.size());
    FeatureMap fm;
    fm.values.resize(n_circuits, windows);
    for (int s = 0; s < n_circuits; ++s) {
        CMatrix m = conjugated_observable(ensemble.circuits[s], ensemble.thetas[s]);
        for (int i = 0; i < windows; ++i) {
            // Tr(rho M) = sum_ab rho(a,b) M(b,a)
            double exact = rdms[i].transpose().cwiseProduct(m).sum().real();
            fm.values(s, i) = sample_expectation(exact, shots, shot_tag(sample_tag, s, i, 0, 0));
        }
    }
    return fm;
}

long count_parameters(int n_qubits, const ShadowEnsemble& ensemble, int n_classes) {
    ensemble.validate();
    if (n_classes < 1) throw DomainError("head needs at least one output");
    long circuit_params = 0;
    for (const ShadowCircuit& c : ensemble.circuits) circuit_params += c.n_params;
    long features =
        static_cast<long>(ensemble.circuits.size()) * ensemble.n_windows(n_qubits);
    return circuit_params + (features + 1) * n_classes;
}

std::uint64_t feature_shot_tag(std::uint64_t sample_tag, int s, int i, int param_plus1,
                               int shift_code) {
    return shot_tag(sample_tag, s, i, param_plus1, shift_code);
}

} // namespace vsql
