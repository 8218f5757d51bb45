#pragma once

#include <cstdint>
#include <vector>

#include "vsql/qcore.hpp"

namespace vsql {

// A local circuit slid across the register. Gate targets are window-relative;
// the same parameter vector is reused at every window position.
struct ShadowCircuit {
    int n_qsc = 0;           // window width (qubits the circuit acts on)
    int depth = 0;           // entangling-block repetitions (ansatz-specific)
    std::vector<Gate> gates; // window-relative targets
    int n_params = 0;

    void validate() const;
};

// Single RY rotation on one qubit; the circuit used for the quantum-state
// discrimination tasks.
ShadowCircuit build_ansatz_qsd();

// Image-classification ansatz: an RZ-RY-RZ column on every window qubit,
// then `depth` blocks of [CNOT ring (pair for n_qsc=2, chain otherwise),
// RY column]. n_params = n_qsc * (depth + 3).
ShadowCircuit build_ansatz_mnist(int n_qsc, int depth);

// Hardware-efficient circuit used by the gradient-variance scan: n_layers RY
// columns separated by CNOT chains. n_params = n_qsc * n_layers.
ShadowCircuit build_ansatz_ry_cnot(int n_qsc, int n_layers);

struct ShadowEnsemble {
    std::vector<ShadowCircuit> circuits; // all share one window width
    std::vector<Vector> thetas;          // thetas[s].size() == circuits[s].n_params

    int n_qsc() const;
    int n_windows(int n_qubits) const; // n_qubits - n_qsc + 1, stride 1
    void validate() const;
};

// Shadow features: values(s, i) is the X-string expectation of circuit s at
// window i. Flattening is circuit-major: entry s * n_windows + i.
struct FeatureMap {
    Matrix values; // n_circuits x n_windows

    Vector flat() const;
};

// Reduced window states rho_i for every window position; they are the only
// part of the input the feature map sees, so they are computed once and
// shared across circuits.
std::vector<CMatrix> window_rdms(const QuantumInput& input, int n_qsc);

// U^dag (X x ... x X) U on the 2^n_qsc window space at the given angles.
CMatrix conjugated_observable(const ShadowCircuit& circuit, const Vector& theta);

FeatureMap extract_features(const QuantumInput& input, const ShadowEnsemble& ensemble,
                            const ShotConfig& shots = {}, std::uint64_t sample_tag = 0);

// Same features from precomputed window RDMs (trainer fast path).
FeatureMap extract_features_from_rdms(const std::vector<CMatrix>& rdms,
                                      const ShadowEnsemble& ensemble,
                                      const ShotConfig& shots = {},
                                      std::uint64_t sample_tag = 0);

// Trainable-parameter count of the full model: circuit angles plus the
// (n_features + 1) * n_classes affine head.
long count_parameters(int n_qubits, const ShadowEnsemble& ensemble, int n_classes);

// Substream id for the shot model at one measured location. param_plus1 is 0
// for a forward evaluation, l + 1 for a shift of parameter l; shift_code is
// 0 (none), 1 (+pi/2) or 2 (-pi/2).
std::uint64_t feature_shot_tag(std::uint64_t sample_tag, int s, int i, int param_plus1 = 0,
                               int shift_code = 0);

} // namespace vsql
