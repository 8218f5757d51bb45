#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "vsql/common.hpp"

namespace vsql {

// Qubit ordering is big-endian throughout: qubit 0 is the most significant
// bit of a basis-state index. On two qubits |10> is index 2.

struct PureState {
    int n_qubits = 0;
    CVector amplitudes; // length 2^n_qubits, unit norm

    void validate() const; // throws DomainError on shape or norm violations
};

struct DensityMatrix {
    int n_qubits = 0;
    CMatrix matrix; // 2^n x 2^n, Hermitian, unit trace, PSD

    void validate() const;
};

using QuantumInput = std::variant<PureState, DensityMatrix>;

int input_qubits(const QuantumInput& input);

enum class GateKind { RX, RY, RZ, X, Y, Z, CNOT };

struct Gate {
    GateKind kind;
    std::vector<int> targets;  // qubit indices; CNOT is {control, target}
    int parameter_index = -1;  // index into the angle vector; -1 for fixed gates
};

bool gate_is_rotation(GateKind kind);

// 2x2 matrix of a rotation gate at angle t: exp(-i t P / 2)
Eigen::Matrix2cd rotation_matrix(GateKind kind, double t);

// Pauli matrix for X/Y/Z, or the generator Pauli for RX/RY/RZ
Eigen::Matrix2cd pauli_matrix(GateKind kind);

PureState build_basis_state(int n_qubits, std::uint64_t index);

// Apply a gate list in order. Gate targets are offset by `window_start`,
// which lets window-relative circuits act on a larger register. Rotation
// angles come from params[gate.parameter_index].
void apply_circuit(PureState& state, const std::vector<Gate>& gates,
                   const Vector& params, int window_start = 0);
void apply_circuit(DensityMatrix& rho, const std::vector<Gate>& gates,
                   const Vector& params, int window_start = 0);

// <X x ... x X> over the contiguous window [window_start, window_start + window_size)
double expectation_xx(const PureState& state, int window_start, int window_size);
double expectation_xx(const DensityMatrix& rho, int window_start, int window_size);

// Reduced state of the window qubits (all others traced out)
DensityMatrix partial_trace_window(const PureState& state, int window_start, int window_size);
DensityMatrix partial_trace_window(const DensityMatrix& rho, int window_start, int window_size);

enum class ShotMode { Exact, Sampled };

struct ShotConfig {
    ShotMode mode = ShotMode::Exact;
    long shots = 0; // required > 0 in sampled mode
    std::uint64_t seed = 0;

    void validate() const;
};

// Turn an exact +/-1-observable expectation into a finite-shot estimate by
// drawing `shots` Bernoulli outcomes with p = (1 + value) / 2. Pass-through
// in exact mode. `tag` selects the deterministic substream for one measured
// location, independent of evaluation order.
double sample_expectation(double exact_value, const ShotConfig& cfg, std::uint64_t tag = 0);

// Observable conjugation M <- G^dag M G used to push a circuit into the
// measured observable. Exposed for the feature and gradient paths.
void conjugate_by_gate(CMatrix& m, int n_qubits, const Gate& gate, double angle,
                       int window_start = 0);

} // namespace vsql
