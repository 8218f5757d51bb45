#include "vsql/qcore.hpp"

#include <cmath>

#include "vsql/rng.hpp"

namespace vsql {

namespace {

constexpr double kNormTol = 1e-8;

long dim_of(int n_qubits) { return 1L << n_qubits; }

// bit position of qubit q in a basis index (big-endian: qubit 0 is the MSB)
long bit_stride(int n_qubits, int q) { return 1L << (n_qubits - 1 - q); }

void check_register(int n_qubits) {
    if (n_qubits < 1 || n_qubits > 30)
        throw DomainError("qubit count out of range: " + std::to_string(n_qubits));
}

void check_gate(const Gate& gate, int n_qubits, const Vector& params) {
    int want_targets = gate.kind == GateKind::CNOT ? 2 : 1;
    if (static_cast<int>(gate.targets.size()) != want_targets)
        throw DomainError("gate has wrong target count");
    for (int q : gate.targets)
        if (q < 0 || q >= n_qubits)
            throw DomainError("gate target " + std::to_string(q) + " outside register");
    if (gate.kind == GateKind::CNOT && gate.targets[0] == gate.targets[1])
        throw DomainError("cnot control equals target");
    if (gate_is_rotation(gate.kind)) {
        if (gate.parameter_index < 0 || gate.parameter_index >= params.size())
            throw DomainError("rotation parameter index out of range");
    }
}

Eigen::Matrix2cd gate_matrix(const Gate& gate, double angle) {
    return gate_is_rotation(gate.kind) ? rotation_matrix(gate.kind, angle)
                                       : pauli_matrix(gate.kind);
}

double gate_angle(const Gate& gate, const Vector& params) {
    return gate_is_rotation(gate.kind) ? params[gate.parameter_index] : 0.0;
}

void apply_mat2(CVector& amps, int n_qubits, int q, const Eigen::Matrix2cd& g) {
    long stride = bit_stride(n_qubits, q);
    long dim = amps.size();
    for (long i = 0; i < dim; ++i) {
        if (i & stride) continue;
        cxd x0 = amps[i];
        cxd x1 = amps[i | stride];
        amps[i] = g(0, 0) * x0 + g(0, 1) * x1;
        amps[i | stride] = g(1, 0) * x0 + g(1, 1) * x1;
    }
}

void apply_cnot(CVector& amps, int n_qubits, int control, int target) {
    long cs = bit_stride(n_qubits, control);
    long ts = bit_stride(n_qubits, target);
    long dim = amps.size();
    for (long i = 0; i < dim; ++i)
        if ((i & cs) && !(i & ts)) std::swap(amps[i], amps[i | ts]);
}

// M <- (G x I) M
void mat2_left(CMatrix& m, int n_qubits, int q, const Eigen::Matrix2cd& g) {
    long stride = bit_stride(n_qubits, q);
    long dim = m.rows();
    for (long i = 0; i < dim; ++i) {
        if (i & stride) continue;
        for (long col = 0; col < dim; ++col) {
            cxd x0 = m(i, col);
            cxd x1 = m(i | stride, col);
            m(i, col) = g(0, 0) * x0 + g(0, 1) * x1;
            m(i | stride, col) = g(1, 0) * x0 + g(1, 1) * x1;
        }
    }
}

// M <- M (G x I)
void mat2_right(CMatrix& m, int n_qubits, int q, const Eigen::Matrix2cd& g) {
    long stride = bit_stride(n_qubits, q);
    long dim = m.rows();
    for (long j = 0; j < dim; ++j) {
        if (j & stride) continue;
        for (long row = 0; row < dim; ++row) {
            cxd y0 = m(row, j);
            cxd y1 = m(row, j | stride);
            m(row, j) = y0 * g(0, 0) + y1 * g(1, 0);
            m(row, j | stride) = y0 * g(0, 1) + y1 * g(1, 1);
        }
    }
}

void cnot_left(CMatrix& m, int n_qubits, int control, int target) {
    long cs = bit_stride(n_qubits, control);
    long ts = bit_stride(n_qubits, target);
    long dim = m.rows();
    for (long i = 0; i < dim; ++i)
        if ((i & cs) && !(i & ts)) m.row(i).swap(m.row(i | ts));
}

void cnot_right(CMatrix& m, int n_qubits, int control, int target) {
    long cs = bit_stride(n_qubits, control);
    long ts = bit_stride(n_qubits, target);
    long dim = m.cols();
    for (long j = 0; j < dim; ++j)
        if ((j & cs) && !(j & ts)) m.col(j).swap(m.col(j | ts));
}

void check_window(int n_qubits, int window_start, int window_size) {
    if (window_size < 1 || window_start < 0 || window_start + window_size > n_qubits)
        throw DomainError("window [" + std::to_string(window_start) + ", " +
                          std::to_string(window_start + window_size) +
                          ") outside register of " + std::to_string(n_qubits) + " qubits");
}

long window_mask(int n_qubits, int window_start, int window_size) {
    return ((1L << window_size) - 1) << (n_qubits - window_start - window_size);
}

} // namespace

bool gate_is_rotation(GateKind kind) {
    return kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

Eigen::Matrix2cd rotation_matrix(GateKind kind, double t) {
    double c = std::cos(t / 2.0);
    double s = std::sin(t / 2.0);
    Eigen::Matrix2cd g;
    switch (kind) {
    case GateKind::RX:
        g << cxd(c, 0), cxd(0, -s), cxd(0, -s), cxd(c, 0);
        return g;
    case GateKind::RY:
        g << cxd(c, 0), cxd(-s, 0), cxd(s, 0), cxd(c, 0);
        return g;
    case GateKind::RZ:
        g << cxd(c, -s), cxd(0, 0), cxd(0, 0), cxd(c, s);
        return g;
    default:
        throw DomainError("rotation_matrix: not a rotation gate");
    }
}

Eigen::Matrix2cd pauli_matrix(GateKind kind) {
    Eigen::Matrix2cd g;
    switch (kind) {
    case GateKind::X:
    case GateKind::RX:
        g << 0, 1, 1, 0;
        return g;
    case GateKind::Y:
    case GateKind::RY:
        g << cxd(0, 0), cxd(0, -1), cxd(0, 1), cxd(0, 0);
        return g;
    case GateKind::Z:
    case GateKind::RZ:
        g << 1, 0, 0, -1;
        return g;
    default:
        throw DomainError("pauli_matrix: no generator for this gate");
    }
}

void PureState::validate() const {
    check_register(n_qubits);
    if (amplitudes.size() != dim_of(n_qubits))
        throw DomainError("amplitude vector length does not match qubit count");
    if (!amplitudes.allFinite()) throw DomainError("non-finite amplitude");
    double norm = amplitudes.norm();
    if (std::abs(norm - 1.0) > kNormTol)
        throw DomainError("state norm " + std::to_string(norm) + " is not 1");
}

void DensityMatrix::validate() const {
    check_register(n_qubits);
    long dim = dim_of(n_qubits);
    if (matrix.rows() != dim || matrix.cols() != dim)
        throw DomainError("density matrix shape does not match qubit count");
    if (!matrix.allFinite()) throw DomainError("non-finite density matrix entry");
    if ((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() > kNormTol)
        throw DomainError("density matrix is not Hermitian");
    if (std::abs(matrix.trace().real() - 1.0) > kNormTol ||
        std::abs(matrix.trace().imag()) > kNormTol)
        throw DomainError("density matrix trace is not 1");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(matrix, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-8)
        throw DomainError("density matrix has a negative eigenvalue");
}

int input_qubits(const QuantumInput& input) {
    return std::visit([](const auto& s) { return s.n_qubits; }, input);
}

void ShotConfig::validate() const {
    if (mode == ShotMode::Sampled && shots <= 0)
        throw ConfigError("sampled shot mode requires shots > 0");
}

PureState build_basis_state(int n_qubits, std::uint64_t index) {
    check_register(n_qubits);
    long dim = dim_of(n_qubits);
    if (index >= static_cast<std::uint64_t>(dim))
        throw DomainError("basis index " + std::to_string(index) + " outside register");
    PureState s;
    s.n_qubits = n_qubits;
    s.amplitudes = CVector::Zero(dim);
    s.amplitudes[static_cast<long>(index)] = 1.0;
    return s;
}

void apply_circuit(PureState& state, const std::vector<Gate>& gates,
                   const Vector& params, int window_start) {
    for (const Gate& g0 : gates) {
        Gate g = g0;
        for (int& q : g.targets) q += window_start;
        check_gate(g, state.n_qubits, params);
        if (g.kind == GateKind::CNOT)
            apply_cnot(state.amplitudes, state.n_qubits, g.targets[0], g.targets[1]);
        else
            apply_mat2(state.amplitudes, state.n_qubits, g.targets[0],
                       gate_matrix(g, gate_angle(g, params)));
    }
}

void apply_circuit(DensityMatrix& rho, const std::vector<Gate>& gates,
                   const Vector& params, int window_start) {
    for (const Gate& g0 : gates) {
        Gate g = g0;
        for (int& q : g.targets) q += window_start;
        check_gate(g, rho.n_qubits, params);
        if (g.kind == GateKind::CNOT) {
            cnot_left(rho.matrix, rho.n_qubits, g.targets[0], g.targets[1]);
            cnot_right(rho.matrix, rho.n_qubits, g.targets[0], g.targets[1]);
        } else {
            Eigen::Matrix2cd m = gate_matrix(g, gate_angle(g, params));
            mat2_left(rho.matrix, rho.n_qubits, g.targets[0], m);
            mat2_right(rho.matrix, rho.n_qubits, g.targets[0], m.adjoint());
        }
    }
}

void conjugate_by_gate(CMatrix& m, int n_qubits, const Gate& gate, double angle,
                       int window_start) {
    Gate g = gate;
    for (int& q : g.targets) q += window_start;
    Vector dummy = Vector::Zero(std::max(0, g.parameter_index + 1));
    if (gate_is_rotation(g.kind) && g.parameter_index >= 0) dummy[g.parameter_index] = angle;
    check_gate(g, n_qubits, dummy);
    if (g.kind == GateKind::CNOT) {
        // self-inverse permutation: conjugation applies it on both sides
        cnot_left(m, n_qubits, g.targets[0], g.targets[1]);
        cnot_right(m, n_qubits, g.targets[0], g.targets[1]);
        return;
    }
    Eigen::Matrix2cd u = gate_matrix(g, angle);
    mat2_left(m, n_qubits, g.targets[0], u.adjoint());
    mat2_right(m, n_qubits, g.targets[0], u);
}

double expectation_xx(const PureState& state, int window_start, int window_size) {
    check_window(state.n_qubits, window_start, window_size);
    long mask = window_mask(state.n_qubits, window_start, window_size);
    long dim = state.amplitudes.size();
    cxd acc = 0.0;
    for (long i = 0; i < dim; ++i)
        acc += std::conj(state.amplitudes[i]) * state.amplitudes[i ^ mask];
    return acc.real();
}

double expectation_xx(const DensityMatrix& rho, int window_start, int window_size) {
    check_window(rho.n_qubits, window_start, window_size);
    long mask = window_mask(rho.n_qubits, window_start, window_size);
    long dim = rho.matrix.rows();
    cxd acc = 0.0;
    for (long i = 0; i < dim; ++i) acc += rho.matrix(i, i ^ mask);
    return acc.real();
}

DensityMatrix partial_trace_window(const PureState& state, int window_start, int window_size) {
    check_window(state.n_qubits, window_start, window_size);
    int right_bits = state.n_qubits - window_start - window_size;
    long nl = 1L << window_start;
    long nw = 1L << window_size;
    long nr = 1L << right_bits;
    DensityMatrix out;
    out.n_qubits = window_size;
    out.matrix = CMatrix::Zero(nw, nw);
    for (long l = 0; l < nl; ++l) {
        long base = l << (window_size + right_bits);
        for (long a = 0; a < nw; ++a) {
            long ia = base | (a << right_bits);
            for (long b = 0; b < nw; ++b) {
                long ib = base | (b << right_bits);
                cxd acc = 0.0;
                for (long r = 0; r < nr; ++r)
                    acc += state.amplitudes[ia | r] * std::conj(state.amplitudes[ib | r]);
                out.matrix(a, b) += acc;
            }
        }
    }
    return out;
}

DensityMatrix partial_trace_window(const DensityMatrix& rho, int window_start, int window_size) {
    check_window(rho.n_qubits, window_start, window_size);
    int right_bits = rho.n_qubits - window_start - window_size;
    long nl = 1L << window_start;
    long nw = 1L << window_size;
    long nr = 1L << right_bits;
    DensityMatrix out;
    out.n_qubits = window_size;
    out.matrix = CMatrix::Zero(nw, nw);
    for (long l = 0; l < nl; ++l) {
        long base = l << (window_size + right_bits);
        for (long a = 0; a < nw; ++a) {
            long ia = base | (a << right_bits);
            for (long b = 0; b < nw; ++b) {
                long ib = base | (b << right_bits);
                cxd acc = 0.0;
                for (long r = 0; r < nr; ++r) acc += rho.matrix(ia | r, ib | r);
                out.matrix(a, b) += acc;
            }
        }
    }
    return out;
}

double sample_expectation(double exact_value, const ShotConfig& cfg, std::uint64_t tag) {
    cfg.validate();
    if (cfg.mode == ShotMode::Exact) return exact_value;
    double p = (1.0 + exact_value) / 2.0;
    p = std::min(1.0, std::max(0.0, p)); // guard rounding just outside [-1, 1]
    Rng rng(mix_seed(cfg.seed, {tag}));
    long hits = 0;
    for (long k = 0; k < cfg.shots; ++k)
        if (rng.uniform() < p) ++hits;
    return 2.0 * static_cast<double>(hits) / static_cast<double>(cfg.shots) - 1.0;
}

} // namespace vsql
