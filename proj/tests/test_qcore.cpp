#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "vsql/qcore.hpp"
#include "vsql/rng.hpp"

using namespace vsql;

namespace {

const double kPi = std::acos(-1.0);

PureState random_state(int n, Rng& rng) {
    PureState psi;
    psi.n_qubits = n;
    psi.amplitudes.resize(1L << n);
    for (long k = 0; k < psi.amplitudes.size(); ++k)
        psi.amplitudes[k] = cxd(rng.normal(), rng.normal());
    psi.amplitudes /= psi.amplitudes.norm();
    return psi;
}

DensityMatrix to_density(const PureState& psi) {
    DensityMatrix rho;
    rho.n_qubits = psi.n_qubits;
    rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
    return rho;
}

std::vector<Gate> random_circuit(int n, int n_gates, Rng& rng, Vector& params) {
    std::vector<Gate> gates;
    std::vector<double> angles;
    for (int g = 0; g < n_gates; ++g) {
        int pick = static_cast<int>(rng.integer(n >= 2 ? 7 : 6));
        GateKind kind = static_cast<GateKind>(pick);
        Gate gate;
        gate.kind = kind;
        if (kind == GateKind::CNOT) {
            int c = static_cast<int>(rng.integer(n));
            int t = static_cast<int>(rng.integer(n - 1));
            if (t >= c) ++t;
            gate.targets = {c, t};
        } else {
            gate.targets = {static_cast<int>(rng.integer(n))};
        }
        if (gate_is_rotation(kind)) {
            gate.parameter_index = static_cast<int>(angles.size());
            angles.push_back(rng.uniform(0.0, 2 * kPi));
        }
        gates.push_back(gate);
    }
    params = Eigen::Map<Vector>(angles.data(), static_cast<long>(angles.size()));
    return gates;
}

} // namespace

TEST_CASE("basis states use big-endian qubit order") {
    PureState s = build_basis_state(2, 2); // |10>
    REQUIRE(s.amplitudes.size() == 4);
    CHECK(std::abs(s.amplitudes[2] - cxd(1, 0)) < 1e-15);
    CHECK(s.amplitudes.norm() == Catch::Approx(1.0));

    Gate x0{GateKind::X, {0}, -1};
    PureState t = build_basis_state(2, 0);
    apply_circuit(t, {x0}, {});
    // X on qubit 0 flips the most significant bit: |00> -> |10>
    CHECK(std::abs(t.amplitudes[2] - cxd(1, 0)) < 1e-15);

    CHECK_THROWS_AS(build_basis_state(2, 4), DomainError);
}

TEST_CASE("rotation matrices match their closed forms") {
    double t = 0.7321;
    Eigen::Matrix2cd ry = rotation_matrix(GateKind::RY, t);
    CHECK(std::abs(ry(0, 0) - cxd(std::cos(t / 2), 0)) < 1e-15);
    CHECK(std::abs(ry(0, 1) - cxd(-std::sin(t / 2), 0)) < 1e-15);
    CHECK(std::abs(ry(1, 0) - cxd(std::sin(t / 2), 0)) < 1e-15);
    CHECK(std::abs(ry(1, 1) - cxd(std::cos(t / 2), 0)) < 1e-15);

    Eigen::Matrix2cd rx = rotation_matrix(GateKind::RX, t);
    CHECK(std::abs(rx(0, 1) - cxd(0, -std::sin(t / 2))) < 1e-15);
    CHECK(std::abs(rx(0, 0) - cxd(std::cos(t / 2), 0)) < 1e-15);

    Eigen::Matrix2cd rz = rotation_matrix(GateKind::RZ, t);
    CHECK(std::abs(rz(0, 0) - std::exp(cxd(0, -t / 2))) < 1e-15);
    CHECK(std::abs(rz(1, 1) - std::exp(cxd(0, t / 2))) < 1e-15);
    CHECK(std::abs(rz(0, 1)) == 0.0);

    // exp(-i t P / 2) at t = pi equals -i P for every generator
    for (GateKind k : {GateKind::RX, GateKind::RY, GateKind::RZ}) {
        Eigen::Matrix2cd lhs = rotation_matrix(k, kPi);
        Eigen::Matrix2cd rhs = cxd(0, -1) * pauli_matrix(k);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-15);
    }
    CHECK_THROWS_AS(rotation_matrix(GateKind::X, 1.0), DomainError);
    CHECK_THROWS_AS(pauli_matrix(GateKind::CNOT), DomainError);
}

TEST_CASE("single-gate circuit actions on small registers") {
    PureState plus = build_basis_state(1, 0);
    Vector half_pi(1);
    half_pi << kPi / 2;
    apply_circuit(plus, {Gate{GateKind::RY, {0}, 0}}, half_pi);
    CHECK(std::abs(plus.amplitudes[0] - cxd(1 / std::sqrt(2), 0)) < 1e-12);
    CHECK(std::abs(plus.amplitudes[1] - cxd(1 / std::sqrt(2), 0)) < 1e-12);

    PureState c = build_basis_state(2, 2); // |10>
    apply_circuit(c, {Gate{GateKind::CNOT, {0, 1}, -1}}, {});
    CHECK(std::abs(c.amplitudes[3] - cxd(1, 0)) < 1e-15); // -> |11>

    PureState nc = build_basis_state(2, 1); // |01>, control clear
    apply_circuit(nc, {Gate{GateKind::CNOT, {0, 1}, -1}}, {});
    CHECK(std::abs(nc.amplitudes[1] - cxd(1, 0)) < 1e-15);

    PureState z = build_basis_state(1, 1);
    apply_circuit(z, {Gate{GateKind::Z, {0}, -1}}, {});
    CHECK(std::abs(z.amplitudes[1] - cxd(-1, 0)) < 1e-15);

    PureState y = build_basis_state(1, 0);
    apply_circuit(y, {Gate{GateKind::Y, {0}, -1}}, {});
    CHECK(std::abs(y.amplitudes[1] - cxd(0, 1)) < 1e-15);
}

TEST_CASE("window offsets shift gate targets") {
    PureState s = build_basis_state(3, 0);
    apply_circuit(s, {Gate{GateKind::X, {0}, -1}}, {}, 2); // acts on qubit 2
    CHECK(std::abs(s.amplitudes[1] - cxd(1, 0)) < 1e-15);  // |001>
}

TEST_CASE("circuits preserve norm and match the density-matrix path") {
    Rng rng(41);
    for (int rep = 0; rep < 12; ++rep) {
        int n = 1 + static_cast<int>(rng.integer(3));
        PureState psi = random_state(n, rng);
        DensityMatrix rho = to_density(psi);
        Vector params;
        std::vector<Gate> gates = random_circuit(n, 6, rng, params);

        apply_circuit(psi, gates, params);
        apply_circuit(rho, gates, params);

        CHECK(psi.amplitudes.norm() == Catch::Approx(1.0).epsilon(1e-12));
        CMatrix expected = psi.amplitudes * psi.amplitudes.adjoint();
        CHECK((rho.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE_NOTHROW(rho.validate());

        for (int w = 0; w + 1 <= n; ++w) {
            CHECK(expectation_xx(psi, w, 1) ==
                  Catch::Approx(expectation_xx(rho, w, 1)).margin(1e-12));
        }
    }
}

TEST_CASE("x-string expectations on known states") {
    PureState plus = build_basis_state(1, 0);
    Vector a(1);
    a << kPi / 2;
    apply_circuit(plus, {Gate{GateKind::RY, {0}, 0}}, a);
    CHECK(expectation_xx(plus, 0, 1) == Catch::Approx(1.0).margin(1e-12));

    PureState minus = build_basis_state(1, 1);
    apply_circuit(minus, {Gate{GateKind::RY, {0}, 0}}, a);
    CHECK(expectation_xx(minus, 0, 1) == Catch::Approx(-1.0).margin(1e-12));

    PureState zero = build_basis_state(1, 0);
    CHECK(expectation_xx(zero, 0, 1) == Catch::Approx(0.0).margin(1e-15));

    // Bell state (|00> + |11>)/sqrt(2): <XX> = 1, single-qubit <X> = 0
    PureState bell;
    bell.n_qubits = 2;
    bell.amplitudes = CVector::Zero(4);
    bell.amplitudes[0] = bell.amplitudes[3] = 1 / std::sqrt(2);
    CHECK(expectation_xx(bell, 0, 2) == Catch::Approx(1.0).margin(1e-12));
    CHECK(expectation_xx(bell, 0, 1) == Catch::Approx(0.0).margin(1e-12));
    CHECK(expectation_xx(bell, 1, 1) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("partial traces of the parity-marked pair") {
    // (|000> + |110>)/sqrt(2) and (|000> - |110>)/sqrt(2)
    PureState p, m;
    p.n_qubits = m.n_qubits = 3;
    p.amplitudes = CVector::Zero(8);
    m.amplitudes = CVector::Zero(8);
    p.amplitudes[0] = p.amplitudes[6] = 1 / std::sqrt(2);
    m.amplitudes[0] = 1 / std::sqrt(2);
    m.amplitudes[6] = -1 / std::sqrt(2);

    for (int q = 0; q < 2; ++q) {
        DensityMatrix rp = partial_trace_window(p, q, 1);
        DensityMatrix rm = partial_trace_window(m, q, 1);
        CHECK((rp.matrix - rm.matrix).cwiseAbs().maxCoeff() < 1e-14);
        CHECK(std::abs(rp.matrix(0, 0) - cxd(0.5, 0)) < 1e-14);
        CHECK(std::abs(rp.matrix(0, 1)) < 1e-14);
    }
    DensityMatrix q2 = partial_trace_window(p, 2, 1);
    CHECK(std::abs(q2.matrix(0, 0) - cxd(1, 0)) < 1e-14);

    DensityMatrix wp = partial_trace_window(p, 0, 2);
    DensityMatrix wm = partial_trace_window(m, 0, 2);
    CHECK(std::abs(wp.matrix(0, 3) - cxd(0.5, 0)) < 1e-14);
    CHECK(std::abs(wm.matrix(0, 3) - cxd(-0.5, 0)) < 1e-14);
    CHECK((wp.matrix - wm.matrix).cwiseAbs().maxCoeff() > 0.9);
}

TEST_CASE("partial trace returns valid states and preserves window expectations") {
    Rng rng(97);
    for (int rep = 0; rep < 8; ++rep) {
        int n = 2 + static_cast<int>(rng.integer(3));
        PureState psi = random_state(n, rng);
        int w = 1 + static_cast<int>(rng.integer(n - 1));
        int start = static_cast<int>(rng.integer(n - w + 1));

        DensityMatrix rdm = partial_trace_window(psi, start, w);
        REQUIRE_NOTHROW(rdm.validate());
        CHECK(expectation_xx(rdm, 0, w) ==
              Catch::Approx(expectation_xx(psi, start, w)).margin(1e-12));

        DensityMatrix rho = to_density(psi);
        DensityMatrix rdm2 = partial_trace_window(rho, start, w);
        CHECK((rdm.matrix - rdm2.matrix).cwiseAbs().maxCoeff() < 1e-12);
    }
    PureState psi = random_state(3, rng);
    CHECK_THROWS_AS(partial_trace_window(psi, 2, 2), DomainError);
}

TEST_CASE("observable conjugation matches state evolution") {
    Rng rng(7);
    for (int rep = 0; rep < 8; ++rep) {
        int n = 1 + static_cast<int>(rng.integer(2));
        PureState psi = random_state(n, rng);
        Vector params;
        std::vector<Gate> gates = random_circuit(n, 5, rng, params);

        PureState evolved = psi;
        apply_circuit(evolved, gates, params);
        double direct = expectation_xx(evolved, 0, n);

        // push the circuit into the observable instead
        long dim = 1L << n;
        CMatrix m = CMatrix::Zero(dim, dim);
        for (long k = 0; k < dim; ++k) m(k, dim - 1 - k) = 1; // X tensor string
        for (auto it = gates.rbegin(); it != gates.rend(); ++it) {
            double angle = it->parameter_index >= 0 ? params[it->parameter_index] : 0.0;
            conjugate_by_gate(m, n, *it, angle);
        }
        double via_obs = (psi.amplitudes.adjoint() * m * psi.amplitudes)(0).real();
        CHECK(via_obs == Catch::Approx(direct).margin(1e-11));
    }
}

TEST_CASE("state validation rejects malformed inputs") {
    PureState bad;
    bad.n_qubits = 2;
    bad.amplitudes = CVector::Zero(3);
    CHECK_THROWS_AS(bad.validate(), DomainError);

    bad.amplitudes = CVector::Zero(4);
    bad.amplitudes[0] = 2.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);

    DensityMatrix rho;
    rho.n_qubits = 1;
    rho.matrix = CMatrix::Zero(2, 2);
    rho.matrix(0, 1) = cxd(0, 1); // not Hermitian once trace fixed
    rho.matrix(0, 0) = rho.matrix(1, 1) = 0.5;
    rho.matrix(1, 0) = cxd(0, 1);
    CHECK_THROWS_AS(rho.validate(), DomainError);

    rho.matrix = CMatrix::Identity(2, 2); // trace 2
    CHECK_THROWS_AS(rho.validate(), DomainError);

    rho.matrix << 1.5, 0, 0, -0.5; // trace 1 but not PSD
    CHECK_THROWS_AS(rho.validate(), DomainError);

    PureState ok = build_basis_state(2, 1);
    REQUIRE_NOTHROW(ok.validate());
    CHECK_THROWS_AS(apply_circuit(ok, {Gate{GateKind::X, {5}, -1}}, {}), DomainError);
    CHECK_THROWS_AS(apply_circuit(ok, {Gate{GateKind::CNOT, {0, 0}, -1}}, {}), DomainError);
    CHECK_THROWS_AS(apply_circuit(ok, {Gate{GateKind::RY, {0}, 3}}, {}), DomainError);
}

TEST_CASE("shot sampling is exact in exact mode and deterministic when sampled") {
    ShotConfig exact;
    CHECK(sample_expectation(0.37, exact, 5) == 0.37);

    ShotConfig cfg;
    cfg.mode = ShotMode::Sampled;
    cfg.shots = 500;
    cfg.seed = 11;

    double a = sample_expectation(0.3, cfg, 42);
    double b = sample_expectation(0.3, cfg, 42);
    CHECK(a == b);
    // estimates are quantized to counts
    double scaled = (a + 1.0) / 2.0 * 500.0;
    CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);

    bool any_diff = false;
    for (std::uint64_t tag = 0; tag < 8; ++tag)
        any_diff = any_diff || sample_expectation(0.3, cfg, tag) != a;
    CHECK(any_diff);

    // degenerate probabilities are noiseless
    CHECK(sample_expectation(1.0, cfg, 3) == 1.0);
    CHECK(sample_expectation(-1.0, cfg, 3) == -1.0);
    CHECK(sample_expectation(1.0 + 1e-13, cfg, 3) == 1.0);

    // the estimator is unbiased: average over many substreams
    double mean = 0.0;
    int reps = 400;
    for (int k = 0; k < reps; ++k) mean += sample_expectation(0.2, cfg, 1000 + k);
    mean /= reps;
    CHECK(std::abs(mean - 0.2) < 0.01);

    ShotConfig bad;
    bad.mode = ShotMode::Sampled;
    bad.shots = 0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sampled variance shrinks with the shot budget") {
    ShotConfig coarse{ShotMode::Sampled, 32, 5};
    ShotConfig fine{ShotMode::Sampled, 8192, 5};
    auto spread = [](const ShotConfig& cfg) {
        double m = 0, m2 = 0;
        int reps = 200;
        for (int k = 0; k < reps; ++k) {
            double v = sample_expectation(0.0, cfg, 77000 + k);
            m += v;
            m2 += v * v;
        }
        m /= reps;
        return m2 / reps - m * m;
    };
    CHECK(spread(coarse) > 8 * spread(fine));
}
