#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "vsql/rng.hpp"
#include "vsql/shadow.hpp"

using namespace vsql;

namespace {

const double kPi = std::acos(-1.0);

PureState qsd_class0(double u) {
    PureState s;
    s.n_qubits = 2;
    s.amplitudes = CVector::Zero(4);
    s.amplitudes[0] = std::sqrt(1 - u * u);
    s.amplitudes[2] = u;
    return s;
}

DensityMatrix qsd_class1(double v) {
    CVector a = CVector::Zero(4), b = CVector::Zero(4);
    a[1] = std::sqrt(1 - v * v);
    a[2] = v;
    b[1] = -std::sqrt(1 - v * v);
    b[2] = v;
    DensityMatrix rho;
    rho.n_qubits = 2;
    rho.matrix = 0.5 * (a * a.adjoint() + b * b.adjoint());
    return rho;
}

ShadowEnsemble single_ry(double theta) {
    ShadowEnsemble e;
    e.circuits = {build_ansatz_qsd()};
    e.thetas = {Vector::Constant(1, theta)};
    return e;
}

} // namespace

TEST_CASE("ansatz factories produce the advertised shapes") {
    ShadowCircuit qsd = build_ansatz_qsd();
    CHECK(qsd.n_qsc == 1);
    CHECK(qsd.n_params == 1);
    REQUIRE(qsd.gates.size() == 1);
    CHECK(qsd.gates[0].kind == GateKind::RY);
    REQUIRE_NOTHROW(qsd.validate());

    ShadowCircuit img = build_ansatz_mnist(2, 1);
    CHECK(img.n_qsc == 2);
    CHECK(img.n_params == 8);
    // 3 rotation columns, one CNOT pair block, one RY column
    CHECK(img.gates.size() == 10);
    REQUIRE_NOTHROW(img.validate());
    int cnots = 0;
    for (const Gate& g : img.gates) cnots += g.kind == GateKind::CNOT;
    CHECK(cnots == 2);

    ShadowCircuit img2 = build_ansatz_mnist(4, 5);
    CHECK(img2.n_params == 32);
    // chain topology: n_qsc - 1 CNOTs per block
    int cnots2 = 0;
    for (const Gate& g : img2.gates) cnots2 += g.kind == GateKind::CNOT;
    CHECK(cnots2 == 5 * 3);
    REQUIRE_NOTHROW(img2.validate());

    ShadowCircuit hw = build_ansatz_ry_cnot(2, 20);
    CHECK(hw.n_params == 40);
    REQUIRE_NOTHROW(hw.validate());

    CHECK_THROWS_AS(build_ansatz_mnist(1, 1), DomainError);
    CHECK_THROWS_AS(build_ansatz_mnist(2, 0), DomainError);

    ShadowCircuit broken = qsd;
    broken.n_params = 2;
    CHECK_THROWS_AS(broken.validate(), DomainError);
}

TEST_CASE("ensemble window geometry") {
    ShadowEnsemble e = single_ry(0.3);
    CHECK(e.n_qsc() == 1);
    CHECK(e.n_windows(2) == 2);
    CHECK(e.n_windows(10) == 10);
    REQUIRE_NOTHROW(e.validate());

    ShadowEnsemble two;
    two.circuits = {build_ansatz_mnist(2, 1), build_ansatz_mnist(2, 1)};
    two.thetas = {Vector::Zero(8), Vector::Zero(8)};
    CHECK(two.n_windows(10) == 9);
    REQUIRE_NOTHROW(two.validate());

    two.thetas[1] = Vector::Zero(7);
    CHECK_THROWS_AS(two.validate(), DomainError);
    two.thetas[1] = Vector::Zero(8);
    two.circuits[1] = build_ansatz_mnist(3, 1);
    two.thetas[1] = Vector::Zero(12);
    CHECK_THROWS_AS(two.validate(), DomainError);

    ShadowEnsemble empty;
    CHECK_THROWS_AS(empty.validate(), DomainError);
    CHECK_THROWS_AS(e.n_windows(0), DomainError);
}

TEST_CASE("discrimination features match their closed forms") {
    for (double theta : {0.0, 0.4, kPi / 4, 1.9, kPi}) {
        ShadowEnsemble e = single_ry(theta);
        for (double u : {0.0, 0.25, 0.7071067811865476, 0.9, 1.0}) {
            FeatureMap f = extract_features(qsd_class0(u), e);
            REQUIRE(f.values.rows() == 1);
            REQUIRE(f.values.cols() == 2);
            double o1 = (1 - 2 * u * u) * std::sin(theta) +
                        2 * u * std::sqrt(1 - u * u) * std::cos(theta);
            CHECK(f.values(0, 0) == Catch::Approx(o1).margin(1e-12));
            CHECK(f.values(0, 1) == Catch::Approx(std::sin(theta)).margin(1e-12));
        }
        for (double v : {0.0, 0.3, 0.8, 1.0}) {
            FeatureMap f = extract_features(qsd_class1(v), e);
            CHECK(f.values(0, 0) ==
                  Catch::Approx((1 - 2 * v * v) * std::sin(theta)).margin(1e-12));
            CHECK(f.values(0, 1) ==
                  Catch::Approx((2 * v * v - 1) * std::sin(theta)).margin(1e-12));
        }
    }
}

TEST_CASE("pure-state fast path agrees with the reduced-state path") {
    Rng rng(23);
    ShadowEnsemble e;
    e.circuits = {build_ansatz_mnist(2, 2), build_ansatz_mnist(2, 2)};
    e.thetas.resize(2);
    for (auto& th : e.thetas) {
        th.resize(e.circuits[0].n_params);
        for (long k = 0; k < th.size(); ++k) th[k] = rng.uniform(0.0, 2 * kPi);
    }

    PureState psi;
    psi.n_qubits = 4;
    psi.amplitudes.resize(16);
    for (long k = 0; k < 16; ++k) psi.amplitudes[k] = cxd(rng.normal(), rng.normal());
    psi.amplitudes /= psi.amplitudes.norm();

    FeatureMap direct = extract_features(psi, e);
    FeatureMap via_rdm = extract_features_from_rdms(window_rdms(psi, 2), e);
    REQUIRE(direct.values.rows() == 2);
    REQUIRE(direct.values.cols() == 3);
    CHECK((direct.values - via_rdm.values).cwiseAbs().maxCoeff() < 1e-12);

    DensityMatrix rho;
    rho.n_qubits = 4;
    rho.matrix = psi.amplitudes * psi.amplitudes.adjoint();
    FeatureMap mixed = extract_features(rho, e);
    CHECK((direct.values - mixed.values).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("conjugated observable reproduces direct evolution") {
    Rng rng(6);
    ShadowCircuit c = build_ansatz_mnist(3, 2);
    Vector theta(c.n_params);
    for (long k = 0; k < theta.size(); ++k) theta[k] = rng.uniform(0.0, 2 * kPi);

    CMatrix m = conjugated_observable(c, theta);
    CHECK((m - m.adjoint()).cwiseAbs().maxCoeff() < 1e-12);

    PureState psi;
    psi.n_qubits = 3;
    psi.amplitudes.resize(8);
    for (long k = 0; k < 8; ++k) psi.amplitudes[k] = cxd(rng.normal(), rng.normal());
    psi.amplitudes /= psi.amplitudes.norm();

    PureState evolved = psi;
    apply_circuit(evolved, c.gates, theta);
    double direct = expectation_xx(evolved, 0, 3);
    double via = (psi.amplitudes.adjoint() * m * psi.amplitudes)(0).real();
    CHECK(via == Catch::Approx(direct).margin(1e-11));
}

TEST_CASE("image ansatz at zero angles yields zero features on basis input") {
    ShadowEnsemble e;
    e.circuits = {build_ansatz_mnist(2, 1)};
    e.thetas = {Vector::Zero(8)};
    PureState basis = build_basis_state(5, 9);
    FeatureMap f = extract_features(basis, e);
    CHECK(f.values.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("flattening is circuit-major") {
    FeatureMap f;
    f.values.resize(2, 3);
    f.values << 1, 2, 3, 4, 5, 6;
    Vector flat = f.flat();
    REQUIRE(flat.size() == 6);
    for (int s = 0; s < 2; ++s)
        for (int i = 0; i < 3; ++i) CHECK(flat[s * 3 + i] == f.values(s, i));
}

TEST_CASE("trainable-parameter counts for the standard configurations") {
    auto make = [](const ShadowCircuit& c, int n_circuits) {
        ShadowEnsemble e;
        for (int s = 0; s < n_circuits; ++s) {
            e.circuits.push_back(c);
            e.thetas.push_back(Vector::Zero(c.n_params));
        }
        return e;
    };
    CHECK(count_parameters(10, make(build_ansatz_mnist(2, 1), 1), 1) == 18);
    CHECK(count_parameters(10, make(build_ansatz_mnist(2, 1), 2), 1) == 35);
    CHECK(count_parameters(10, make(build_ansatz_mnist(4, 5), 5), 10) == 520);
    CHECK(count_parameters(10, make(build_ansatz_mnist(4, 5), 9), 10) == 928);
    CHECK(count_parameters(50, make(build_ansatz_ry_cnot(2, 20), 1), 1) == 90);
}

TEST_CASE("sampled features stay deterministic per location") {
    ShadowEnsemble e = single_ry(1.1);
    ShotConfig shots{ShotMode::Sampled, 200, 9};
    PureState s = qsd_class0(0.6);

    FeatureMap a = extract_features(s, e, shots, 4);
    FeatureMap b = extract_features(s, e, shots, 4);
    CHECK((a.values - b.values).cwiseAbs().maxCoeff() == 0.0);

    FeatureMap c = extract_features(s, e, shots, 5);
    CHECK((a.values - c.values).cwiseAbs().maxCoeff() > 0.0);

    FeatureMap exact = extract_features(s, e);
    CHECK((a.values - exact.values).cwiseAbs().maxCoeff() < 0.35);

    // distinct tag components map to distinct substreams
    std::uint64_t t1 = feature_shot_tag(4, 0, 1, 0, 0);
    std::uint64_t t2 = feature_shot_tag(4, 1, 0, 0, 0);
    std::uint64_t t3 = feature_shot_tag(4, 0, 1, 2, 1);
    CHECK(t1 != t2);
    CHECK(t1 != t3);
}
