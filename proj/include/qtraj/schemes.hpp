// Copyright 2026 The qtraj Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qtraj/core.hpp"

namespace qtraj {

struct SystemModel {
    int dim = 2;
    Matrix c;
    double gamma = 1.0;
    std::optional<Matrix> h_ext;

    void validate() const;
    static SystemModel qubit(const Matrix &c, double gamma = 1.0, std::optional<Matrix> h_ext = std::nullopt);
};

struct BathParams {
    Complex alpha{0.0, 0.0};
    double n_th = 0.0;
    double r = 0.0;
    double mu = 0.0;

    double N() const;
    Complex M() const;
    void validate() const;
};

struct SqueezeDerived {
    double N = 0;
    Complex M{0, 0};
    double L = 1;
    double L_prime = 1;
    double phi_sq = 0;
    Matrix c_sq;
};

SqueezeDerived derive_squeeze(const BathParams &bath, const Matrix &c);

struct OutcomeChannel {
    std::string label;
    std::vector<Matrix> branches;
    double innovation_value = 0;
    // Second record component; only used by two-quadrature schemes.
    double innovation_value2 = 0;
    Matrix povm;
};

struct KrausSet {
    std::vector<OutcomeChannel> outcomes;
    std::string scheme_tag;
    double delta_tau = 0;
    bool two_component = false;
    std::vector<std::string> warnings;

    int dim() const;
    // Recomputes every cached POVM element from its branches.
    void refresh_povms();
    Matrix povm_sum() const;
    double completeness_defect() const;
};

struct ProbeState {
    std::vector<double> weights;
    std::vector<Vector> vectors;

    static ProbeState pure(const Vector &v);
    static ProbeState mixture(std::vector<double> weights, std::vector<Vector> vectors);
    int dim() const;
    Matrix density() const;
};

// One measurement result on the probe. Several vectors are coarse-grained together.
struct ProbeOutcome {
    std::string label;
    std::vector<Vector> vectors;
    double value = 0;
    double value2 = 0;
};

Matrix interaction_generator(const SystemModel &sys, const Matrix &a, double delta_tau);
Matrix interaction_unitary_exact(const SystemModel &sys, const Matrix &a, double delta_tau);
Matrix interaction_unitary_truncated(const SystemModel &sys, const Matrix &a, double delta_tau);

KrausSet kraus_from_circuit(
    const Matrix &u, const ProbeState &probe, const std::vector<ProbeOutcome> &outcomes, double delta_tau = 0);
// Orthonormal basis form: outcome j is labelled by its index.
KrausSet kraus_from_circuit(const Matrix &u, const ProbeState &probe, const std::vector<Vector> &basis);

KrausSet kraus_vacuum_photocount(const SystemModel &sys, double delta_tau);
KrausSet kraus_vacuum_homodyne(const SystemModel &sys, double delta_tau, double phi = 0.0);
KrausSet kraus_vacuum_heterodyne(const SystemModel &sys, double delta_tau);
KrausSet kraus_coherent_photocount(const SystemModel &sys, double delta_tau, Complex alpha);
KrausSet kraus_thermal_homodyne(const SystemModel &sys, double delta_tau, double n_th, double phi = 0.0);
KrausSet kraus_squeezed_thermal_homodyne(const SystemModel &sys, double delta_tau, const BathParams &bath);
KrausSet kraus_poisson_strong(double theta, double lambda_dt);
KrausSet kraus_inefficient_homodyne(const SystemModel &sys, double delta_tau, double eta);

// Qubit probe helpers.
Matrix thermal_probe_density(double n_th);
ProbeState thermal_probe_state(double n_th);
// sigma_- cosh r - e^{2 i mu} sigma_+ sinh r
Matrix squeezed_probe_operator(double r, double mu);
// Probe for a two-quadrature measurement: |phi_s> (x) |phi_{t i}>, subnormalized on one qubit.
std::vector<ProbeOutcome> heterodyne_probe_outcomes(double delta_tau);
std::vector<ProbeOutcome> homodyne_probe_outcomes(double phi, double delta_tau);

enum class SchemeKind {
    VacuumPhotocount,
    VacuumHomodyne,
    VacuumHeterodyne,
    CoherentPhotocount,
    ThermalHomodyne,
    SqueezedThermalHomodyne,
    PoissonStrong,
    InefficientHomodyne,
    CustomCircuit,
};

struct CustomCircuitSpec {
    Matrix probe_operator;
    ProbeState probe;
    std::vector<ProbeOutcome> outcomes;
};

struct SchemeConfig {
    SchemeKind kind = SchemeKind::VacuumPhotocount;
    double phi = 0.0;
    BathParams bath;
    double eta = 1.0;
    double theta = 1.5707963267948966;
    // Poisson interaction rate, 1/time.
    double lambda = 0.0;
    std::optional<CustomCircuitSpec> circuit;
};

const std::vector<SchemeKind> &all_scheme_kinds();
std::string scheme_name(SchemeKind kind);
SchemeKind parse_scheme_kind(const std::string &name);
std::string scheme_parameters(SchemeKind kind);

// Builds the Kraus set for one step of length dt (delta_tau = gamma dt).
KrausSet build_kraus(const SystemModel &sys, const SchemeConfig &scheme, double dt);

// The same step built from the exact interaction unitary and an explicit probe.
KrausSet build_kraus_from_circuit(const SystemModel &sys, const SchemeConfig &scheme, double dt);

struct BathModel {
    Matrix a;
    Matrix probe_density;
};

// Effective probe operator and probe state whose moments define the bath of a scheme.
BathModel scheme_bath_model(const SchemeConfig &scheme, double delta_tau);

}  // namespace qtraj
