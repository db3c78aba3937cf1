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

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "qtraj/core.hpp"

namespace qtraj {

// A measured probe vector. sign is the homodyne outcome; tilde is the
// coarse-grained label (0 when the coarse-grained label lives in the state).
struct LabeledVector {
    int sign = 1;
    int tilde = 0;
    Vector v;
};

struct ProbeModel {
    std::string name;
    int probe_dim = 0;
    bool pure = true;
    // Pure model: |Phi>.
    Vector phi;
    // Mixed model: weights and vectors for the tilde = +1 and tilde = -1 components.
    std::array<double, 2> weights{1.0, 0.0};
    std::array<Vector, 2> psi;
    Matrix a_op;
    std::vector<LabeledVector> outcome_vectors;
    // False for models that only reproduce bath statistics.
    bool supports_homodyne = true;

    Matrix probe_density() const;
    Matrix observable() const { return a_op + a_op.adjoint(); }
    void validate() const;
};

struct PairCoefficients {
    Complex alpha{0, 0};
    Complex beta0{0, 0};
    Complex beta1{0, 0};
    Complex gamma0{0, 0};
    Complex gamma1{0, 0};
    Complex gamma2{0, 0};
    Complex gamma3{0, 0};
};

// Indexed [sign][tilde] with index 0 for + and 1 for -.
struct KrausCoefficients {
    std::array<std::array<PairCoefficients, 2>, 2> pair;

    const PairCoefficients &at(int sign, int tilde) const { return pair[sign > 0 ? 0 : 1][tilde > 0 ? 0 : 1]; }
};

struct NamedResidual {
    std::string name;
    double value = 0;
};

struct ConstraintReport {
    double phi_plus = 0;
    double phi_minus = 0;
    std::vector<NamedResidual> residuals;
    // Reported against the stated target expressions but not part of the verdict.
    std::vector<NamedResidual> gamma_residuals;
    std::vector<double> spectrum;
    // Every nonzero eigenvalue of the measured observable is degenerate.
    bool degenerate = false;
    double threshold = 1e-9;
    bool pass = false;

    double max_residual() const;
};

KrausCoefficients kraus_coefficients(const ProbeModel &model);
ConstraintReport check_homodyne_constraints(const KrausCoefficients &coeffs, double N, Complex M);
// Coefficients, constraints and the spectrum diagnostic of a model.
ConstraintReport check_model(const ProbeModel &model, double N, Complex M);

ProbeModel vacuum_probe_model();
ProbeModel araki_woods_model(double N, Complex M);
ProbeModel two_qubit_squeezed_model(double N, Complex M);
ProbeModel qutrit_model(double N, Complex M);

struct AwConstants {
    double x = 0;
    double y = 0;
    Complex z{0, 0};
};
AwConstants araki_woods_constants(double N, Complex M);

// First-order homodyne signal strength of the two-qubit model when each half of
// the zero-eigenvalue subspace is lumped with one outcome, relative to 1/sqrt(L').
double two_qubit_naive_pairing_strength(double N, Complex M);

std::vector<NamedResidual> appendix_a_identities(
    const Matrix &c, const Matrix &rho, double r, double mu, double n_th);

}  // namespace qtraj
