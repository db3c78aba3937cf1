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
#include "qtraj/schemes.hpp"

namespace qtraj {

struct GaussianMEParams {
    Matrix c;
    double gamma = 1.0;
    Complex beta{0, 0};
    double N = 0;
    Complex M{0, 0};
    // Expectation of [a, a^dagger]; 1 for every bosonic-like bath used here.
    double commutator = 1.0;

    void validate() const;
};

Matrix gaussian_me_rhs(const Matrix &rho, const GaussianMEParams &p, const std::optional<Matrix> &h_ext = std::nullopt);
inline Matrix gaussian_me_rhs(const DensityMatrix &rho, const GaussianMEParams &p) {
    return gaussian_me_rhs(rho.matrix(), p);
}

struct MESolution {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    double max_trace_drift = 0;
    double internal_dt = 0;
};

class StepRejected : public Error {
  public:
    using Error::Error;
};

// Fixed-step fourth-order integration sampled every dt up to t_final.
MESolution integrate_me(
    const DensityMatrix &rho0,
    const GaussianMEParams &p,
    double t_final,
    double dt,
    const std::optional<Matrix> &h_ext = std::nullopt);

struct BathStats {
    Complex alpha{0, 0};
    double N = 0;
    Complex M{0, 0};
    double commutator = 0;
};

// Moments of dA = sqrt(delta_tau) a per unit delta_tau. Second moments are
// centered on the mean, so a mean field shows up only in alpha.
BathStats bath_stats(const Matrix &a, const Matrix &probe_density, double delta_tau);

// Reference master equation for a scheme. delta_tau is only needed for custom circuits.
GaussianMEParams matched_me_params(const SystemModel &sys, const SchemeConfig &scheme, double delta_tau = 0);

struct ConsistencyReport {
    std::vector<double> delta_taus;
    std::vector<double> residuals;
    double exponent = 0;
    // True when every residual is at rounding level, so no exponent exists.
    bool exact = false;
    double max_residual() const;
};

// Residual of one averaged Kraus step against the reference master equation,
// at delta_tau and two successive halvings.
ConsistencyReport unconditional_consistency(
    const SystemModel &sys, const SchemeConfig &scheme, const DensityMatrix &rho, double delta_tau);

// Largest entrywise difference between matching Kraus branches; outcomes are matched by label.
double kraus_difference(const KrausSet &a, const KrausSet &b);

// Frobenius distance between the normalized conditional states of outcomes i and j.
double conditional_split(const KrausSet &kraus, const Matrix &rho, int i = 0, int j = 1);

double fit_log_slope(const std::vector<double> &x, const std::vector<double> &y);

Matrix beamsplitter(Complex eta);
Matrix beamsplitter_explicit();
Matrix beamsplitter_factored();

// Four Kraus operators from the two-probe beamsplitter circuit with the truncated unitary.
std::vector<Matrix> heterodyne_circuit_kraus(const SystemModel &sys, double delta_tau);
double heterodyne_circuit_equivalence(const SystemModel &sys, double delta_tau);

}  // namespace qtraj
