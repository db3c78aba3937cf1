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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "qtraj/core.hpp"
#include "qtraj/schemes.hpp"

namespace qtraj {

class AllOutcomesZero : public Error {
  public:
    using Error::Error;
};

class StepFailure : public Error {
  public:
    StepFailure(const std::string &what, std::size_t step) : Error(what), step_(step) {}
    std::size_t step() const { return step_; }

  private:
    std::size_t step_;
};

// Per-trajectory seed: splitmix64 finalizer applied to master + (index + 1) * golden gamma.
std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t index);

// 64-bit Mersenne twister with a fixed mapping to doubles in [0, 1).
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  private:
    std::mt19937_64 gen_;
};

struct StepResult {
    DensityMatrix rho_next;
    int outcome_index = -1;
    std::string outcome_label;
    double probability = 0;
    double innovation = 0;
    double innovation2 = 0;
    double log_likelihood_increment = 0;
};

// Reusable single-step evolution with a precomputed Hamiltonian propagator.
class Stepper {
  public:
    Stepper(const KrausSet &kraus, const SystemModel &sys, double dt);

    struct Sample {
        int index = -1;
        double probability = 0;
        double sampling_probability = 0;
        double innovation = 0;
        double innovation2 = 0;
    };

    // Samples an outcome from draw and overwrites rho with the normalized conditional state.
    Sample step(Matrix &rho, double draw);
    // Overwrites rho with the normalized outcome-averaged state.
    void average(Matrix &rho);
    // Unnormalized conditional state for outcome j, before the Hamiltonian.
    Matrix branch_update(const Matrix &rho, int j) const;
    std::vector<double> probabilities(const Matrix &rho) const;

    const KrausSet &kraus() const { return kraus_; }

  private:
    void apply_hamiltonian(Matrix &rho);

    KrausSet kraus_;
    std::optional<Matrix> propagator_;
    Matrix work_;
    Matrix acc_;
    std::vector<double> p_;
};

StepResult conditional_step(const DensityMatrix &rho, const KrausSet &kraus, const SystemModel &sys, double draw);
DensityMatrix unconditional_step(const DensityMatrix &rho, const KrausSet &kraus, const SystemModel &sys);

struct Observable {
    std::string name;
    Matrix op;
};

struct TrajectorySpec {
    SystemModel sys;
    SchemeConfig scheme;
    DensityMatrix rho0;
    double dt = 1e-3;
    std::size_t steps = 1;
    std::uint64_t seed = 0;
    std::size_t record_every = 1;
    bool record_states = false;
    std::vector<Observable> observables;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::size_t> steps;
    // Outcome index per sample; -1 at step 0.
    std::vector<int> outcomes;
    std::vector<std::string> outcome_labels;
    std::vector<double> innovations;
    std::vector<double> innovations2;
    std::vector<std::string> observable_names;
    std::vector<std::vector<double>> observables;
    std::vector<double> log_likelihood_series;
    double log_likelihood = 0;
    DensityMatrix final_state;
    std::vector<DensityMatrix> states;
    double min_eigenvalue = 1;
    std::size_t jump_count = 0;
    // Every step whose outcome was the photon count "e", recorded or not.
    std::vector<std::size_t> jump_steps;

    std::string outcome_label(std::size_t sample) const;
};

std::vector<std::size_t> sample_steps(std::size_t steps, std::size_t record_every);

TrajectoryRecord simulate_trajectory(const TrajectorySpec &spec);
TrajectoryRecord simulate_trajectory(const TrajectorySpec &spec, const KrausSet &kraus);
TrajectoryRecord simulate_trajectory(
    const SystemModel &sys,
    const SchemeConfig &scheme,
    const DensityMatrix &rho0,
    double dt,
    std::size_t steps,
    std::uint64_t seed,
    std::size_t record_every = 1,
    bool record_states = false,
    const std::vector<Observable> &observables = {});

}  // namespace qtraj
