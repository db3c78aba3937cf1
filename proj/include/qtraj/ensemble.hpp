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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "qtraj/core.hpp"
#include "qtraj/schemes.hpp"
#include "qtraj/stepper.hpp"

namespace qtraj {

struct EnsembleConfig {
    std::size_t n_traj = 1;
    std::uint64_t master_seed = 0;
    SystemModel sys;
    SchemeConfig scheme;
    DensityMatrix rho0;
    double dt = 1e-3;
    std::size_t steps = 1;
    std::size_t record_every = 1;
    std::vector<Observable> observables;
    bool record_states = false;
    bool me_reference = false;
    // Keep every TrajectoryRecord in the result. Large ensembles should stream instead.
    bool keep_records = true;
    // Worker count; 0 defers to QTRAJ_THREADS and then to the hardware.
    unsigned threads = 0;

    void validate() const;
};

struct EnsembleStats {
    std::vector<double> times;
    std::vector<std::size_t> steps;
    std::vector<std::string> observable_names;
    std::vector<std::vector<double>> mean_observables;
    std::vector<std::vector<double>> stderr_observables;
    std::vector<double> mean_innovation;
    std::vector<double> stderr_innovation;
    std::vector<double> mean_innovation2;
    std::vector<double> stderr_innovation2;
    std::optional<std::vector<std::vector<double>>> me_reference;
    // max over observables and samples of |ensemble mean - reference|; NaN without a reference.
    double max_me_deviation = 0;
    std::size_t n_traj = 0;
};

struct EnsembleResult {
    EnsembleStats stats;
    std::vector<TrajectoryRecord> records;
};

class TrajectoryFailure : public Error {
  public:
    TrajectoryFailure(const std::string &what, std::size_t trajectory, std::size_t step)
        : Error(what), trajectory_(trajectory), step_(step) {}
    std::size_t trajectory() const { return trajectory_; }
    std::size_t step() const { return step_; }

  private:
    std::size_t trajectory_;
    std::size_t step_;
};

// Called once per trajectory, in index order, regardless of the worker count.
using RecordSink = std::function<void(std::size_t index, const TrajectoryRecord &rec)>;

unsigned resolve_threads(unsigned requested);

EnsembleResult run_ensemble(const EnsembleConfig &cfg, const RecordSink &sink = nullptr);

// Observable series of the reference master equation at the recorded steps.
std::vector<std::vector<double>> me_reference_series(const EnsembleConfig &cfg);

struct ConvergenceResult {
    std::vector<std::size_t> counts;
    // Root mean square, over disjoint batches of each count, of the max deviation from the reference.
    std::vector<double> deviations;
    std::size_t replicas = 1;
    double slope = 0;
    // Every deviation vanished, so there is nothing to fit.
    bool deterministic = false;
};

// Max deviation from the reference at each count (prefixes of one ensemble) and
// the fitted slope of log deviation against log count.
// Runs replicas * max(traj_counts) trajectories and splits them into disjoint batches of each count.
ConvergenceResult convergence_study(
    const EnsembleConfig &cfg, const std::vector<std::size_t> &traj_counts, std::size_t replicas = 4);

struct FluctuationStats {
    // Mean over trajectories and steps of sum_j p_j |rho_j - rho_avg|_F^2 / delta_tau.
    double state_variance = 0;
    double stderr = 0;
    std::size_t samples = 0;
};

// Spread of the conditional update around the outcome-averaged update, per unit delta_tau.
FluctuationStats conditional_fluctuation(const EnsembleConfig &cfg);

}  // namespace qtraj
