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

#include "qtraj/stepper.hpp"

#include <cmath>
#include <sstream>

namespace qtraj {

std::uint64_t mix_seed(std::uint64_t master_seed, std::uint64_t index) {
    std::uint64_t z = master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

Stepper::Stepper(const KrausSet &kraus, const SystemModel &sys, double dt) : kraus_(kraus) {
    if (kraus_.outcomes.empty()) {
        throw InvalidArgument("Kraus set has no outcomes");
    }
    int d = kraus_.dim();
    if (d != sys.dim) {
        throw DimensionMismatch("Kraus operators do not match the system dimension");
    }
    for (const auto &o : kraus_.outcomes) {
        if (o.povm.rows() != d) {
            kraus_.refresh_povms();
            break;
        }
    }
    if (sys.h_ext && dt > 0) {
        propagator_ = unitary_from_hermitian(*sys.h_ext, dt);
    }
    work_ = Matrix::Zero(d, d);
    acc_ = Matrix::Zero(d, d);
    p_.resize(kraus_.outcomes.size());
}

std::vector<double> Stepper::probabilities(const Matrix &rho) const {
    std::vector<double> p(kraus_.outcomes.size());
    for (size_t j = 0; j < p.size(); j++) {
        p[j] = trace_product(rho, kraus_.outcomes[j].povm).real();
    }
    return p;
}

Matrix Stepper::branch_update(const Matrix &rho, int j) const {
    const auto &o = kraus_.outcomes[j];
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto &k : o.branches) {
        out += k * rho * k.adjoint();
    }
    return out;
}

void Stepper::apply_hamiltonian(Matrix &rho) {
    if (propagator_) {
        work_.noalias() = *propagator_ * rho;
        rho.noalias() = work_ * propagator_->adjoint();
    }
}

Stepper::Sample Stepper::step(Matrix &rho, double draw) {
    size_t n = kraus_.outcomes.size();
    double total = 0;
    for (size_t j = 0; j < n; j++) {
        p_[j] = trace_product(rho, kraus_.outcomes[j].povm).real();
        total += std::max(p_[j], 0.0);
    }
    if (!(total >= 1e-12)) {
        std::ostringstream os;
        os << "total outcome probability " << total << " is below 1e-12";
        throw AllOutcomesZero(os.str());
    }
    double scale = std::abs(total - 1.0) > 1e-9 ? 1.0 / total : 1.0;

    int chosen = -1;
    double cum = 0;
    double mean1 = 0;
    double mean2 = 0;
    for (size_t j = 0; j < n; j++) {
        double raw = std::max(p_[j], 0.0);
        double q = raw * scale;
        // The record mean uses the POVM probabilities themselves, not the renormalized ones.
        mean1 += raw * kraus_.outcomes[j].innovation_value;
        mean2 += raw * kraus_.outcomes[j].innovation_value2;
        cum += q;
        if (chosen < 0 && q > 0 && draw < cum) {
            chosen = static_cast<int>(j);
        }
    }
    if (chosen < 0) {
        for (size_t j = n; j-- > 0;) {
            if (p_[j] > 0) {
                chosen = static_cast<int>(j);
                break;
            }
        }
    }

    const auto &o = kraus_.outcomes[chosen];
    acc_.setZero();
    for (const auto &k : o.branches) {
        work_.noalias() = k * rho;
        acc_.noalias() += work_ * k.adjoint();
    }
    double tr = acc_.trace().real();
    if (!(tr > kZeroTraceTol)) {
        throw ZeroTrace("conditional state has vanishing trace");
    }
    rho = (acc_ + acc_.adjoint()) * (0.5 / tr);
    apply_hamiltonian(rho);

    Sample s;
    s.index = chosen;
    s.probability = p_[chosen];
    s.sampling_probability = std::max(p_[chosen], 0.0) * scale;
    s.innovation = o.innovation_value - mean1;
    s.innovation2 = o.innovation_value2 - mean2;
    return s;
}

void Stepper::average(Matrix &rho) {
    acc_.setZero();
    for (const auto &o : kraus_.outcomes) {
        for (const auto &k : o.branches) {
            work_.noalias() = k * rho;
            acc_.noalias() += work_ * k.adjoint();
        }
    }
    double tr = acc_.trace().real();
    if (!(tr > kZeroTraceTol)) {
        throw ZeroTrace("averaged state has vanishing trace");
    }
    rho = (acc_ + acc_.adjoint()) * (0.5 / tr);
    apply_hamiltonian(rho);
}

namespace {

double step_dt(const KrausSet &kraus, const SystemModel &sys) {
    return sys.gamma > 0 ? kraus.delta_tau / sys.gamma : 0.0;
}

}  // namespace

StepResult conditional_step(const DensityMatrix &rho, const KrausSet &kraus, const SystemModel &sys, double draw) {
    if (rho.dim() != kraus.dim()) {
        throw DimensionMismatch("state and Kraus operators have different dimensions");
    }
    Stepper stepper(kraus, sys, step_dt(kraus, sys));
    Matrix m = rho.matrix();
    auto s = stepper.step(m, draw);
    StepResult r;
    r.rho_next = DensityMatrix::unchecked(std::move(m));
    r.outcome_index = s.index;
    r.outcome_label = kraus.outcomes[s.index].label;
    r.probability = s.probability;
    r.innovation = s.innovation;
    r.innovation2 = s.innovation2;
    r.log_likelihood_increment = std::log(s.sampling_probability);
    return r;
}

DensityMatrix unconditional_step(const DensityMatrix &rho, const KrausSet &kraus, const SystemModel &sys) {
    if (rho.dim() != kraus.dim()) {
        throw DimensionMismatch("state and Kraus operators have different dimensions");
    }
    Stepper stepper(kraus, sys, step_dt(kraus, sys));
    Matrix m = rho.matrix();
    stepper.average(m);
    return DensityMatrix::unchecked(std::move(m));
}

std::string TrajectoryRecord::outcome_label(std::size_t sample) const {
    int j = outcomes.at(sample);
    return j < 0 ? std::string() : outcome_labels.at(j);
}

std::vector<std::size_t> sample_steps(std::size_t steps, std::size_t record_every) {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k <= steps; k += record_every) {
        out.push_back(k);
    }
    if (out.back() != steps) {
        out.push_back(steps);
    }
    return out;
}

TrajectoryRecord simulate_trajectory(const TrajectorySpec &spec) {
    spec.sys.validate();
    return simulate_trajectory(spec, build_kraus(spec.sys, spec.scheme, spec.dt));
}

TrajectoryRecord simulate_trajectory(const TrajectorySpec &spec, const KrausSet &kraus) {
    if (spec.steps < 1) {
        throw InvalidArgument("steps must be at least 1");
    }
    if (spec.record_every < 1) {
        throw InvalidArgument("record_every must be at least 1");
    }
    if (!(spec.dt > 0)) {
        throw InvalidArgument("dt must be positive");
    }
    if (spec.rho0.dim() != spec.sys.dim) {
        throw DimensionMismatch("initial state does not match the system dimension");
    }
    Stepper stepper(kraus, spec.sys, spec.dt);
    Rng rng(spec.seed);

    TrajectoryRecord rec;
    for (const auto &o : kraus.outcomes) {
        rec.outcome_labels.push_back(o.label);
    }
    for (const auto &ob : spec.observables) {
        rec.observable_names.push_back(ob.name);
    }
    rec.observables.resize(spec.observables.size());
    size_t n_samples = sample_steps(spec.steps, spec.record_every).size();
    rec.times.reserve(n_samples);
    rec.steps.reserve(n_samples);
    rec.outcomes.reserve(n_samples);
    rec.innovations.reserve(n_samples);
    rec.innovations2.reserve(n_samples);
    rec.log_likelihood_series.reserve(n_samples);
    for (auto &series : rec.observables) {
        series.reserve(n_samples);
    }

    Matrix rho = spec.rho0.matrix();
    int jump_index = -1;
    for (size_t j = 0; j < kraus.outcomes.size(); j++) {
        if (kraus.outcomes[j].label == "e") {
            jump_index = static_cast<int>(j);
        }
    }

    auto record = [&](std::size_t k, int outcome, double innov, double innov2) {
        rec.times.push_back(static_cast<double>(k) * spec.dt);
        rec.steps.push_back(k);
        rec.outcomes.push_back(outcome);
        rec.innovations.push_back(innov);
        rec.innovations2.push_back(innov2);
        rec.log_likelihood_series.push_back(rec.log_likelihood);
        for (size_t i = 0; i < spec.observables.size(); i++) {
            rec.observables[i].push_back(trace_product(rho, spec.observables[i].op).real());
        }
        rec.min_eigenvalue = std::min(rec.min_eigenvalue, min_eigenvalue(rho));
        if (spec.record_states) {
            rec.states.push_back(DensityMatrix::unchecked(rho));
        }
    };

    record(0, -1, 0.0, 0.0);
    for (std::size_t k = 1; k <= spec.steps; k++) {
        Stepper::Sample s;
        try {
            s = stepper.step(rho, rng.uniform());
        } catch (const Error &e) {
            std::ostringstream os;
            os << e.what() << " (step " << k << ")";
            throw StepFailure(os.str(), k);
        }
        rec.log_likelihood += std::log(s.sampling_probability);
        if (s.index == jump_index) {
            rec.jump_count++;
            rec.jump_steps.push_back(k);
        }
        if (k % spec.record_every == 0 || k == spec.steps) {
            record(k, s.index, s.innovation, s.innovation2);
        }
    }
    rec.final_state = DensityMatrix::unchecked(rho);
    return rec;
}

TrajectoryRecord simulate_trajectory(
    const SystemModel &sys,
    const SchemeConfig &scheme,
    const DensityMatrix &rho0,
    double dt,
    std::size_t steps,
    std::uint64_t seed,
    std::size_t record_every,
    bool record_states,
    const std::vector<Observable> &observables) {
    TrajectorySpec spec{sys, scheme, rho0, dt, steps, seed, record_every, record_states, observables};
    return simulate_trajectory(spec);
}

}  // namespace qtraj
