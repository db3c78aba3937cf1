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

#include "qtraj/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include "qtraj/oracle.hpp"

namespace qtraj {

namespace {

// Runs work(i) for i in [0, n) on up to `threads` workers and hands the results
// to consume(i, result) in index order, one chunk at a time.
template <typename R, typename Work, typename Consume>
void ordered_parallel(std::size_t n, unsigned threads, std::size_t chunk, Work work, Consume consume) {
    std::vector<R> slots(chunk);
    std::vector<std::exception_ptr> errors(chunk);
    for (std::size_t begin = 0; begin < n; begin += chunk) {
        std::size_t count = std::min(chunk, n - begin);
        std::fill(errors.begin(), errors.end(), nullptr);
        std::atomic<std::size_t> next{0};
        auto worker = [&]() {
            for (;;) {
                std::size_t k = next.fetch_add(1);
                if (k >= count) {
                    return;
                }
                try {
                    slots[k] = work(begin + k);
                } catch (...) {
                    errors[k] = std::current_exception();
                }
            }
        };
        unsigned nw = static_cast<unsigned>(std::min<std::size_t>(threads, count));
        if (nw <= 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(nw);
            for (unsigned w = 0; w < nw; w++) {
                pool.emplace_back(worker);
            }
            for (auto &t : pool) {
                t.join();
            }
        }
        for (std::size_t k = 0; k < count; k++) {
            if (errors[k]) {
                std::rethrow_exception(errors[k]);
            }
            consume(begin + k, slots[k]);
            slots[k] = R();
        }
    }
}

// Welford accumulator over a fixed-length series.
struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> m2;
    std::size_t n = 0;

    explicit SeriesStats(std::size_t len = 0) : mean(len, 0.0), m2(len, 0.0) {}

    void add(const std::vector<double> &x) {
        n++;
        double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < mean.size(); i++) {
            double d = x[i] - mean[i];
            mean[i] += d * inv;
            m2[i] += d * (x[i] - mean[i]);
        }
    }

    std::vector<double> stderr_series() const {
        std::vector<double> out(mean.size(), 0.0);
        if (n < 2) {
            return out;
        }
        double nn = static_cast<double>(n);
        for (std::size_t i = 0; i < mean.size(); i++) {
            out[i] = std::sqrt(m2[i] / (nn - 1) / nn);
        }
        return out;
    }
};

TrajectorySpec spec_for(const EnsembleConfig &cfg, std::size_t index) {
    TrajectorySpec s;
    s.sys = cfg.sys;
    s.scheme = cfg.scheme;
    s.rho0 = cfg.rho0;
    s.dt = cfg.dt;
    s.steps = cfg.steps;
    s.seed = mix_seed(cfg.master_seed, index);
    s.record_every = cfg.record_every;
    s.record_states = cfg.record_states;
    s.observables = cfg.observables;
    return s;
}

TrajectoryRecord run_one(const EnsembleConfig &cfg, const KrausSet &kraus, std::size_t index) {
    try {
        return simulate_trajectory(spec_for(cfg, index), kraus);
    } catch (const StepFailure &e) {
        std::ostringstream os;
        os << "trajectory " << index << ": " << e.what();
        throw TrajectoryFailure(os.str(), index, e.step());
    }
}

std::size_t chunk_size(unsigned threads) {
    return std::max<std::size_t>(64, 16 * static_cast<std::size_t>(threads));
}

double max_deviation(const std::vector<std::vector<double>> &a, const std::vector<std::vector<double>> &b) {
    double m = 0;
    for (std::size_t i = 0; i < a.size(); i++) {
        for (std::size_t k = 0; k < a[i].size(); k++) {
            m = std::max(m, std::abs(a[i][k] - b[i][k]));
        }
    }
    return m;
}

}  // namespace

void EnsembleConfig::validate() const {
    if (n_traj < 1) {
        throw InvalidArgument("n_traj must be at least 1");
    }
    if (!(dt > 0) || !std::isfinite(dt)) {
        throw InvalidArgument("dt must be positive");
    }
    if (steps < 1) {
        throw InvalidArgument("steps must be at least 1");
    }
    if (record_every < 1) {
        throw InvalidArgument("record_every must be at least 1");
    }
    sys.validate();
    if (rho0.dim() != sys.dim) {
        throw DimensionMismatch("initial state does not match the system dimension");
    }
    for (const auto &o : observables) {
        if (o.op.rows() != sys.dim || o.op.cols() != sys.dim) {
            throw DimensionMismatch("observable '" + o.name + "' does not match the system dimension");
        }
        if (!is_hermitian(o.op)) {
            throw InvalidArgument("observable '" + o.name + "' is not Hermitian");
        }
    }
}

unsigned resolve_threads(unsigned requested) {
    if (requested > 0) {
        return requested;
    }
    if (const char *env = std::getenv("QTRAJ_THREADS")) {
        char *end = nullptr;
        unsigned long v = std::strtoul(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) {
            return static_cast<unsigned>(v);
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::vector<double>> me_reference_series(const EnsembleConfig &cfg) {
    GaussianMEParams p = matched_me_params(cfg.sys, cfg.scheme, cfg.sys.gamma * cfg.dt);
    MESolution sol = integrate_me(cfg.rho0, p, static_cast<double>(cfg.steps) * cfg.dt, cfg.dt, cfg.sys.h_ext);
    std::vector<std::size_t> ks = sample_steps(cfg.steps, cfg.record_every);
    std::vector<std::vector<double>> out(cfg.observables.size());
    for (std::size_t i = 0; i < cfg.observables.size(); i++) {
        out[i].reserve(ks.size());
        for (std::size_t k : ks) {
            out[i].push_back(sol.states.at(k).expectation(cfg.observables[i].op));
        }
    }
    return out;
}

EnsembleResult run_ensemble(const EnsembleConfig &cfg, const RecordSink &sink) {
    cfg.validate();
    KrausSet kraus = build_kraus(cfg.sys, cfg.scheme, cfg.dt);
    std::vector<std::size_t> ks = sample_steps(cfg.steps, cfg.record_every);
    const std::size_t len = ks.size();

    std::vector<SeriesStats> obs(cfg.observables.size(), SeriesStats(len));
    SeriesStats innov(len);
    SeriesStats innov2(len);

    EnsembleResult res;
    unsigned threads = resolve_threads(cfg.threads);
    ordered_parallel<TrajectoryRecord>(
        cfg.n_traj, threads, chunk_size(threads),
        [&](std::size_t i) { return run_one(cfg, kraus, i); },
        [&](std::size_t i, TrajectoryRecord &rec) {
            for (std::size_t o = 0; o < obs.size(); o++) {
                obs[o].add(rec.observables[o]);
            }
            innov.add(rec.innovations);
            innov2.add(rec.innovations2);
            if (sink) {
                sink(i, rec);
            }
            if (cfg.keep_records) {
                res.records.push_back(std::move(rec));
            }
        });

    EnsembleStats &st = res.stats;
    st.n_traj = cfg.n_traj;
    st.steps = ks;
    for (std::size_t k : ks) {
        st.times.push_back(static_cast<double>(k) * cfg.dt);
    }
    for (std::size_t o = 0; o < obs.size(); o++) {
        st.observable_names.push_back(cfg.observables[o].name);
        st.mean_observables.push_back(obs[o].mean);
        st.stderr_observables.push_back(obs[o].stderr_series());
    }
    st.mean_innovation = innov.mean;
    st.stderr_innovation = innov.stderr_series();
    st.mean_innovation2 = innov2.mean;
    st.stderr_innovation2 = innov2.stderr_series();
    st.max_me_deviation = std::numeric_limits<double>::quiet_NaN();
    if (cfg.me_reference) {
        st.me_reference = me_reference_series(cfg);
        st.max_me_deviation = max_deviation(st.mean_observables, *st.me_reference);
    }
    return res;
}

ConvergenceResult convergence_study(
    const EnsembleConfig &cfg, const std::vector<std::size_t> &traj_counts, std::size_t replicas) {
    if (replicas < 1) {
        throw InvalidArgument("convergence_study needs at least one replica");
    }
    if (traj_counts.empty()) {
        throw InvalidArgument("convergence_study needs at least one trajectory count");
    }
    for (std::size_t i = 0; i < traj_counts.size(); i++) {
        if (traj_counts[i] < 1 || (i > 0 && traj_counts[i] <= traj_counts[i - 1])) {
            throw InvalidArgument("trajectory counts must be positive and increasing");
        }
    }
    EnsembleConfig run = cfg;
    run.n_traj = traj_counts.back() * replicas;
    run.keep_records = false;
    run.me_reference = false;
    auto ref = me_reference_series(run);

    ConvergenceResult out;
    out.counts = traj_counts;
    out.replicas = replicas;
    const std::size_t n_counts = traj_counts.size();
    // One running batch per count; a full batch contributes its squared max deviation.
    std::vector<std::vector<std::vector<double>>> batch(n_counts);
    for (auto &b : batch) {
        b.resize(ref.size());
        for (std::size_t o = 0; o < ref.size(); o++) {
            b[o].assign(ref[o].size(), 0.0);
        }
    }
    std::vector<double> sq(n_counts, 0.0);
    std::vector<std::size_t> done(n_counts, 0);
    run_ensemble(run, [&](std::size_t i, const TrajectoryRecord &rec) {
        for (std::size_t c = 0; c < n_counts; c++) {
            auto &b = batch[c];
            for (std::size_t o = 0; o < b.size(); o++) {
                for (std::size_t k = 0; k < b[o].size(); k++) {
                    b[o][k] += rec.observables[o][k];
                }
            }
            if ((i + 1) % traj_counts[c] != 0) {
                continue;
            }
            double n = static_cast<double>(traj_counts[c]);
            double m = 0;
            for (std::size_t o = 0; o < b.size(); o++) {
                for (std::size_t k = 0; k < b[o].size(); k++) {
                    m = std::max(m, std::abs(b[o][k] / n - ref[o][k]));
                    b[o][k] = 0;
                }
            }
            sq[c] += m * m;
            done[c]++;
        }
    });
    for (std::size_t c = 0; c < n_counts; c++) {
        out.deviations.push_back(std::sqrt(sq[c] / static_cast<double>(done[c])));
    }

    double biggest = *std::max_element(out.deviations.begin(), out.deviations.end());
    if (biggest < 1e-9) {
        out.deterministic = true;
        return out;
    }
    std::vector<double> x;
    for (std::size_t n : traj_counts) {
        x.push_back(static_cast<double>(n));
    }
    out.slope = fit_log_slope(x, out.deviations);
    return out;
}

FluctuationStats conditional_fluctuation(const EnsembleConfig &cfg) {
    cfg.validate();
    KrausSet kraus = build_kraus(cfg.sys, cfg.scheme, cfg.dt);
    const double dtau = kraus.delta_tau;
    unsigned threads = resolve_threads(cfg.threads);

    SeriesStats acc(1);
    ordered_parallel<double>(
        cfg.n_traj, threads, chunk_size(threads),
        [&](std::size_t i) {
            Stepper stepper(kraus, cfg.sys, cfg.dt);
            Rng rng(mix_seed(cfg.master_seed, i));
            Matrix rho = cfg.rho0.matrix();
            double total = 0;
            const int n_out = static_cast<int>(kraus.outcomes.size());
            for (std::size_t k = 1; k <= cfg.steps; k++) {
                Matrix avg = Matrix::Zero(rho.rows(), rho.cols());
                std::vector<Matrix> branch(n_out);
                std::vector<double> p(n_out);
                for (int j = 0; j < n_out; j++) {
                    branch[j] = stepper.branch_update(rho, j);
                    p[j] = branch[j].trace().real();
                    avg += branch[j];
                }
                avg /= avg.trace().real();
                double spread = 0;
                for (int j = 0; j < n_out; j++) {
                    if (p[j] > kJumpTol) {
                        spread += p[j] * (branch[j] / p[j] - avg).squaredNorm();
                    }
                }
                total += spread / dtau;
                try {
                    stepper.step(rho, rng.uniform());
                } catch (const Error &e) {
                    std::ostringstream os;
                    os << "trajectory " << i << ": " << e.what() << " (step " << k << ")";
                    throw TrajectoryFailure(os.str(), i, k);
                }
            }
            return total / static_cast<double>(cfg.steps);
        },
        [&](std::size_t, double v) { acc.add({v}); });

    FluctuationStats out;
    out.state_variance = acc.mean[0];
    out.stderr = acc.stderr_series()[0];
    out.samples = cfg.n_traj;
    return out;
}

}  // namespace qtraj
