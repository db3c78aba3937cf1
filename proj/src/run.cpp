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

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "qtraj/cli.hpp"

namespace qtraj {

using nlohmann::json;

namespace {

constexpr std::size_t kPlotTrajectories = 64;

std::string resolve(const std::string &path, const std::string &out_dir) {
    std::filesystem::path p(path);
    if (p.is_absolute() || out_dir.empty()) {
        return path;
    }
    return (std::filesystem::path(out_dir) / p).string();
}

json series_json(const std::vector<double> &v) {
    json a = json::array();
    for (double x : v) {
        a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    }
    return a;
}

std::string utc_timestamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace

void cmd_schemes(std::ostream &out) {
    for (SchemeKind k : all_scheme_kinds()) {
        out << std::left << std::setw(28) << scheme_name(k) << scheme_parameters(k) << "\n";
    }
}

int cmd_run(const std::string &config_path, const std::string &out_dir, std::ostream &out, std::ostream &err) {
    RunConfig cfg;
    KrausSet kraus;
    try {
        cfg = load_run_config(config_path);
        kraus = build_kraus(cfg.ensemble.sys, cfg.ensemble.scheme, cfg.ensemble.dt);
    } catch (const ConfigError &e) {
        err << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const std::exception &e) {
        err << "invalid config: " << e.what() << "\n";
        return 2;
    }

    EnsembleConfig &ens = cfg.ensemble;
    ens.keep_records = false;
    const OutputSpec &outs = cfg.outputs;
    std::vector<std::string> warnings = kraus.warnings;
    auto start = std::chrono::steady_clock::now();

    try {
        std::vector<std::string> names;
        for (const auto &o : ens.observables) {
            names.push_back(o.name);
        }
        std::optional<CsvWriter> csv;
        if (outs.csv) {
            csv.emplace(resolve(*outs.csv, out_dir), names, kraus.two_component);
        }
        PlotData plot;
        plot.names = names;
        json per_traj = json::array();
        double min_eig = 1;

        EnsembleResult res = run_ensemble(ens, [&](std::size_t i, const TrajectoryRecord &rec) {
            if (csv) {
                csv->add_trajectory(i, rec);
            }
            if (outs.svg && i < kPlotTrajectories) {
                plot.trajectories.push_back(rec.observables);
                if (i == 0) {
                    for (std::size_t k : rec.jump_steps) {
                        plot.jump_times.push_back(static_cast<double>(k) * ens.dt);
                    }
                }
            }
            min_eig = std::min(min_eig, rec.min_eigenvalue);
            per_traj.push_back({{"index", i},
                                {"log_likelihood", rec.log_likelihood},
                                {"jumps", rec.jump_count},
                                {"min_eigenvalue", rec.min_eigenvalue}});
        });
        const EnsembleStats &st = res.stats;
        if (min_eig < -kPositivityTol) {
            std::ostringstream os;
            os << "positivity diagnostic: a recorded state had eigenvalue " << min_eig
               << "; consider a smaller dt";
            warnings.push_back(os.str());
        }

        if (csv) {
            if (st.me_reference) {
                csv->add_reference(st.times, st.steps, *st.me_reference);
            }
            csv->commit();
        }
        double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        if (outs.json) {
            json j;
            j["metadata"] = {{"version", package_version()},
                             {"config", cfg.source},
                             {"wall_time_s", wall},
                             {"timestamp", utc_timestamp()}};
            j["n_traj"] = st.n_traj;
            j["times"] = series_json(st.times);
            j["steps"] = st.steps;
            json obs = json::object();
            for (std::size_t o = 0; o < st.observable_names.size(); o++) {
                json entry = {{"mean", series_json(st.mean_observables[o])},
                              {"stderr", series_json(st.stderr_observables[o])}};
                if (st.me_reference) {
                    entry["master_equation"] = series_json((*st.me_reference)[o]);
                }
                obs[st.observable_names[o]] = entry;
            }
            j["observables"] = obs;
            j["mean_innovation"] = series_json(st.mean_innovation);
            j["stderr_innovation"] = series_json(st.stderr_innovation);
            if (kraus.two_component) {
                j["mean_innovation2"] = series_json(st.mean_innovation2);
                j["stderr_innovation2"] = series_json(st.stderr_innovation2);
            }
            j["max_me_deviation"] = std::isfinite(st.max_me_deviation) ? json(st.max_me_deviation) : json(nullptr);
            j["trajectories"] = per_traj;
            j["warnings"] = warnings;
            write_file_atomic(resolve(*outs.json, out_dir), j.dump(1) + "\n");
        }
        if (outs.svg) {
            plot.times = st.times;
            plot.mean = st.mean_observables;
            plot.reference = st.me_reference;
            write_file_atomic(resolve(*outs.svg, out_dir), render_svg(plot));
        }

        for (const auto &w : warnings) {
            err << "warning: " << w << "\n";
        }
        out << "ran " << st.n_traj << " trajectories of " << ens.steps << " steps ("
            << scheme_name(ens.scheme.kind) << ") in " << std::fixed << std::setprecision(2) << wall << " s\n";
        out.unsetf(std::ios::floatfield);
        if (st.me_reference) {
            out << "max |ensemble mean - master equation| = " << st.max_me_deviation << "\n";
        }
        return 0;
    } catch (const TrajectoryFailure &e) {
        err << "runtime failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception &e) {
        err << "runtime failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace qtraj
