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

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtraj/ensemble.hpp"

namespace qtraj {

// A config problem; field() is the dotted path of the offending entry.
class ConfigError : public InvalidArgument {
  public:
    ConfigError(const std::string &field, const std::string &what)
        : InvalidArgument(field + ": " + what), field_(field) {}
    const std::string &field() const { return field_; }

  private:
    std::string field_;
};

struct OutputSpec {
    std::optional<std::string> csv;
    std::optional<std::string> json;
    std::optional<std::string> svg;
    bool master_equation = false;
};

struct RunConfig {
    EnsembleConfig ensemble;
    OutputSpec outputs;
    nlohmann::json source;
};

// Matrices are row-major arrays of [re, im] pairs, or one of the qubit names
// sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z, identity, zero.
Matrix parse_matrix(const nlohmann::json &j, const std::string &field, int dim);
RunConfig parse_run_config(const nlohmann::json &j);
RunConfig load_run_config(const std::string &path);

std::string format_double(double x);

// Writes through a temporary sibling file and renames it into place.
void write_file_atomic(const std::string &path, const std::string &content);

class CsvWriter {
  public:
    CsvWriter(const std::string &path, const std::vector<std::string> &observable_names, bool two_component);
    ~CsvWriter();
    CsvWriter(const CsvWriter &) = delete;
    CsvWriter &operator=(const CsvWriter &) = delete;

    void add_trajectory(std::size_t index, const TrajectoryRecord &rec);
    void add_reference(const std::vector<double> &times,
                       const std::vector<std::size_t> &steps,
                       const std::vector<std::vector<double>> &series);
    void commit();

    static std::string header(const std::vector<std::string> &observable_names);

  private:
    std::string path_;
    std::string tmp_;
    std::FILE *file_ = nullptr;
    bool two_component_;
    std::string line_;
};

struct PlotData {
    std::vector<double> times;
    std::vector<std::string> names;
    // Background trajectories, [trajectory][observable][sample].
    std::vector<std::vector<std::vector<double>>> trajectories;
    // Jump times of the highlighted trajectory.
    std::vector<double> jump_times;
    std::vector<std::vector<double>> mean;
    std::optional<std::vector<std::vector<double>>> reference;
};

std::string render_svg(const PlotData &data);

std::string package_version();

// Subcommand bodies. Return the process exit code.
int cmd_run(const std::string &config_path, const std::string &out_dir, std::ostream &out, std::ostream &err);
int cmd_verify(const std::string &suite, const nlohmann::json &options, std::ostream &out, std::ostream &err);
void cmd_schemes(std::ostream &out);

const std::vector<std::string> &verify_suites();

}  // namespace qtraj
