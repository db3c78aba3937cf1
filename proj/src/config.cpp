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

#include <cmath>
#include <fstream>
#include <sstream>

#include "qtraj/cli.hpp"

namespace qtraj {

using nlohmann::json;

namespace {

constexpr double kHalfPi = 1.5707963267948966;

Complex parse_complex(const json &j, const std::string &field) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError(field, "expected a number or an [re, im] pair");
}

const json *find(const json &obj, const char *key) {
    auto it = obj.find(key);
    return it == obj.end() || it->is_null() ? nullptr : &*it;
}

const json &require(const json &obj, const char *key, const std::string &prefix) {
    const json *j = find(obj, key);
    if (!j) {
        throw ConfigError(prefix + key, "missing");
    }
    return *j;
}

double get_double(const json &obj, const char *key, const std::string &prefix, std::optional<double> fallback) {
    const json *j = find(obj, key);
    if (!j) {
        if (fallback) {
            return *fallback;
        }
        throw ConfigError(prefix + key, "missing");
    }
    if (!j->is_number()) {
        throw ConfigError(prefix + key, "expected a number");
    }
    double v = j->get<double>();
    if (!std::isfinite(v)) {
        throw ConfigError(prefix + key, "must be finite");
    }
    return v;
}

std::uint64_t get_count(const json &obj, const char *key, const std::string &prefix, std::optional<std::uint64_t> fallback) {
    const json *j = find(obj, key);
    if (!j) {
        if (fallback) {
            return *fallback;
        }
        throw ConfigError(prefix + key, "missing");
    }
    if (!j->is_number_integer() || (j->is_number_integer() && !j->is_number_unsigned() && j->get<std::int64_t>() < 0)) {
        throw ConfigError(prefix + key, "expected a non-negative integer");
    }
    return j->get<std::uint64_t>();
}

void require_object(const json &j, const std::string &field) {
    if (!j.is_object()) {
        throw ConfigError(field, "expected an object");
    }
}

Matrix named_matrix(const std::string &name, const std::string &field, int dim) {
    if (name == "identity") {
        return identity(dim);
    }
    if (name == "zero") {
        return Matrix::Zero(dim, dim);
    }
    if (dim != 2) {
        throw ConfigError(field, "named operator '" + name + "' needs dim = 2");
    }
    if (name == "sigma_minus") return sigma_minus();
    if (name == "sigma_plus") return sigma_plus();
    if (name == "sigma_x") return sigma_x();
    if (name == "sigma_y") return sigma_y();
    if (name == "sigma_z") return sigma_z();
    throw ConfigError(field, "unknown operator name '" + name + "'");
}

Vector parse_vector(const json &j, const std::string &field, int dim) {
    if (!j.is_array()) {
        throw ConfigError(field, "expected an array of [re, im] entries");
    }
    if (dim > 0 && static_cast<int>(j.size()) != dim) {
        throw ConfigError(field, "expected " + std::to_string(dim) + " entries, got " + std::to_string(j.size()));
    }
    Vector v(j.size());
    for (std::size_t i = 0; i < j.size(); i++) {
        v(static_cast<Eigen::Index>(i)) = parse_complex(j[i], field + "[" + std::to_string(i) + "]");
    }
    return v;
}

DensityMatrix parse_state(const json &j, const std::string &field, int dim) {
    Matrix m;
    if (j.is_string()) {
        std::string s = j.get<std::string>();
        if (s == "mixed") {
            return DensityMatrix::maximally_mixed(dim);
        }
        if (dim != 2) {
            throw ConfigError(field, "named state '" + s + "' needs dim = 2");
        }
        Vector v;
        if (s == "g") v = ket_g();
        else if (s == "e") v = ket_e();
        else if (s == "+x") v = ket_phi(1);
        else if (s == "-x") v = ket_phi(-1);
        else if (s == "+y") v = ket_phi(1, -kHalfPi);
        else if (s == "-y") v = ket_phi(-1, -kHalfPi);
        else throw ConfigError(field, "unknown state name '" + s + "'");
        return DensityMatrix::pure(v);
    }
    if (j.is_object() && j.contains("ket")) {
        Vector v = parse_vector(j["ket"], field + ".ket", dim);
        if (std::abs(v.norm() - 1) > 1e-9) {
            throw ConfigError(field, "ket must be normalized");
        }
        return DensityMatrix::pure(v);
    }
    m = parse_matrix(j, field, dim);
    try {
        return DensityMatrix::from_matrix(m);
    } catch (const Error &e) {
        throw ConfigError(field, e.what());
    }
}

ProbeState parse_probe_state(const json &j, const std::string &field) {
    if (j.is_object() && j.contains("ket")) {
        return ProbeState::pure(parse_vector(j["ket"], field + ".ket", 0));
    }
    require_object(j, field);
    const json &w = require(j, "weights", field + ".");
    const json &v = require(j, "vectors", field + ".");
    if (!w.is_array() || !v.is_array() || w.size() != v.size() || w.empty()) {
        throw ConfigError(field, "weights and vectors must be arrays of the same nonzero length");
    }
    std::vector<double> weights;
    std::vector<Vector> vectors;
    for (std::size_t i = 0; i < w.size(); i++) {
        if (!w[i].is_number()) {
            throw ConfigError(field + ".weights[" + std::to_string(i) + "]", "expected a number");
        }
        weights.push_back(w[i].get<double>());
        vectors.push_back(parse_vector(v[i], field + ".vectors[" + std::to_string(i) + "]", 0));
    }
    try {
        return ProbeState::mixture(weights, vectors);
    } catch (const Error &e) {
        throw ConfigError(field, e.what());
    }
}

CustomCircuitSpec parse_circuit(const json &j, const std::string &field) {
    require_object(j, field);
    CustomCircuitSpec c;
    c.probe = parse_probe_state(require(j, "probe_state", field + "."), field + ".probe_state");
    c.probe_operator = parse_matrix(require(j, "probe_operator", field + "."), field + ".probe_operator", c.probe.dim());
    const json &outs = require(j, "outcomes", field + ".");
    if (!outs.is_array() || outs.empty()) {
        throw ConfigError(field + ".outcomes", "expected a nonempty array");
    }
    for (std::size_t i = 0; i < outs.size(); i++) {
        std::string f = field + ".outcomes[" + std::to_string(i) + "]";
        require_object(outs[i], f);
        ProbeOutcome o;
        const json *label = find(outs[i], "label");
        o.label = label && label->is_string() ? label->get<std::string>() : std::to_string(i);
        const json &vs = require(outs[i], "vectors", f + ".");
        if (!vs.is_array() || vs.empty()) {
            throw ConfigError(f + ".vectors", "expected a nonempty array of vectors");
        }
        for (std::size_t k = 0; k < vs.size(); k++) {
            o.vectors.push_back(parse_vector(vs[k], f + ".vectors[" + std::to_string(k) + "]", c.probe.dim()));
        }
        o.value = get_double(outs[i], "value", f + ".", 0.0);
        o.value2 = get_double(outs[i], "value2", f + ".", 0.0);
        c.outcomes.push_back(std::move(o));
    }
    return c;
}

}  // namespace

Matrix parse_matrix(const json &j, const std::string &field, int dim) {
    if (j.is_string()) {
        return named_matrix(j.get<std::string>(), field, dim);
    }
    if (j.is_object() && j.contains("op")) {
        double scale = get_double(j, "scale", field + ".", 1.0);
        return scale * parse_matrix(j["op"], field + ".op", dim);
    }
    if (!j.is_array() || j.empty()) {
        throw ConfigError(field, "expected a matrix (array of rows of [re, im] pairs) or an operator name");
    }
    int rows = static_cast<int>(j.size());
    if (dim > 0 && rows != dim) {
        throw ConfigError(field, "expected " + std::to_string(dim) + " rows, got " + std::to_string(rows));
    }
    Matrix m(rows, rows);
    for (int r = 0; r < rows; r++) {
        const json &row = j[r];
        std::string rf = field + "[" + std::to_string(r) + "]";
        if (!row.is_array() || static_cast<int>(row.size()) != rows) {
            throw ConfigError(rf, "expected a row of " + std::to_string(rows) + " entries");
        }
        for (int c = 0; c < rows; c++) {
            m(r, c) = parse_complex(row[c], rf + "[" + std::to_string(c) + "]");
        }
    }
    return m;
}

RunConfig parse_run_config(const json &root) {
    require_object(root, "config");
    RunConfig cfg;
    cfg.source = root;
    EnsembleConfig &e = cfg.ensemble;

    const json &sys = require(root, "system", "");
    require_object(sys, "system");
    std::uint64_t dim = get_count(sys, "dim", "system.", 2);
    if (dim < 1 || dim > 64) {
        throw ConfigError("system.dim", "must lie in [1, 64]");
    }
    e.sys.dim = static_cast<int>(dim);
    e.sys.gamma = get_double(sys, "gamma", "system.", 1.0);
    if (!(e.sys.gamma > 0)) {
        throw ConfigError("system.gamma", "must be positive");
    }
    e.sys.c = parse_matrix(require(sys, "coupling", "system."), "system.coupling", e.sys.dim);
    if (const json *h = find(sys, "hamiltonian")) {
        Matrix hm = parse_matrix(*h, "system.hamiltonian", e.sys.dim);
        if (!is_hermitian(hm)) {
            throw ConfigError("system.hamiltonian", "must be Hermitian");
        }
        e.sys.h_ext = hm;
    }
    e.rho0 = parse_state(require(sys, "initial_state", "system."), "system.initial_state", e.sys.dim);

    const json &sch = require(root, "scheme", "");
    require_object(sch, "scheme");
    const json &type = require(sch, "type", "scheme.");
    if (!type.is_string()) {
        throw ConfigError("scheme.type", "expected a scheme identifier string");
    }
    try {
        e.scheme.kind = parse_scheme_kind(type.get<std::string>());
    } catch (const Error &ex) {
        throw ConfigError("scheme.type", ex.what());
    }
    e.scheme.phi = get_double(sch, "phi", "scheme.", 0.0);
    e.scheme.eta = get_double(sch, "eta", "scheme.", 1.0);
    e.scheme.theta = get_double(sch, "theta", "scheme.", e.scheme.theta);
    e.scheme.lambda = get_double(sch, "lambda", "scheme.", 0.0);
    if (e.scheme.kind == SchemeKind::CustomCircuit) {
        e.scheme.circuit = parse_circuit(require(sch, "circuit", "scheme."), "scheme.circuit");
    }

    if (const json *bath = find(root, "bath")) {
        require_object(*bath, "bath");
        if (const json *a = find(*bath, "alpha")) {
            e.scheme.bath.alpha = parse_complex(*a, "bath.alpha");
        }
        e.scheme.bath.n_th = get_double(*bath, "n_th", "bath.", 0.0);
        e.scheme.bath.r = get_double(*bath, "r", "bath.", 0.0);
        e.scheme.bath.mu = get_double(*bath, "mu", "bath.", 0.0);
        try {
            e.scheme.bath.validate();
        } catch (const Error &ex) {
            throw ConfigError("bath", ex.what());
        }
    }

    const json &run = require(root, "run", "");
    require_object(run, "run");
    e.dt = get_double(run, "dt", "run.", std::nullopt);
    if (!(e.dt > 0)) {
        throw ConfigError("run.dt", "must be positive");
    }
    e.steps = get_count(run, "steps", "run.", std::nullopt);
    if (e.steps < 1) {
        throw ConfigError("run.steps", "must be at least 1");
    }
    e.n_traj = get_count(run, "trajectories", "run.", 1);
    if (e.n_traj < 1) {
        throw ConfigError("run.trajectories", "must be at least 1");
    }
    e.master_seed = get_count(run, "seed", "run.", 0);
    e.record_every = get_count(run, "record_every", "run.", 1);
    if (e.record_every < 1) {
        throw ConfigError("run.record_every", "must be at least 1");
    }
    if (const json *rs = find(run, "record_states")) {
        if (!rs->is_boolean()) {
            throw ConfigError("run.record_states", "expected true or false");
        }
        e.record_states = rs->get<bool>();
    }

    if (const json *obs = find(root, "observables")) {
        if (!obs->is_array()) {
            throw ConfigError("observables", "expected an array");
        }
        for (std::size_t i = 0; i < obs->size(); i++) {
            std::string f = "observables[" + std::to_string(i) + "]";
            const json &o = (*obs)[i];
            require_object(o, f);
            const json &name = require(o, "name", f + ".");
            if (!name.is_string() || name.get<std::string>().empty()) {
                throw ConfigError(f + ".name", "expected a nonempty string");
            }
            std::string n = name.get<std::string>();
            if (n.find_first_of(",\"\n") != std::string::npos) {
                throw ConfigError(f + ".name", "must not contain commas, quotes or newlines");
            }
            Matrix m = parse_matrix(require(o, "matrix", f + "."), f + ".matrix", e.sys.dim);
            if (!is_hermitian(m)) {
                throw ConfigError(f + ".matrix", "must be Hermitian");
            }
            e.observables.push_back({n, m});
        }
    }

    if (const json *outs = find(root, "outputs")) {
        require_object(*outs, "outputs");
        for (const char *key : {"csv", "json", "svg"}) {
            if (const json *p = find(*outs, key)) {
                if (!p->is_string() || p->get<std::string>().empty()) {
                    throw ConfigError(std::string("outputs.") + key, "expected a path string");
                }
                std::string path = p->get<std::string>();
                if (std::string(key) == "csv") cfg.outputs.csv = path;
                else if (std::string(key) == "json") cfg.outputs.json = path;
                else cfg.outputs.svg = path;
            }
        }
        if (const json *me = find(*outs, "master_equation")) {
            if (!me->is_boolean()) {
                throw ConfigError("outputs.master_equation", "expected true or false");
            }
            cfg.outputs.master_equation = me->get<bool>();
        }
    }
    e.me_reference = cfg.outputs.master_equation;

    try {
        e.sys.validate();
    } catch (const Error &ex) {
        throw ConfigError("system", ex.what());
    }
    try {
        build_kraus(e.sys, e.scheme, e.dt);
    } catch (const Error &ex) {
        throw ConfigError("scheme", ex.what());
    }
    return cfg;
}

RunConfig load_run_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("config", "cannot open '" + path + "'");
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception &ex) {
        throw ConfigError("config", std::string("malformed JSON: ") + ex.what());
    }
    return parse_run_config(j);
}

}  // namespace qtraj
