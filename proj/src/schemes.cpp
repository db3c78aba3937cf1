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

#include "qtraj/schemes.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace qtraj {

namespace {

constexpr double kSoftStepLimit = 0.1;
constexpr double kHardStepLimit = 0.5;

Vector kron_vec(const Vector &a, const Vector &b) {
    Vector out(a.size() * b.size());
    for (Eigen::Index i = 0; i < a.size(); i++) {
        out.segment(i * b.size(), b.size()) = a(i) * b;
    }
    return out;
}

std::string fmt_double(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

// Checks the scaled step against the soft and hard limits. Returns a warning or empty.
std::string check_step(const std::string &scheme, double delta_tau, double scaled) {
    if (!(delta_tau > 0) || !std::isfinite(delta_tau)) {
        throw InvalidArgument(scheme + ": delta_tau must be positive, got " + fmt_double(delta_tau));
    }
    if (scaled > kHardStepLimit) {
        throw InvalidArgument(
            scheme + ": effective step " + fmt_double(scaled) + " exceeds hard limit " + fmt_double(kHardStepLimit));
    }
    if (scaled > kSoftStepLimit) {
        return scheme + ": effective step " + fmt_double(scaled) + " exceeds " + fmt_double(kSoftStepLimit) +
               "; truncation error may be large";
    }
    return {};
}

void add_warning(KrausSet &set, const std::string &w) {
    if (!w.empty()) {
        set.warnings.push_back(w);
    }
}

void require_coupling(const SystemModel &sys) {
    sys.validate();
}

// Two outcomes with K_{+-,g} and K_{+-,e} branches of a qubit probe prepared in a
// thermal mixture (weights wg, we) coupled through ceff, measured along phi.
KrausSet homodyne_pair(
    const Matrix &ceff, Complex phase, double wg, double we, double delta_tau, const Matrix &mean_field) {
    int d = static_cast<int>(ceff.rows());
    Matrix id = Matrix::Identity(d, d);
    double sq = std::sqrt(delta_tau);
    double r2 = 1.0 / std::sqrt(2.0);
    Matrix cdc = ceff.adjoint() * ceff;
    Matrix ccd = ceff * ceff.adjoint();
    KrausSet set;
    set.delta_tau = delta_tau;
    for (int s : {1, -1}) {
        OutcomeChannel ch;
        ch.label = s > 0 ? "+" : "-";
        ch.innovation_value = s * sq;
        Matrix kg = wg * r2 * (id + (s * sq) * phase * ceff - 0.5 * delta_tau * cdc + mean_field);
        Complex epref = static_cast<double>(s) * phase * we * r2;
        Matrix ke = epref * (id - (s * sq) * std::conj(phase) * ceff.adjoint() - 0.5 * delta_tau * ccd + mean_field);
        ch.branches = {kg, ke};
        set.outcomes.push_back(std::move(ch));
    }
    set.refresh_povms();
    return set;
}

}  // namespace

void SystemModel::validate() const {
    if (dim < 1) {
        throw InvalidArgument("system dimension must be positive");
    }
    if (c.rows() != dim || c.cols() != dim) {
        throw DimensionMismatch("coupling operator must be " + std::to_string(dim) + "x" + std::to_string(dim));
    }
    if (!c.allFinite()) {
        throw InvalidArgument("coupling operator has non-finite entries");
    }
    if (!(gamma >= 0) || !std::isfinite(gamma)) {
        throw InvalidArgument("gamma must be finite and non-negative");
    }
    if (h_ext) {
        if (h_ext->rows() != dim || h_ext->cols() != dim) {
            throw DimensionMismatch("hamiltonian must be " + std::to_string(dim) + "x" + std::to_string(dim));
        }
        if (!is_hermitian(*h_ext)) {
            throw InvalidArgument("hamiltonian is not Hermitian");
        }
    }
}

SystemModel SystemModel::qubit(const Matrix &c, double gamma, std::optional<Matrix> h_ext) {
    SystemModel s;
    s.dim = static_cast<int>(c.rows());
    s.c = c;
    s.gamma = gamma;
    s.h_ext = std::move(h_ext);
    return s;
}

double BathParams::N() const {
    double sh = std::sinh(r);
    return (2 * n_th + 1) * sh * sh + n_th;
}

Complex BathParams::M() const {
    return -(2 * n_th + 1) * std::exp(2.0 * kI * mu) * std::sinh(r) * std::cosh(r);
}

void BathParams::validate() const {
    if (!std::isfinite(n_th) || n_th < 0) {
        throw InvalidArgument("bath.n_th must be finite and non-negative");
    }
    if (!std::isfinite(r) || r < 0) {
        throw InvalidArgument("bath.r must be finite and non-negative");
    }
    if (!std::isfinite(mu)) {
        throw InvalidArgument("bath.mu must be finite");
    }
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
        throw InvalidArgument("bath.alpha must be finite");
    }
    double n = N();
    if (std::norm(M()) > n * (n + 1) + 1e-12 * std::max(1.0, n * (n + 1))) {
        throw InvalidArgument("bath violates |M|^2 <= N(N+1)");
    }
}

SqueezeDerived derive_squeeze(const BathParams &bath, const Matrix &c) {
    bath.validate();
    double ch = std::cosh(bath.r);
    double sh = std::sinh(bath.r);
    SqueezeDerived d;
    d.N = bath.N();
    d.M = bath.M();
    d.L = 1 + 2 * sh * sh - 2 * std::cos(2 * bath.mu) * sh * ch;
    d.L_prime = (2 * bath.n_th + 1) * d.L;
    Complex e = (ch - std::exp(-2.0 * kI * bath.mu) * sh) / std::sqrt(d.L);
    d.phi_sq = std::arg(e);
    d.c_sq = c * ch + std::exp(2.0 * kI * bath.mu) * sh * c.adjoint();
    return d;
}

int KrausSet::dim() const {
    if (outcomes.empty() || outcomes.front().branches.empty()) {
        return 0;
    }
    return static_cast<int>(outcomes.front().branches.front().rows());
}

void KrausSet::refresh_povms() {
    for (auto &o : outcomes) {
        if (o.branches.empty()) {
            throw InvalidArgument("outcome '" + o.label + "' has no Kraus branches");
        }
        Eigen::Index d = o.branches.front().rows();
        o.povm = Matrix::Zero(d, d);
        for (const auto &k : o.branches) {
            o.povm += k.adjoint() * k;
        }
    }
}

Matrix KrausSet::povm_sum() const {
    int d = dim();
    Matrix s = Matrix::Zero(d, d);
    for (const auto &o : outcomes) {
        s += o.povm;
    }
    return s;
}

double KrausSet::completeness_defect() const {
    int d = dim();
    return (povm_sum() - Matrix::Identity(d, d)).norm();
}

ProbeState ProbeState::pure(const Vector &v) {
    return ProbeState{{1.0}, {v}};
}

ProbeState ProbeState::mixture(std::vector<double> weights, std::vector<Vector> vectors) {
    return ProbeState{std::move(weights), std::move(vectors)};
}

int ProbeState::dim() const {
    return vectors.empty() ? 0 : static_cast<int>(vectors.front().size());
}

Matrix ProbeState::density() const {
    int p = dim();
    Matrix rho = Matrix::Zero(p, p);
    for (size_t k = 0; k < vectors.size(); k++) {
        rho += weights[k] * vectors[k] * vectors[k].adjoint();
    }
    return rho;
}

Matrix interaction_generator(const SystemModel &sys, const Matrix &a, double delta_tau) {
    if (sys.c.rows() != sys.c.cols()) {
        throw DimensionMismatch("coupling operator is not square");
    }
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("probe operator is not square");
    }
    if (!(delta_tau > 0)) {
        throw InvalidArgument("delta_tau must be positive");
    }
    return std::sqrt(delta_tau) * (kron(sys.c, a.adjoint()) - kron(sys.c.adjoint(), a));
}

Matrix interaction_unitary_exact(const SystemModel &sys, const Matrix &a, double delta_tau) {
    return exp_antihermitian(interaction_generator(sys, a, delta_tau));
}

Matrix interaction_unitary_truncated(const SystemModel &sys, const Matrix &a, double delta_tau) {
    Matrix g = interaction_generator(sys, a, delta_tau);
    return Matrix::Identity(g.rows(), g.cols()) + g + 0.5 * g * g;
}

KrausSet kraus_from_circuit(
    const Matrix &u, const ProbeState &probe, const std::vector<ProbeOutcome> &outcomes, double delta_tau) {
    if (probe.vectors.empty() || probe.weights.size() != probe.vectors.size()) {
        throw InvalidArgument("probe state needs one weight per vector");
    }
    int p = probe.dim();
    if (p == 0 || u.rows() != u.cols() || u.rows() % p != 0) {
        throw DimensionMismatch("circuit unitary does not factor as system (x) probe");
    }
    double defect = unitarity_defect(u);
    if (defect > 1e-10) {
        throw InvalidArgument("circuit operator is not unitary (defect " + fmt_double(defect) + ")");
    }
    double wsum = 0;
    for (size_t k = 0; k < probe.vectors.size(); k++) {
        if (probe.vectors[k].size() != p) {
            throw DimensionMismatch("probe state vectors have inconsistent sizes");
        }
        if (!(probe.weights[k] >= 0)) {
            throw InvalidArgument("probe weights must be non-negative");
        }
        if (std::abs(probe.vectors[k].norm() - 1.0) > 1e-12) {
            throw InvalidArgument("probe state vector is not normalized");
        }
        wsum += probe.weights[k];
    }
    if (std::abs(wsum - 1.0) > 1e-12) {
        throw InvalidArgument("probe weights do not sum to 1");
    }
    Matrix resolution = Matrix::Zero(p, p);
    for (const auto &o : outcomes) {
        for (const auto &v : o.vectors) {
            if (v.size() != p) {
                throw DimensionMismatch("measurement vector has wrong size");
            }
            resolution += v * v.adjoint();
        }
    }
    if ((resolution - Matrix::Identity(p, p)).cwiseAbs().maxCoeff() > 1e-10) {
        throw InvalidArgument("measurement vectors do not resolve the probe identity");
    }

    int d = static_cast<int>(u.rows()) / p;
    Matrix id = Matrix::Identity(d, d);
    KrausSet set;
    set.scheme_tag = "custom_circuit";
    set.delta_tau = delta_tau;
    for (const auto &o : outcomes) {
        OutcomeChannel ch;
        ch.label = o.label;
        ch.innovation_value = o.value;
        ch.innovation_value2 = o.value2;
        if (o.vectors.empty()) {
            throw InvalidArgument("outcome '" + o.label + "' has no measurement vectors");
        }
        for (const auto &v : o.vectors) {
            Matrix bra = kron(id, Matrix(v.adjoint()));
            Matrix left = bra * u;
            for (size_t k = 0; k < probe.vectors.size(); k++) {
                Matrix ket = kron(id, Matrix(probe.vectors[k]));
                ch.branches.push_back(std::sqrt(probe.weights[k]) * (left * ket));
            }
        }
        set.outcomes.push_back(std::move(ch));
    }
    set.refresh_povms();
    return set;
}

KrausSet kraus_from_circuit(const Matrix &u, const ProbeState &probe, const std::vector<Vector> &basis) {
    std::vector<ProbeOutcome> outs;
    for (size_t j = 0; j < basis.size(); j++) {
        outs.push_back(ProbeOutcome{std::to_string(j), {basis[j]}, static_cast<double>(j), 0});
    }
    return kraus_from_circuit(u, probe, outs);
}

KrausSet kraus_vacuum_photocount(const SystemModel &sys, double delta_tau) {
    require_coupling(sys);
    KrausSet set;
    add_warning(set, check_step("vacuum_photocount", delta_tau, delta_tau));
    set.scheme_tag = "vacuum_photocount";
    set.delta_tau = delta_tau;
    Matrix id = identity(sys.dim);
    OutcomeChannel e{"e", {std::sqrt(delta_tau) * sys.c}, 1.0, 0.0, {}};
    OutcomeChannel g{"g", {id - 0.5 * delta_tau * sys.c.adjoint() * sys.c}, 0.0, 0.0, {}};
    set.outcomes = {e, g};
    set.refresh_povms();
    return set;
}

KrausSet kraus_vacuum_homodyne(const SystemModel &sys, double delta_tau, double phi) {
    require_coupling(sys);
    KrausSet set;
    add_warning(set, check_step("vacuum_homodyne", delta_tau, delta_tau));
    set.scheme_tag = "vacuum_homodyne";
    set.delta_tau = delta_tau;
    Matrix id = identity(sys.dim);
    double sq = std::sqrt(delta_tau);
    Complex phase = std::exp(kI * phi);
    Matrix cdc = sys.c.adjoint() * sys.c;
    for (int s : {1, -1}) {
        Matrix k = (id + (s * sq) * phase * sys.c - 0.5 * delta_tau * cdc) / std::sqrt(2.0);
        set.outcomes.push_back(OutcomeChannel{s > 0 ? "+" : "-", {k}, s * sq, 0.0, {}});
    }
    set.refresh_povms();
    return set;
}

KrausSet kraus_vacuum_heterodyne(const SystemModel &sys, double delta_tau) {
    require_coupling(sys);
    KrausSet set;
    add_warning(set, check_step("vacuum_heterodyne", delta_tau, delta_tau));
    set.scheme_tag = "vacuum_heterodyne";
    set.delta_tau = delta_tau;
    set.two_component = true;
    Matrix id = identity(sys.dim);
    double sq = std::sqrt(delta_tau);
    Matrix cdc = sys.c.adjoint() * sys.c;
    for (int s : {1, -1}) {
        for (int t : {1, -1}) {
            // s e^{s t i pi/4} = (s + t i)/sqrt(2)
            Complex w = Complex(s, t) / std::sqrt(2.0);
            Matrix k = 0.5 * (id + sq * w * sys.c - 0.5 * delta_tau * cdc);
            std::string label = std::string(s > 0 ? "+" : "-") + (t > 0 ? "+" : "-");
            set.outcomes.push_back(OutcomeChannel{label, {k}, s * sq, t * sq, {}});
        }
    }
    set.refresh_povms();
    return set;
}

KrausSet kraus_coherent_photocount(const SystemModel &sys, double delta_tau, Complex alpha) {
    require_coupling(sys);
    KrausSet set;
    double a2 = std::norm(alpha);
    add_warning(set, check_step("coherent_photocount", delta_tau, delta_tau * std::max(1.0, a2)));
    set.scheme_tag = "coherent_photocount";
    set.delta_tau = delta_tau;
    Matrix id = identity(sys.dim);
    double pref = 1.0 - 0.5 * a2 * delta_tau;
    Matrix ke = pref * std::sqrt(delta_tau) * (alpha * id + sys.c);
    Matrix kg = pref * (id - delta_tau * (alpha * sys.c.adjoint() + 0.5 * sys.c.adjoint() * sys.c));
    set.outcomes = {OutcomeChannel{"e", {ke}, 1.0, 0.0, {}}, OutcomeChannel{"g", {kg}, 0.0, 0.0, {}}};
    set.refresh_povms();
    return set;
}

KrausSet kraus_thermal_homodyne(const SystemModel &sys, double delta_tau, double n_th, double phi) {
    require_coupling(sys);
    if (!std::isfinite(n_th) || n_th < 0) {
        throw InvalidArgument("thermal_homodyne: n_th must be non-negative");
    }
    std::string w = check_step("thermal_homodyne", delta_tau, (2 * n_th + 1) * delta_tau);
    double s = std::sqrt(2 * n_th + 1);
    double wg = std::sqrt((n_th + 1) / (2 * n_th + 1));
    double we = std::sqrt(n_th / (2 * n_th + 1));
    Matrix zero = Matrix::Zero(sys.dim, sys.dim);
    KrausSet set = homodyne_pair(s * sys.c, std::exp(kI * phi), wg, we, delta_tau, zero);
    add_warning(set, w);
    set.scheme_tag = "thermal_homodyne";
    return set;
}

KrausSet kraus_squeezed_thermal_homodyne(const SystemModel &sys, double delta_tau, const BathParams &bath) {
    require_coupling(sys);
    SqueezeDerived d = derive_squeeze(bath, sys.c);
    std::string w = check_step("squeezed_thermal_homodyne", delta_tau, (2 * bath.n_th + 1) * delta_tau);
    double n = bath.n_th;
    double s = std::sqrt(2 * n + 1);
    double wg = std::sqrt((n + 1) / (2 * n + 1));
    double we = std::sqrt(n / (2 * n + 1));
    Matrix mean_field = delta_tau * (std::conj(bath.alpha) * sys.c - bath.alpha * sys.c.adjoint());
    KrausSet set = homodyne_pair(s * d.c_sq, std::exp(kI * d.phi_sq), wg, we, delta_tau, mean_field);
    add_warning(set, w);
    set.scheme_tag = "squeezed_thermal_homodyne";
    return set;
}

KrausSet kraus_poisson_strong(double theta, double lambda_dt) {
    if (!(lambda_dt >= 0 && lambda_dt <= 1)) {
        throw InvalidArgument("poisson_strong: lambda*dt must lie in [0, 1], got " + fmt_double(lambda_dt));
    }
    if (!std::isfinite(theta)) {
        throw InvalidArgument("poisson_strong: theta must be finite");
    }
    Matrix sz = sigma_z();
    // V(theta) = exp(theta/2 (sz (x) s+ - sz (x) s-)) on system (x) probe.
    Matrix gen = 0.5 * theta * (kron(sz, sigma_plus()) - kron(sz, sigma_minus()));
    Matrix v = exp_antihermitian(gen);
    Matrix pe = ket_e() * ket_e().adjoint();
    Matrix pg = ket_g() * ket_g().adjoint();
    Matrix cv = kron(identity(4), pe) + kron(v, pg);
    Vector ancilla = std::sqrt(1 - lambda_dt) * ket_e() + std::sqrt(lambda_dt) * ket_g();
    ProbeState probe = ProbeState::pure(kron_vec(ket_g(), ancilla));
    std::vector<ProbeOutcome> outs;
    for (int s : {1, -1}) {
        Vector ph = ket_phi(s);
        outs.push_back(ProbeOutcome{s > 0 ? "+" : "-", {kron_vec(ph, ket_e()), kron_vec(ph, ket_g())}, double(s), 0});
    }
    KrausSet set = kraus_from_circuit(cv, probe, outs, lambda_dt);
    set.scheme_tag = "poisson_strong";
    return set;
}

KrausSet kraus_inefficient_homodyne(const SystemModel &sys, double delta_tau, double eta) {
    require_coupling(sys);
    if (!(eta > 0 && eta <= 1)) {
        throw InvalidArgument("inefficient_homodyne: eta must lie in (0, 1], got " + fmt_double(eta));
    }
    KrausSet set;
    add_warning(set, check_step("inefficient_homodyne", delta_tau, delta_tau));
    set.scheme_tag = "inefficient_homodyne";
    set.delta_tau = delta_tau;
    Matrix id = identity(sys.dim);
    double sq = std::sqrt(delta_tau);
    Matrix cdc = sys.c.adjoint() * sys.c;
    for (int s : {1, -1}) {
        Matrix ke = std::sqrt((1 - eta) / 2) * id;
        Matrix kg = std::sqrt(eta / 2) * (id + (s * sq) * sys.c - 0.5 * delta_tau * cdc);
        set.outcomes.push_back(OutcomeChannel{s > 0 ? "+" : "-", {ke, kg}, s * sq, 0.0, {}});
    }
    set.refresh_povms();
    return set;
}

Matrix thermal_probe_density(double n_th) {
    Matrix rho = Matrix::Zero(2, 2);
    rho(0, 0) = n_th / (2 * n_th + 1);
    rho(1, 1) = (n_th + 1) / (2 * n_th + 1);
    return rho;
}

ProbeState thermal_probe_state(double n_th) {
    return ProbeState::mixture({(n_th + 1) / (2 * n_th + 1), n_th / (2 * n_th + 1)}, {ket_g(), ket_e()});
}

Matrix squeezed_probe_operator(double r, double mu) {
    return sigma_minus() * std::cosh(r) - std::exp(2.0 * kI * mu) * std::sinh(r) * sigma_plus();
}

std::vector<ProbeOutcome> homodyne_probe_outcomes(double phi, double delta_tau) {
    double sq = std::sqrt(delta_tau);
    return {ProbeOutcome{"+", {ket_phi(1, phi)}, sq, 0}, ProbeOutcome{"-", {ket_phi(-1, phi)}, -sq, 0}};
}

std::vector<ProbeOutcome> heterodyne_probe_outcomes(double delta_tau) {
    double sq = std::sqrt(delta_tau);
    std::vector<ProbeOutcome> outs;
    for (int s : {1, -1}) {
        for (int t : {1, -1}) {
            // Bra coefficient on |e> must be (s + t i)/2 after the 1/sqrt(2) subnormalization.
            Complex w = Complex(s, t) / std::sqrt(2.0);
            Vector v = (ket_g() + std::conj(w) * ket_e()) / 2.0;
            std::string label = std::string(s > 0 ? "+" : "-") + (t > 0 ? "+" : "-");
            outs.push_back(ProbeOutcome{label, {v}, s * sq, t * sq});
        }
    }
    return outs;
}

const std::vector<SchemeKind> &all_scheme_kinds() {
    static const std::vector<SchemeKind> kinds = {
        SchemeKind::VacuumPhotocount,
        SchemeKind::VacuumHomodyne,
        SchemeKind::VacuumHeterodyne,
        SchemeKind::CoherentPhotocount,
        SchemeKind::ThermalHomodyne,
        SchemeKind::SqueezedThermalHomodyne,
        SchemeKind::PoissonStrong,
        SchemeKind::InefficientHomodyne,
        SchemeKind::CustomCircuit,
    };
    return kinds;
}

std::string scheme_name(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::VacuumPhotocount:
            return "vacuum_photocount";
        case SchemeKind::VacuumHomodyne:
            return "vacuum_homodyne";
        case SchemeKind::VacuumHeterodyne:
            return "vacuum_heterodyne";
        case SchemeKind::CoherentPhotocount:
            return "coherent_photocount";
        case SchemeKind::ThermalHomodyne:
            return "thermal_homodyne";
        case SchemeKind::SqueezedThermalHomodyne:
            return "squeezed_thermal_homodyne";
        case SchemeKind::PoissonStrong:
            return "poisson_strong";
        case SchemeKind::InefficientHomodyne:
            return "inefficient_homodyne";
        case SchemeKind::CustomCircuit:
            return "custom_circuit";
    }
    return "unknown";
}

SchemeKind parse_scheme_kind(const std::string &name) {
    for (auto k : all_scheme_kinds()) {
        if (scheme_name(k) == name) {
            return k;
        }
    }
    throw InvalidArgument("unknown scheme '" + name + "'");
}

std::string scheme_parameters(SchemeKind kind) {
    switch (kind) {
        case SchemeKind::VacuumPhotocount:
            return "none";
        case SchemeKind::VacuumHomodyne:
            return "phi (radians, default 0)";
        case SchemeKind::VacuumHeterodyne:
            return "none";
        case SchemeKind::CoherentPhotocount:
            return "bath.alpha";
        case SchemeKind::ThermalHomodyne:
            return "bath.n_th, phi (radians, default 0)";
        case SchemeKind::SqueezedThermalHomodyne:
            return "bath.r, bath.mu, bath.n_th, bath.alpha";
        case SchemeKind::PoissonStrong:
            return "lambda (rate), theta (radians, default pi/2); qubit with c = sigma_z";
        case SchemeKind::InefficientHomodyne:
            return "eta in (0, 1]";
        case SchemeKind::CustomCircuit:
            return "circuit.probe_operator, circuit.probe_state, circuit.outcomes";
    }
    return "";
}

KrausSet build_kraus(const SystemModel &sys, const SchemeConfig &scheme, double dt) {
    double dtau = sys.gamma * dt;
    KrausSet set;
    switch (scheme.kind) {
        case SchemeKind::VacuumPhotocount:
            set = kraus_vacuum_photocount(sys, dtau);
            break;
        case SchemeKind::VacuumHomodyne:
            set = kraus_vacuum_homodyne(sys, dtau, scheme.phi);
            break;
        case SchemeKind::VacuumHeterodyne:
            set = kraus_vacuum_heterodyne(sys, dtau);
            break;
        case SchemeKind::CoherentPhotocount:
            set = kraus_coherent_photocount(sys, dtau, scheme.bath.alpha);
            break;
        case SchemeKind::ThermalHomodyne:
            set = kraus_thermal_homodyne(sys, dtau, scheme.bath.n_th, scheme.phi);
            break;
        case SchemeKind::SqueezedThermalHomodyne:
            set = kraus_squeezed_thermal_homodyne(sys, dtau, scheme.bath);
            break;
        case SchemeKind::PoissonStrong:
            if (sys.dim != 2) {
                throw InvalidArgument("poisson_strong requires a qubit system");
            }
            set = kraus_poisson_strong(scheme.theta, scheme.lambda * dt);
            set.delta_tau = dtau;
            break;
        case SchemeKind::InefficientHomodyne:
            set = kraus_inefficient_homodyne(sys, dtau, scheme.eta);
            break;
        case SchemeKind::CustomCircuit:
            set = build_kraus_from_circuit(sys, scheme, dt);
            break;
    }
    return set;
}

KrausSet build_kraus_from_circuit(const SystemModel &sys, const SchemeConfig &scheme, double dt) {
    sys.validate();
    double dtau = sys.gamma * dt;
    KrausSet set;
    switch (scheme.kind) {
        case SchemeKind::VacuumPhotocount: {
            Matrix u = interaction_unitary_exact(sys, sigma_minus(), dtau);
            std::vector<ProbeOutcome> outs = {{"e", {ket_e()}, 1.0, 0}, {"g", {ket_g()}, 0.0, 0}};
            set = kraus_from_circuit(u, ProbeState::pure(ket_g()), outs, dtau);
            break;
        }
        case SchemeKind::VacuumHomodyne: {
            Matrix u = interaction_unitary_exact(sys, sigma_minus(), dtau);
            set = kraus_from_circuit(u, ProbeState::pure(ket_g()), homodyne_probe_outcomes(scheme.phi, dtau), dtau);
            break;
        }
        case SchemeKind::VacuumHeterodyne: {
            Matrix u = interaction_unitary_exact(sys, sigma_minus(), dtau);
            set = kraus_from_circuit(u, ProbeState::pure(ket_g()), heterodyne_probe_outcomes(dtau), dtau);
            set.two_component = true;
            break;
        }
        case SchemeKind::CoherentPhotocount: {
            Matrix u = interaction_unitary_exact(sys, sigma_minus(), dtau);
            double amp = std::abs(scheme.bath.alpha) * std::sqrt(dtau);
            Vector probe = std::cos(amp) * ket_g() + std::exp(kI * std::arg(scheme.bath.alpha)) * std::sin(amp) * ket_e();
            std::vector<ProbeOutcome> outs = {{"e", {ket_e()}, 1.0, 0}, {"g", {ket_g()}, 0.0, 0}};
            set = kraus_from_circuit(u, ProbeState::pure(probe), outs, dtau);
            break;
        }
        case SchemeKind::ThermalHomodyne: {
            double n = scheme.bath.n_th;
            Matrix u = interaction_unitary_exact(sys, std::sqrt(2 * n + 1) * sigma_minus(), dtau);
            set = kraus_from_circuit(u, thermal_probe_state(n), homodyne_probe_outcomes(scheme.phi, dtau), dtau);
            break;
        }
        case SchemeKind::SqueezedThermalHomodyne: {
            const BathParams &b = scheme.bath;
            SqueezeDerived d = derive_squeeze(b, sys.c);
            Matrix a = std::sqrt(2 * b.n_th + 1) * squeezed_probe_operator(b.r, b.mu) +
                       b.alpha * std::sqrt(dtau) * identity(2);
            Matrix u = interaction_unitary_exact(sys, a, dtau);
            set = kraus_from_circuit(u, thermal_probe_state(b.n_th), homodyne_probe_outcomes(d.phi_sq, dtau), dtau);
            break;
        }
        case SchemeKind::PoissonStrong:
            return build_kraus(sys, scheme, dt);
        case SchemeKind::InefficientHomodyne: {
            if (!(scheme.eta > 0 && scheme.eta <= 1)) {
                throw InvalidArgument("inefficient_homodyne: eta must lie in (0, 1]");
            }
            Matrix u = interaction_unitary_exact(sys, sigma_minus(), dtau);
            int d = sys.dim;
            Matrix pe = ket_e() * ket_e().adjoint();
            Matrix pg = ket_g() * ket_g().adjoint();
            Matrix cu = kron(identity(2 * d), pe) + kron(u, pg);
            Vector ancilla = std::sqrt(1 - scheme.eta) * ket_e() + std::sqrt(scheme.eta) * ket_g();
            ProbeState probe = ProbeState::pure(kron_vec(ket_g(), ancilla));
            double sq = std::sqrt(dtau);
            std::vector<ProbeOutcome> outs;
            for (int s : {1, -1}) {
                Vector ph = ket_phi(s);
                outs.push_back(
                    ProbeOutcome{s > 0 ? "+" : "-", {kron_vec(ph, ket_e()), kron_vec(ph, ket_g())}, s * sq, 0});
            }
            set = kraus_from_circuit(cu, probe, outs, dtau);
            break;
        }
        case SchemeKind::CustomCircuit: {
            if (!scheme.circuit) {
                throw InvalidArgument("custom_circuit requires a circuit description");
            }
            Matrix u = interaction_unitary_exact(sys, scheme.circuit->probe_operator, dtau);
            set = kraus_from_circuit(u, scheme.circuit->probe, scheme.circuit->outcomes, dtau);
            for (const auto &o : set.outcomes) {
                if (o.innovation_value2 != 0) {
                    set.two_component = true;
                }
            }
            break;
        }
    }
    set.scheme_tag = scheme_name(scheme.kind);
    set.delta_tau = dtau;
    return set;
}

BathModel scheme_bath_model(const SchemeConfig &scheme, double delta_tau) {
    switch (scheme.kind) {
        case SchemeKind::VacuumPhotocount:
        case SchemeKind::VacuumHomodyne:
        case SchemeKind::VacuumHeterodyne:
        case SchemeKind::InefficientHomodyne:
            return {sigma_minus(), thermal_probe_density(0)};
        case SchemeKind::CoherentPhotocount:
            // Mean field carried by the probe operator acting on the vacuum.
            return {sigma_minus() + scheme.bath.alpha * std::sqrt(delta_tau) * identity(2), thermal_probe_density(0)};
        case SchemeKind::ThermalHomodyne:
            return {std::sqrt(2 * scheme.bath.n_th + 1) * sigma_minus(), thermal_probe_density(scheme.bath.n_th)};
        case SchemeKind::SqueezedThermalHomodyne: {
            const BathParams &b = scheme.bath;
            Matrix a = std::sqrt(2 * b.n_th + 1) * squeezed_probe_operator(b.r, b.mu) +
                       b.alpha * std::sqrt(delta_tau) * identity(2);
            return {a, thermal_probe_density(b.n_th)};
        }
        case SchemeKind::CustomCircuit:
            if (!scheme.circuit) {
                throw InvalidArgument("custom_circuit requires a circuit description");
            }
            return {scheme.circuit->probe_operator, scheme.circuit->probe.density()};
        case SchemeKind::PoissonStrong:
            break;
    }
    throw InvalidArgument(scheme_name(scheme.kind) + " has no Gaussian bath model");
}

}  // namespace qtraj
