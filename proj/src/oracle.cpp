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

#include "qtraj/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "qtraj/stepper.hpp"

namespace qtraj {

void GaussianMEParams::validate() const {
    if (c.rows() != c.cols()) {
        throw DimensionMismatch("master equation coupling operator is not square");
    }
    if (!(gamma >= 0) || !std::isfinite(gamma)) {
        throw InvalidArgument("master equation rate must be non-negative");
    }
    if (!(N >= 0)) {
        throw InvalidArgument("master equation N must be non-negative");
    }
    if (std::norm(M) > N * (N + 1) + 1e-12) {
        throw InvalidArgument("master equation violates |M|^2 <= N(N+1)");
    }
}

Matrix gaussian_me_rhs(const Matrix &rho, const GaussianMEParams &p, const std::optional<Matrix> &h_ext) {
    p.validate();
    if (rho.rows() != p.c.rows() || rho.cols() != p.c.cols()) {
        throw DimensionMismatch("state and coupling operator have different dimensions");
    }
    double sg = std::sqrt(p.gamma);
    Matrix c = sg * p.c;
    Matrix cd = c.adjoint();
    Matrix drive = std::conj(p.beta) * c - p.beta * cd;
    Matrix out = commutator(drive, rho);
    out += (p.N + p.commutator) * superop_D(c, rho);
    out += p.N * superop_D(cd, rho);
    out += 0.5 * std::conj(p.M) * commutator(c, commutator(c, rho));
    out += 0.5 * p.M * commutator(cd, commutator(cd, rho));
    if (h_ext) {
        out += -kI * commutator(*h_ext, rho);
    }
    return out;
}

namespace {

Matrix rk4_step(const Matrix &y, double h, const GaussianMEParams &p, const std::optional<Matrix> &h_ext) {
    Matrix k1 = gaussian_me_rhs(y, p, h_ext);
    Matrix k2 = gaussian_me_rhs(y + 0.5 * h * k1, p, h_ext);
    Matrix k3 = gaussian_me_rhs(y + 0.5 * h * k2, p, h_ext);
    Matrix k4 = gaussian_me_rhs(y + h * k3, p, h_ext);
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double operator_norm(const Matrix &m) {
    if (m.size() == 0) {
        return 0;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

}  // namespace

MESolution integrate_me(
    const DensityMatrix &rho0, const GaussianMEParams &p, double t_final, double dt, const std::optional<Matrix> &h_ext) {
    p.validate();
    if (!(dt > 0) || !(t_final >= 0)) {
        throw InvalidArgument("integrate_me needs dt > 0 and t_final >= 0");
    }
    double cn = operator_norm(p.c);
    double gamma_eff = p.gamma * cn * cn * (2 * p.N + p.commutator + 2 * std::abs(p.M)) +
                       2 * std::sqrt(p.gamma) * cn * std::abs(p.beta) + (h_ext ? operator_norm(*h_ext) : 0.0);
    double h = dt;
    if (gamma_eff > 0) {
        h = std::min(h, 1e-3 / gamma_eff);
    }
    auto substeps = static_cast<std::size_t>(std::ceil(dt / h - 1e-9));
    substeps = std::max<std::size_t>(substeps, 1);
    h = dt / static_cast<double>(substeps);
    auto n_out = static_cast<std::size_t>(std::floor(t_final / dt + 1e-9));
    // A trailing partial interval lands the last sample on t_final.
    bool tail = t_final - static_cast<double>(n_out) * dt > 1e-9 * dt;
    if (tail) {
        n_out++;
    }

    MESolution sol;
    sol.internal_dt = h;
    sol.times.reserve(n_out + 1);
    sol.states.reserve(n_out + 1);
    Matrix y = rho0.matrix();
    sol.times.push_back(0);
    sol.states.push_back(DensityMatrix::unchecked(y));
    for (std::size_t k = 1; k <= n_out; k++) {
        bool last_partial = tail && k == n_out;
        double t_end = last_partial ? t_final : static_cast<double>(k) * dt;
        double hk = last_partial ? (t_final - static_cast<double>(k - 1) * dt) / static_cast<double>(substeps) : h;
        for (std::size_t s = 0; s < substeps; s++) {
            Matrix full = rk4_step(y, hk, p, h_ext);
            Matrix half = rk4_step(rk4_step(y, 0.5 * hk, p, h_ext), 0.5 * hk, p, h_ext);
            double err = (full - half).cwiseAbs().maxCoeff() * 16.0 / 15.0;
            if (err > 1e-6) {
                std::ostringstream os;
                os << "local error estimate " << err << " exceeds 1e-6 at t=" << static_cast<double>(k - 1) * dt;
                throw StepRejected(os.str());
            }
            y = half;
            double tr = y.trace().real();
            sol.max_trace_drift = std::max(sol.max_trace_drift, std::abs(tr - 1.0));
            y = 0.5 * (y + y.adjoint()) / tr;
        }
        sol.times.push_back(t_end);
        sol.states.push_back(DensityMatrix::unchecked(y));
    }
    return sol;
}

BathStats bath_stats(const Matrix &a, const Matrix &probe_density, double delta_tau) {
    if (a.rows() != a.cols() || probe_density.rows() != probe_density.cols() || a.rows() != probe_density.rows()) {
        throw DimensionMismatch("probe operator and probe state have different dimensions");
    }
    if (!(delta_tau > 0)) {
        throw InvalidArgument("delta_tau must be positive");
    }
    Matrix da = std::sqrt(delta_tau) * a;
    Complex mean = trace_product(probe_density, da);
    BathStats s;
    s.alpha = mean / delta_tau;
    s.N = (trace_product(probe_density, da.adjoint() * da) - std::norm(mean)).real() / delta_tau;
    s.M = (trace_product(probe_density, da * da) - mean * mean) / delta_tau;
    s.commutator = trace_product(probe_density, commutator(da, da.adjoint())).real() / delta_tau;
    return s;
}

GaussianMEParams matched_me_params(const SystemModel &sys, const SchemeConfig &scheme, double delta_tau) {
    GaussianMEParams p;
    p.c = sys.c;
    p.gamma = sys.gamma;
    switch (scheme.kind) {
        case SchemeKind::VacuumPhotocount:
        case SchemeKind::VacuumHomodyne:
        case SchemeKind::VacuumHeterodyne:
            break;
        case SchemeKind::CoherentPhotocount:
            p.beta = std::sqrt(sys.gamma) * scheme.bath.alpha;
            break;
        case SchemeKind::ThermalHomodyne:
            p.N = scheme.bath.n_th;
            break;
        case SchemeKind::SqueezedThermalHomodyne:
            p.N = scheme.bath.N();
            p.M = scheme.bath.M();
            p.beta = std::sqrt(sys.gamma) * scheme.bath.alpha;
            break;
        case SchemeKind::InefficientHomodyne:
            p.c = std::sqrt(scheme.eta) * sys.c;
            break;
        case SchemeKind::PoissonStrong:
            // Dephasing D[sigma_z] at rate lambda/2.
            p.c = sigma_z();
            p.gamma = 0.5 * scheme.lambda;
            break;
        case SchemeKind::CustomCircuit: {
            BathModel bm = scheme_bath_model(scheme, delta_tau);
            BathStats s = bath_stats(bm.a, bm.probe_density, delta_tau);
            p.beta = std::sqrt(sys.gamma) * s.alpha;
            p.N = s.N;
            p.M = s.M;
            p.commutator = s.commutator;
            break;
        }
    }
    return p;
}

double ConsistencyReport::max_residual() const {
    double m = 0;
    for (double r : residuals) {
        m = std::max(m, r);
    }
    return m;
}

double fit_log_slope(const std::vector<double> &x, const std::vector<double> &y) {
    size_t n = x.size();
    if (n < 2 || y.size() != n) {
        throw InvalidArgument("slope fit needs at least two matching points");
    }
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t i = 0; i < n; i++) {
        double lx = std::log(x[i]);
        double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

ConsistencyReport unconditional_consistency(
    const SystemModel &sys, const SchemeConfig &scheme, const DensityMatrix &rho, double delta_tau) {
    sys.validate();
    if (!(sys.gamma > 0)) {
        throw InvalidArgument("consistency check needs gamma > 0");
    }
    ConsistencyReport rep;
    for (int i = 0; i < 3; i++) {
        double dtau = delta_tau / std::pow(2.0, i);
        double dt = dtau / sys.gamma;
        KrausSet k = build_kraus(sys, scheme, dt);
        Matrix next = unconditional_step(rho, k, sys).matrix();
        GaussianMEParams p = matched_me_params(sys, scheme, dtau);
        Matrix rhs = gaussian_me_rhs(rho.matrix(), p, sys.h_ext);
        rep.delta_taus.push_back(dtau);
        rep.residuals.push_back((next - rho.matrix() - dt * rhs).norm());
    }
    rep.exact = rep.max_residual() <= 1e-13;
    rep.exponent = rep.exact ? std::nan("") : fit_log_slope(rep.delta_taus, rep.residuals);
    return rep;
}

Matrix beamsplitter(Complex eta) {
    Matrix gen = kI * (eta * kron(sigma_minus(), sigma_plus()) + std::conj(eta) * kron(sigma_plus(), sigma_minus()));
    return exp_antihermitian(gen);
}

Matrix beamsplitter_explicit() {
    // Two-qubit basis order: ee, eg, ge, gg.
    constexpr int ee = 0, eg = 1, ge = 2, gg = 3;
    double r = 1.0 / std::sqrt(2.0);
    Matrix bs = Matrix::Zero(4, 4);
    bs(gg, gg) = 1;
    bs(ee, ee) = 1;
    bs(ge, ge) = r;
    bs(eg, eg) = r;
    bs(ge, eg) = r;
    bs(eg, ge) = -r;
    return bs;
}

Matrix beamsplitter_factored() {
    double a = std::numbers::pi / 8;
    Matrix xy = kron(sigma_x(), sigma_y());
    Matrix yx = kron(sigma_y(), sigma_x());
    return exp_antihermitian(kI * a * xy) * exp_antihermitian(-kI * a * yx);
}

std::vector<Matrix> heterodyne_circuit_kraus(const SystemModel &sys, double delta_tau) {
    sys.validate();
    int d = sys.dim;
    Matrix ui = interaction_unitary_truncated(sys, sigma_minus(), delta_tau);
    Matrix circuit = kron(identity(d), beamsplitter_explicit()) * kron(ui, identity(2));
    Vector gg = Vector::Zero(4);
    gg(3) = 1;
    Matrix in = kron(identity(d), Matrix(gg));
    std::vector<Matrix> out;
    for (int s : {1, -1}) {
        for (int t : {1, -1}) {
            Vector p1 = ket_phi(s);
            Vector p2 = ket_phi(t, std::numbers::pi / 2);
            Vector proj(4);
            for (int i = 0; i < 2; i++) {
                for (int j = 0; j < 2; j++) {
                    proj(2 * i + j) = p1(i) * p2(j);
                }
            }
            Matrix bra = kron(identity(d), Matrix(proj.adjoint()));
            out.push_back(bra * circuit * in);
        }
    }
    return out;
}

double heterodyne_circuit_equivalence(const SystemModel &sys, double delta_tau) {
    auto circ = heterodyne_circuit_kraus(sys, delta_tau);
    KrausSet k = kraus_vacuum_heterodyne(sys, delta_tau);
    double m = 0;
    for (size_t j = 0; j < circ.size(); j++) {
        m = std::max(m, (circ[j] - k.outcomes[j].branches[0]).cwiseAbs().maxCoeff());
    }
    return m;
}

}  // namespace qtraj

namespace qtraj {

double kraus_difference(const KrausSet &a, const KrausSet &b) {
    if (a.outcomes.size() != b.outcomes.size()) {
        throw DimensionMismatch("Kraus sets have different outcome counts");
    }
    double m = 0;
    for (const auto &oa : a.outcomes) {
        auto it = std::find_if(b.outcomes.begin(), b.outcomes.end(), [&](const OutcomeChannel &o) {
            return o.label == oa.label;
        });
        if (it == b.outcomes.end() || it->branches.size() != oa.branches.size()) {
            throw DimensionMismatch("outcome '" + oa.label + "' has no matching branches");
        }
        for (std::size_t k = 0; k < oa.branches.size(); k++) {
            m = std::max(m, (oa.branches[k] - it->branches[k]).cwiseAbs().maxCoeff());
        }
    }
    return m;
}

double conditional_split(const KrausSet &kraus, const Matrix &rho, int i, int j) {
    auto update = [&](int k) {
        Matrix out = Matrix::Zero(rho.rows(), rho.cols());
        for (const auto &b : kraus.outcomes.at(k).branches) {
            out += b * rho * b.adjoint();
        }
        double p = out.trace().real();
        if (!(p > kJumpTol)) {
            throw JumpImpossible("outcome '" + kraus.outcomes.at(k).label + "' has zero probability");
        }
        return Matrix(out / p);
    };
    return (update(i) - update(j)).norm();
}

}  // namespace qtraj
