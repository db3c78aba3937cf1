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

#include "qtraj/appendix_lab.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qtraj/schemes.hpp"

namespace qtraj {

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_nm(double N, Complex M) {
    if (!std::isfinite(N) || N < 0 || !std::isfinite(M.real()) || !std::isfinite(M.imag())) {
        throw InvalidArgument("bath parameters must be finite with N >= 0");
    }
    if (std::norm(M) > N * (N + 1) + 1e-12 * std::max(1.0, N * (N + 1))) {
        throw InvalidArgument("bath parameters violate |M|^2 <= N(N+1)");
    }
}

Vector basis_vector(int dim, int k) {
    Vector v = Vector::Zero(dim);
    v(k) = 1.0;
    return v;
}

double max_abs(const Matrix &m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace

Matrix ProbeModel::probe_density() const {
    if (pure) {
        return phi * phi.adjoint();
    }
    Matrix rho = Matrix::Zero(probe_dim, probe_dim);
    for (int t = 0; t < 2; t++) {
        if (weights[t] > 0) {
            rho += weights[t] * psi[t] * psi[t].adjoint();
        }
    }
    return rho;
}

void ProbeModel::validate() const {
    if (probe_dim < 2) {
        throw InvalidArgument("probe model needs probe_dim >= 2");
    }
    if (a_op.rows() != probe_dim || a_op.cols() != probe_dim) {
        throw DimensionMismatch("probe operator does not match probe_dim");
    }
    if (pure) {
        if (phi.size() != probe_dim || std::abs(phi.norm() - 1) > 1e-10) {
            throw InvalidArgument("pure probe state must be a unit vector of size probe_dim");
        }
    } else {
        if (weights[0] < 0 || weights[1] < 0 || std::abs(weights[0] + weights[1] - 1) > 1e-10) {
            throw InvalidArgument("probe weights must be non-negative and sum to 1");
        }
        for (int t = 0; t < 2; t++) {
            if (weights[t] > 0 && (psi[t].size() != probe_dim || std::abs(psi[t].norm() - 1) > 1e-10)) {
                throw InvalidArgument("probe mixture components must be unit vectors");
            }
        }
    }
    for (const auto &o : outcome_vectors) {
        if (o.v.size() != probe_dim) {
            throw DimensionMismatch("outcome vector does not match probe_dim");
        }
        if (o.sign != 1 && o.sign != -1) {
            throw InvalidArgument("outcome sign must be +1 or -1");
        }
        if (pure && o.tilde != 1 && o.tilde != -1) {
            throw InvalidArgument("pure models need a coarse-grained label of +1 or -1 on every outcome");
        }
    }
    for (size_t i = 0; i < outcome_vectors.size(); i++) {
        for (size_t j = 0; j < outcome_vectors.size(); j++) {
            Complex ip = outcome_vectors[i].v.dot(outcome_vectors[j].v);
            if (std::abs(ip - (i == j ? 1.0 : 0.0)) > 1e-10) {
                throw InvalidArgument("outcome vectors must be orthonormal");
            }
        }
    }
}

double ConstraintReport::max_residual() const {
    double m = 0;
    for (const auto &r : residuals) {
        m = std::max(m, r.value);
    }
    return m;
}

KrausCoefficients kraus_coefficients(const ProbeModel &model) {
    model.validate();
    if (!model.supports_homodyne) {
        throw InvalidArgument("model '" + model.name + "' only reproduces bath statistics");
    }
    const Matrix &a = model.a_op;
    Matrix ad = a.adjoint();
    KrausCoefficients out;
    bool seen[2][2] = {{false, false}, {false, false}};

    auto bracket = [&](const LabeledVector &o, int tilde, const Matrix &A) -> Complex {
        if (model.pure) {
            return o.v.dot(A * model.phi);
        }
        int t = tilde > 0 ? 0 : 1;
        if (model.weights[t] <= 0) {
            return 0.0;
        }
        return std::sqrt(model.weights[t]) * o.v.dot(A * model.psi[t]);
    };

    auto fill = [&](const LabeledVector &o, int tilde) {
        int si = o.sign > 0 ? 0 : 1;
        int ti = tilde > 0 ? 0 : 1;
        if (seen[si][ti]) {
            throw InvalidArgument("model has more than one outcome vector per label pair");
        }
        seen[si][ti] = true;
        Matrix id = identity(model.probe_dim);
        PairCoefficients p;
        p.alpha = bracket(o, tilde, id);
        p.beta0 = bracket(o, tilde, ad);
        p.beta1 = -bracket(o, tilde, a);
        p.gamma1 = -0.5 * bracket(o, tilde, ad * a);
        p.gamma2 = -0.5 * bracket(o, tilde, a * ad);
        p.gamma0 = 0.5 * bracket(o, tilde, ad * ad);
        p.gamma3 = 0.5 * bracket(o, tilde, a * a);
        if (std::abs(p.alpha) > 1e-14) {
            Complex ph = std::conj(p.alpha) / std::abs(p.alpha);
            p.alpha *= ph;
            p.beta0 *= ph;
            p.beta1 *= ph;
            p.gamma0 *= ph;
            p.gamma1 *= ph;
            p.gamma2 *= ph;
            p.gamma3 *= ph;
            p.alpha = p.alpha.real();
        }
        out.pair[si][ti] = p;
    };

    for (const auto &o : model.outcome_vectors) {
        if (model.pure) {
            fill(o, o.tilde);
        } else {
            fill(o, 1);
            fill(o, -1);
        }
    }
    return out;
}

ConstraintReport check_homodyne_constraints(const KrausCoefficients &coeffs, double N, Complex M) {
    check_nm(N, M);
    ConstraintReport rep;
    double lp = 2 * N + 2 * M.real() + 1;
    double root = std::sqrt(2 * lp);
    double alpha_norm = 0, b0 = 0, b1 = 0, cross = 0, proj0 = 0, proj1 = 0;
    double g0 = 0, g1 = 0, g2 = 0, g3 = 0;
    for (int si = 0; si < 2; si++) {
        double s = si == 0 ? 1.0 : -1.0;
        const auto &P = coeffs.pair[si][0];
        const auto &Q = coeffs.pair[si][1];
        double ap = P.alpha.real();
        double am = Q.alpha.real();
        double phi = std::atan2(am, ap);
        (si == 0 ? rep.phi_plus : rep.phi_minus) = phi;
        double c = std::cos(phi);
        double sn = std::sin(phi);

        alpha_norm = std::max(alpha_norm, std::abs(ap * ap + am * am - 0.5));
        alpha_norm = std::max({alpha_norm, std::abs(P.alpha.imag()), std::abs(Q.alpha.imag())});
        b0 = std::max(b0, std::abs(std::norm(P.beta0) + std::norm(Q.beta0) - (N + 1) / 2));
        b1 = std::max(b1, std::abs(std::norm(P.beta1) + std::norm(Q.beta1) - N / 2));
        cross = std::max(cross, std::abs(P.beta1 * std::conj(P.beta0) + Q.beta1 * std::conj(Q.beta0) + M / 2.0));
        proj0 = std::max(proj0, std::abs(P.beta0 * c + Q.beta0 * sn - s * (N + std::conj(M) + 1.0) / root));
        proj1 = std::max(proj1, std::abs(P.beta1 * c + Q.beta1 * sn + s * (N + M) / root));

        double den = 4 * std::sin(phi + kPi / 4);
        for (const auto *pc : {&P, &Q}) {
            g1 = std::max(g1, std::abs(pc->gamma1 + N / den));
            g2 = std::max(g2, std::abs(pc->gamma2 + (N + 1) / den));
            g3 = std::max(g3, std::abs(pc->gamma3 + M / den));
            g0 = std::max(g0, std::abs(pc->gamma0 + std::conj(M) / den));
        }
    }
    rep.residuals = {
        {"alpha_norm", alpha_norm},
        {"beta0_norm", b0},
        {"beta1_norm", b1},
        {"beta_cross", cross},
        {"beta0_projection", proj0},
        {"beta1_projection", proj1},
    };
    rep.gamma_residuals = {{"gamma0", g0}, {"gamma1", g1}, {"gamma2", g2}, {"gamma3", g3}};
    rep.pass = rep.max_residual() < rep.threshold;
    return rep;
}

ConstraintReport check_model(const ProbeModel &model, double N, Complex M) {
    ConstraintReport rep = check_homodyne_constraints(kraus_coefficients(model), N, M);
    Eigen::VectorXd ev = hermitian_eigenvalues(model.observable());
    rep.spectrum.assign(ev.data(), ev.data() + ev.size());
    std::sort(rep.spectrum.begin(), rep.spectrum.end(), std::greater<double>());
    bool degenerate = true;
    bool any_nonzero = false;
    for (size_t i = 0; i < rep.spectrum.size(); i++) {
        double v = rep.spectrum[i];
        if (std::abs(v) < 1e-9) {
            continue;
        }
        any_nonzero = true;
        int mult = 0;
        for (double w : rep.spectrum) {
            if (std::abs(w - v) < 1e-9) {
                mult++;
            }
        }
        if (mult < 2) {
            degenerate = false;
        }
    }
    rep.degenerate = degenerate && any_nonzero;
    return rep;
}

ProbeModel vacuum_probe_model() {
    ProbeModel m;
    m.name = "vacuum";
    m.probe_dim = 2;
    m.pure = false;
    m.weights = {1.0, 0.0};
    m.psi = {ket_g(), ket_e()};
    m.a_op = sigma_minus();
    m.outcome_vectors = {{1, 0, ket_phi(1)}, {-1, 0, ket_phi(-1)}};
    return m;
}

AwConstants araki_woods_constants(double N, Complex M) {
    check_nm(N, M);
    if (N == 0 && std::abs(M) != 0) {
        throw InvalidArgument("araki_woods_model: N = 0 requires M = 0");
    }
    AwConstants k;
    if (N == 0) {
        k.x = 1;
        return k;
    }
    k.x = std::sqrt(std::max(0.0, N + 1 - std::norm(M) / N));
    k.y = std::sqrt(N);
    k.z = M / std::sqrt(N);
    return k;
}

ProbeModel araki_woods_model(double N, Complex M) {
    AwConstants k = araki_woods_constants(N, M);
    ProbeModel m;
    m.name = "araki-woods";
    m.probe_dim = 4;
    m.pure = true;
    m.phi = kron(ket_g(), ket_g());
    Matrix id = identity(2);
    m.a_op = k.x * kron(id, sigma_minus()) + k.y * kron(sigma_plus(), id) + k.z * kron(sigma_minus(), id);
    Complex w = k.y + k.z;
    Complex ph = std::abs(w) > 1e-15 ? std::conj(w) / std::abs(w) : Complex(1.0);
    for (int s : {1, -1}) {
        Vector v = (ket_g() + static_cast<double>(s) * ph * ket_e()) / std::sqrt(2.0);
        for (int t : {1, -1}) {
            Vector u = ket_phi(t);
            Vector full(4);
            for (int i = 0; i < 2; i++) {
                for (int j = 0; j < 2; j++) {
                    full(2 * i + j) = v(i) * u(j);
                }
            }
            m.outcome_vectors.push_back({s, t, full});
        }
    }
    return m;
}

ProbeModel two_qubit_squeezed_model(double N, Complex M) {
    check_nm(N, M);
    ProbeModel m;
    m.name = "two-qubit";
    m.probe_dim = 4;
    m.pure = false;
    Matrix id = identity(2);
    m.a_op = std::sqrt((2 * N + 1) / 2) * (kron(id, sigma_minus()) + kron(sigma_minus(), id));

    // Rank-two state on span{|ee>, |gg>}.
    Eigen::Matrix2cd block;
    block << N, M, std::conj(M), N + 1;
    block /= (2 * N + 1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    for (int t = 0; t < 2; t++) {
        int k = 1 - t;  // descending order
        m.weights[t] = std::max(0.0, es.eigenvalues()(k));
        Vector v = Vector::Zero(4);
        v(0) = es.eigenvectors()(0, k);
        v(3) = es.eigenvectors()(1, k);
        m.psi[t] = v;
    }
    double total = m.weights[0] + m.weights[1];
    m.weights[0] /= total;
    m.weights[1] /= total;
    for (int s : {1, -1}) {
        m.outcome_vectors.push_back({s, 0, kron(ket_phi(s), ket_phi(s))});
    }
    return m;
}

ProbeModel qutrit_model(double N, Complex M) {
    check_nm(N, M);
    ProbeModel m;
    m.name = "qutrit";
    m.probe_dim = 3;
    m.pure = false;
    m.supports_homodyne = false;
    // Rows and columns ordered |2>, |1>, |0>.
    Vector k2 = basis_vector(3, 0);
    Vector k1 = basis_vector(3, 1);
    Vector k0 = basis_vector(3, 2);
    m.a_op = std::sqrt(2 * N + 1) * (k0 * k1.adjoint() + k1 * k2.adjoint());
    Eigen::Matrix2cd block;
    block << N, M, std::conj(M), N + 1;
    block /= (2 * N + 1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(block);
    for (int t = 0; t < 2; t++) {
        int k = 1 - t;
        m.weights[t] = std::max(0.0, es.eigenvalues()(k));
        m.psi[t] = es.eigenvectors()(0, k) * k2 + es.eigenvectors()(1, k) * k0;
    }
    double total = m.weights[0] + m.weights[1];
    m.weights[0] /= total;
    m.weights[1] /= total;
    return m;
}

double two_qubit_naive_pairing_strength(double N, Complex M) {
    ProbeModel m = two_qubit_squeezed_model(N, M);
    const double dtau = 1e-8;
    SystemModel sys = SystemModel::qubit(sigma_minus());
    Matrix gen = std::sqrt(dtau) * (kron(sys.c, m.a_op.adjoint()) - kron(sys.c.adjoint(), m.a_op));
    Matrix u = exp_antihermitian(gen);
    ProbeState probe = ProbeState::mixture({m.weights[0], m.weights[1]}, {m.psi[0], m.psi[1]});
    std::vector<ProbeOutcome> outs;
    for (int s : {1, -1}) {
        ProbeOutcome o;
        o.label = s > 0 ? "+" : "-";
        o.vectors = {kron(ket_phi(s), ket_phi(s)), kron(ket_phi(s), ket_phi(-s))};
        outs.push_back(o);
    }
    KrausSet k = kraus_from_circuit(u, probe, outs, dtau);
    Matrix diff = k.outcomes[0].povm - k.outcomes[1].povm;
    Matrix x = sys.c + sys.c.adjoint();
    double kappa = trace_product(diff, x).real() / trace_product(x, x).real() / std::sqrt(dtau);
    return kappa * std::sqrt(2 * N + 2 * M.real() + 1);
}

std::vector<NamedResidual> appendix_a_identities(
    const Matrix &c, const Matrix &rho, double r, double mu, double n_th) {
    if (c.rows() != c.cols()) {
        throw DimensionMismatch("appendix_a_identities: c must be square");
    }
    if (rho.rows() != c.rows() || rho.cols() != c.cols()) {
        throw DimensionMismatch("appendix_a_identities: rho must match c");
    }
    BathParams bath;
    bath.r = r;
    bath.mu = mu;
    bath.n_th = n_th;
    SqueezeDerived d = derive_squeeze(bath, c);
    const double N = d.N;
    const Complex M = d.M;
    const double q = 2 * n_th + 1;
    const double ch = std::cosh(r);
    const double sh = std::sinh(r);
    const Complex e2 = std::exp(2.0 * kI * mu);
    const Complex em2 = std::conj(e2);
    const double mr = M.real();

    Matrix cd = c.adjoint();
    const Matrix &cs = d.c_sq;
    Matrix csd = cs.adjoint();
    Complex eiphi = std::exp(kI * d.phi_sq);

    Matrix crc = c * rho * cd;
    Matrix cdrc = cd * rho * c;
    Matrix crcc = c * rho * c;
    Matrix cdrcd = cd * rho * cd;
    Matrix cdc = cd * c;
    Matrix ccd = c * cd;
    Matrix c2 = c * c;
    Matrix cd2 = cd * cd;
    Matrix dc = superop_D(c, rho);
    Matrix dcd = superop_D(cd, rho);
    Matrix cc_rho = commutator(c, commutator(c, rho));
    Matrix cdcd_rho = commutator(cd, commutator(cd, rho));

    std::vector<NamedResidual> out;
    auto add = [&](const std::string &name, double v) { out.push_back({name, v}); };

    add("cosh2", std::abs(ch * ch - (N + n_th + 1) / q));
    add("sinh2", std::abs(sh * sh - (N - n_th) / q));
    add("squeeze_phase", std::abs(e2 * sh * ch + M / q));
    double L = 1 + 2 * sh * sh - 2 * std::cos(2 * mu) * sh * ch;
    add("L", std::abs(L - (2 * N + 2 * mr + 1) / q));
    add("L_prime", std::abs(q * L - (2 * N + 2 * mr + 1)));

    Matrix lhs = eiphi * cs;
    add("phased_c_sq_squeeze_form",
        max_abs(lhs - (c * (ch * ch - em2 * sh * ch) + cd * (e2 * sh * ch - sh * sh)) / std::sqrt(L)));
    add("phased_c_sq_bath_form",
        max_abs(lhs - (c * (N + n_th + std::conj(M) + 1.0) - cd * (N - n_th + M)) /
                          (std::sqrt(q) * std::sqrt(2 * N + 2 * mr + 1))));

    lhs = cs * rho * csd;
    add("c_sq_rho_c_sq_dag_squeeze_form",
        max_abs(lhs - (crc * ch * ch + cdrc * sh * sh + crcc * em2 * sh * ch + cdrcd * e2 * sh * ch)));
    add("c_sq_rho_c_sq_dag_bath_form",
        max_abs(lhs - (crc * (N + n_th + 1) + cdrc * (N - n_th) - crcc * std::conj(M) - cdrcd * M) / q));

    lhs = csd * cs;
    add("c_sq_dag_c_sq_squeeze_form",
        max_abs(lhs - (cdc * ch * ch + ccd * sh * sh + c2 * em2 * sh * ch + cd2 * e2 * sh * ch)));
    add("c_sq_dag_c_sq_bath_form",
        max_abs(lhs - (cdc * (N + n_th + 1) + ccd * (N - n_th) - c2 * std::conj(M) - cd2 * M) / q));

    add("D_c_sq",
        max_abs(superop_D(cs, rho) -
                ((N + n_th + 1) * dc + (N - n_th) * dcd + 0.5 * std::conj(M) * cc_rho + 0.5 * M * cdcd_rho) / q));

    lhs = csd * rho * cs;
    add("c_sq_dag_rho_c_sq_squeeze_form",
        max_abs(lhs - (cdrc * ch * ch + crc * sh * sh + crcc * em2 * sh * ch + cdrcd * e2 * sh * ch)));
    add("c_sq_dag_rho_c_sq_bath_form",
        max_abs(lhs - (cdrc * (N + n_th + 1) + crc * (N - n_th) - crcc * std::conj(M) - cdrcd * M) / q));

    lhs = cs * csd;
    add("c_sq_c_sq_dag_squeeze_form",
        max_abs(lhs - (ccd * ch * ch + cdc * sh * sh + c2 * em2 * sh * ch + cd2 * e2 * sh * ch)));
    add("c_sq_c_sq_dag_bath_form",
        max_abs(lhs - (ccd * (N + n_th + 1) + cdc * (N - n_th) - c2 * std::conj(M) - cd2 * M) / q));

    add("D_c_sq_dag",
        max_abs(superop_D(csd, rho) -
                ((N + n_th + 1) * dcd + (N - n_th) * dc + 0.5 * std::conj(M) * cc_rho + 0.5 * M * cdcd_rho) / q));
    return out;
}

}  // namespace qtraj
