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

#include "qtraj/core.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qtraj {

namespace {

void require_square(const Matrix &m, const char *what) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch(std::string(what) + ": matrix is not square");
    }
}

void require_same_dim(const Matrix &x, const Matrix &rho) {
    require_square(x, "operator");
    require_square(rho, "state");
    if (x.rows() != rho.rows()) {
        std::ostringstream os;
        os << "operator is " << x.rows() << "x" << x.cols() << " but state is " << rho.rows() << "x"
           << rho.cols();
        throw DimensionMismatch(os.str());
    }
}

Matrix hermitian_part(const Matrix &m) {
    return 0.5 * (m + m.adjoint());
}

}  // namespace

DensityMatrix DensityMatrix::from_matrix(const Matrix &m, double pos_tol) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw InvalidArgument("density matrix must be square and non-empty");
    }
    if (!m.allFinite()) {
        throw InvalidArgument("density matrix has non-finite entries");
    }
    auto report = check_density(m, pos_tol);
    if (report.hermiticity_defect > kHermiticityTol) {
        std::ostringstream os;
        os << "density matrix not Hermitian (defect " << report.hermiticity_defect << ")";
        throw InvalidArgument(os.str());
    }
    if (report.trace_defect > kTraceTol) {
        std::ostringstream os;
        os << "density matrix trace " << m.trace().real() << " != 1";
        throw InvalidArgument(os.str());
    }
    if (report.flagged) {
        std::ostringstream os;
        os << "density matrix has negative eigenvalue " << report.min_eigenvalue;
        throw InvalidArgument(os.str());
    }
    return DensityMatrix(hermitian_part(m));
}

DensityMatrix DensityMatrix::unchecked(Matrix m) {
    return DensityMatrix(std::move(m));
}

DensityMatrix DensityMatrix::pure(const Vector &psi) {
    double n = psi.norm();
    if (n == 0) {
        throw InvalidArgument("zero state vector");
    }
    Vector v = psi / n;
    return DensityMatrix(v * v.adjoint());
}

DensityMatrix DensityMatrix::maximally_mixed(int dim) {
    return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

double DensityMatrix::expectation(const Matrix &op) const {
    return trace_product(m_, op).real();
}

double DensityMatrix::purity() const {
    return trace_product(m_, m_).real();
}

Matrix dagger(const Matrix &m) {
    return m.adjoint();
}

Matrix kron(const Matrix &a, const Matrix &b) {
    Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); i++) {
        for (Eigen::Index j = 0; j < a.cols(); j++) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Matrix commutator(const Matrix &a, const Matrix &b) {
    return a * b - b * a;
}

Matrix identity(int dim) {
    return Matrix::Identity(dim, dim);
}

Matrix sigma_minus() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1;
    return m;
}

Matrix sigma_plus() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = 1;
    return m;
}

Matrix sigma_x() {
    return sigma_plus() + sigma_minus();
}

Matrix sigma_y() {
    return -kI * sigma_plus() + kI * sigma_minus();
}

Matrix sigma_z() {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 0) = 1;
    m(1, 1) = -1;
    return m;
}

Vector ket_e() {
    Vector v = Vector::Zero(2);
    v(0) = 1;
    return v;
}

Vector ket_g() {
    Vector v = Vector::Zero(2);
    v(1) = 1;
    return v;
}

Vector ket_phi(int sign, double phi) {
    return (ket_g() + static_cast<double>(sign) * std::exp(-kI * phi) * ket_e()) / std::sqrt(2.0);
}

Complex trace_product(const Matrix &a, const Matrix &b) {
    return a.cwiseProduct(b.transpose()).sum();
}

double hermiticity_defect(const Matrix &m) {
    if (m.rows() != m.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const Matrix &m, double tol) {
    return hermiticity_defect(m) <= tol;
}

double unitarity_defect(const Matrix &u) {
    if (u.rows() != u.cols()) {
        return std::numeric_limits<double>::infinity();
    }
    return (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix &m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

double min_eigenvalue(const Matrix &m) {
    if (m.rows() == 2 && m.cols() == 2) {
        double a = m(0, 0).real();
        double d = m(1, 1).real();
        Complex b = 0.5 * (m(0, 1) + std::conj(m(1, 0)));
        double half = 0.5 * (a - d);
        return 0.5 * (a + d) - std::sqrt(half * half + std::norm(b));
    }
    return hermitian_eigenvalues(m).minCoeff();
}

Matrix unitary_from_hermitian(const Matrix &h, double t) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(h));
    Vector phases = (-kI * t * es.eigenvalues().cast<Complex>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Matrix exp_antihermitian(const Matrix &g) {
    // g = -i h with h = i g Hermitian.
    return unitary_from_hermitian(kI * g, 1.0);
}

Matrix superop_D(const Matrix &x, const Matrix &rho) {
    require_same_dim(x, rho);
    Matrix xdx = x.adjoint() * x;
    return x * rho * x.adjoint() - 0.5 * (xdx * rho + rho * xdx);
}

Matrix superop_H(const Matrix &x, const Matrix &rho) {
    require_same_dim(x, rho);
    Complex mean = trace_product(rho, x + x.adjoint());
    return x * rho + rho * x.adjoint() - mean * rho;
}

Matrix superop_G(const Matrix &x, const Matrix &rho, double jump_tol) {
    require_same_dim(x, rho);
    double p = trace_product(rho, x.adjoint() * x).real();
    if (!(p > jump_tol)) {
        std::ostringstream os;
        os << "jump probability " << p << " is not above " << jump_tol;
        throw JumpImpossible(os.str());
    }
    return x * rho * x.adjoint() / p - rho;
}

HealthReport check_density(const Matrix &rho, double pos_tol) {
    require_square(rho, "state");
    HealthReport r;
    r.hermiticity_defect = hermiticity_defect(rho);
    r.trace_defect = std::abs(rho.trace() - Complex(1.0, 0.0));
    r.min_eigenvalue = min_eigenvalue(rho);
    r.flagged = r.min_eigenvalue < -pos_tol || !std::isfinite(r.min_eigenvalue);
    return r;
}

std::pair<DensityMatrix, double> renormalize(const Matrix &rho_unnorm) {
    require_square(rho_unnorm, "state");
    double tr = rho_unnorm.trace().real();
    if (!(tr > kZeroTraceTol)) {
        std::ostringstream os;
        os << "cannot renormalize state with trace " << tr;
        throw ZeroTrace(os.str());
    }
    return {DensityMatrix::unchecked(hermitian_part(rho_unnorm) / tr), tr};
}

}  // namespace qtraj
