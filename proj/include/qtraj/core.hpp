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

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace qtraj {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr Complex kI{0.0, 1.0};

// Default tolerances. Qubit matrices use index 0 = |e>, index 1 = |g>.
inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kPositivityTol = 1e-7;
inline constexpr double kJumpTol = 1e-14;
inline constexpr double kZeroTraceTol = 1e-300;

class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
  public:
    using Error::Error;
};

class InvalidArgument : public Error {
  public:
    using Error::Error;
};

class JumpImpossible : public Error {
  public:
    using Error::Error;
};

class ZeroTrace : public Error {
  public:
    using Error::Error;
};

class DensityMatrix {
  public:
    DensityMatrix() = default;

    // Validates hermiticity, unit trace and positivity; throws InvalidArgument.
    static DensityMatrix from_matrix(const Matrix &m, double pos_tol = kPositivityTol);
    // Wraps without validation. Used for states produced by trusted updates.
    static DensityMatrix unchecked(Matrix m);

    static DensityMatrix pure(const Vector &psi);
    static DensityMatrix maximally_mixed(int dim);

    const Matrix &matrix() const { return m_; }
    int dim() const { return static_cast<int>(m_.rows()); }

    // Re tr(rho O).
    double expectation(const Matrix &op) const;
    double purity() const;

  private:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
    Matrix m_;
};

struct HealthReport {
    double hermiticity_defect = 0;
    double trace_defect = 0;
    double min_eigenvalue = 0;
    bool flagged = false;
};

Matrix dagger(const Matrix &m);
Matrix kron(const Matrix &a, const Matrix &b);
Matrix commutator(const Matrix &a, const Matrix &b);
Matrix identity(int dim);

// Qubit operators in (e, g) ordering.
Matrix sigma_minus();
Matrix sigma_plus();
Matrix sigma_x();
Matrix sigma_y();
Matrix sigma_z();
Vector ket_e();
Vector ket_g();
// (|g> + sign e^{-i phi} |e>) / sqrt(2)
Vector ket_phi(int sign, double phi = 0.0);

Complex trace_product(const Matrix &a, const Matrix &b);
double hermiticity_defect(const Matrix &m);
bool is_hermitian(const Matrix &m, double tol = kHermiticityTol);
double unitarity_defect(const Matrix &u);
Eigen::VectorXd hermitian_eigenvalues(const Matrix &m);
double min_eigenvalue(const Matrix &m);

// exp(-i h t) for Hermitian h.
Matrix unitary_from_hermitian(const Matrix &h, double t);
// exp(g) for anti-Hermitian g.
Matrix exp_antihermitian(const Matrix &g);

Matrix superop_D(const Matrix &x, const Matrix &rho);
Matrix superop_H(const Matrix &x, const Matrix &rho);
Matrix superop_G(const Matrix &x, const Matrix &rho, double jump_tol = kJumpTol);

inline Matrix superop_D(const Matrix &x, const DensityMatrix &rho) {
    return superop_D(x, rho.matrix());
}
inline Matrix superop_H(const Matrix &x, const DensityMatrix &rho) {
    return superop_H(x, rho.matrix());
}
inline Matrix superop_G(const Matrix &x, const DensityMatrix &rho, double jump_tol = kJumpTol) {
    return superop_G(x, rho.matrix(), jump_tol);
}

HealthReport check_density(const Matrix &rho, double pos_tol = kPositivityTol);
inline HealthReport check_density(const DensityMatrix &rho, double pos_tol = kPositivityTol) {
    return check_density(rho.matrix(), pos_tol);
}

std::pair<DensityMatrix, double> renormalize(const Matrix &rho_unnorm);

}  // namespace qtraj
