// Copyright 2026 The wmsim Authors
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

#include "wmsim/quantum_core.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>

namespace wmsim {
namespace {

bool all_finite(const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    const Complex z = m.data()[i];
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  }
  return true;
}

Complex overlap(const PureState& phi, const PureState& psi) {
  return phi.amplitudes().dot(psi.amplitudes());  // conjugates phi
}

Complex checked_overlap(const PureState& psi, const PureState& phi) {
  require_same_dimension(psi.dim(), phi.dim(), "post-selection state");
  const Complex ov = overlap(phi, psi);
  if (std::abs(ov) <= kOrthogonalityTolerance) {
    throw Error(ErrorCode::kOrthogonalPostselection,
                "|<phi|psi>| = " + std::to_string(std::abs(ov)) +
                    " is below the orthogonality tolerance");
  }
  return ov;
}

bool is_eigenstate(const Observable& a, const Vector& psi, double tolerance) {
  const Vector a_psi = a.matrix() * psi;
  const Complex mean = psi.dot(a_psi);
  return (a_psi - mean * psi).norm() <= tolerance;
}

std::vector<Vector> candidate_preselections(int d) {
  std::vector<Vector> out;
  for (int i = 0; i < d; ++i) out.push_back(Vector::Unit(d, i));
  const double s = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Vector v = Vector::Zero(d);
      v[i] = s;
      v[j] = s;
      out.push_back(v);
    }
  }
  for (int i = 0; i < d; ++i) {
    for (int j = i + 1; j < d; ++j) {
      Vector v = Vector::Zero(d);
      v[i] = s;
      v[j] = Complex(0.0, s);
      out.push_back(v);
    }
  }
  return out;
}

}  // namespace

void require_same_dimension(int a, int b, const char* what) {
  if (a != b) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(what) + ": dimension " + std::to_string(b) +
                    " does not match " + std::to_string(a));
  }
}

PureState::PureState(Vector amplitudes) : amplitudes_(std::move(amplitudes)) {
  if (amplitudes_.size() < 2) {
    throw Error(ErrorCode::kInvalidArgument, "state dimension must be >= 2");
  }
  if (!all_finite(amplitudes_)) {
    throw Error(ErrorCode::kInvalidArgument, "state has non-finite amplitudes");
  }
  const double n = amplitudes_.norm();
  if (std::abs(n - 1.0) > kNormTolerance) {
    throw Error(ErrorCode::kNotNormalized,
                "state norm " + std::to_string(n) + " differs from 1");
  }
}

PureState PureState::normalized(const Vector& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) {
    throw Error(ErrorCode::kNotNormalized, "cannot normalize a zero vector");
  }
  return PureState(v / n);
}

PureState PureState::basis(int dim, int index) {
  if (index < 0 || index >= dim) {
    throw Error(ErrorCode::kInvalidArgument, "basis index out of range");
  }
  return PureState(Vector::Unit(dim, index));
}

Matrix PureState::projector() const {
  return amplitudes_ * amplitudes_.adjoint();
}

int EigenSystem::dim() const {
  return projectors.empty() ? 0 : static_cast<int>(projectors.front().rows());
}

double EigenSystem::spectral_radius() const {
  double r = 0.0;
  for (double a : eigenvalues) r = std::max(r, std::abs(a));
  return r;
}

Matrix EigenSystem::reconstruct() const {
  Matrix m = Matrix::Zero(dim(), dim());
  for (std::size_t i = 0; i < size(); ++i) m += eigenvalues[i] * projectors[i];
  return m;
}

double eigenvalue_merge_tolerance(double spectral_radius) {
  return 1e-10 * (spectral_radius + 1.0);
}

double max_hermitian_defect(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols()) return INFINITY;
  return (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
}

EigenSystem eigendecompose(const Matrix& matrix) {
  if (matrix.rows() != matrix.cols() || matrix.rows() < 1) {
    throw Error(ErrorCode::kDimensionMismatch, "observable must be square");
  }
  if (!all_finite(matrix)) {
    throw Error(ErrorCode::kInvalidArgument, "observable has non-finite entries");
  }
  const double defect = max_hermitian_defect(matrix);
  if (defect > kHermitianTolerance) {
    throw Error(ErrorCode::kNotHermitian,
                "max |M - M^dagger| = " + std::to_string(defect));
  }
  const Matrix h = 0.5 * (matrix + matrix.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumericQuality, "eigensolver did not converge");
  }
  const Eigen::VectorXd& values = solver.eigenvalues();  // ascending
  const Matrix& vectors = solver.eigenvectors();
  const double radius = values.cwiseAbs().maxCoeff();
  const double tol = eigenvalue_merge_tolerance(radius);

  EigenSystem out;
  const int d = static_cast<int>(h.rows());
  int start = 0;
  while (start < d) {
    int stop = start + 1;
    while (stop < d && values[stop] - values[stop - 1] <= tol) ++stop;
    Matrix p = Matrix::Zero(d, d);
    double sum = 0.0;
    for (int j = start; j < stop; ++j) {
      p += vectors.col(j) * vectors.col(j).adjoint();
      sum += values[j];
    }
    out.eigenvalues.push_back(sum / (stop - start));
    out.projectors.push_back(std::move(p));
    start = stop;
  }
  return out;
}

EigenSystem eigendecompose(const Observable& observable) {
  return observable.eigensystem();
}

Observable::Observable(Matrix matrix)
    : matrix_(std::move(matrix)), cache_(std::make_shared<Cache>()) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 2) {
    throw Error(ErrorCode::kDimensionMismatch,
                "observable must be a square matrix of dimension >= 2");
  }
  if (!all_finite(matrix_)) {
    throw Error(ErrorCode::kInvalidArgument, "observable has non-finite entries");
  }
  const double defect = max_hermitian_defect(matrix_);
  if (defect > kHermitianTolerance) {
    throw Error(ErrorCode::kNotHermitian,
                "max |M - M^dagger| = " + std::to_string(defect));
  }
}

const EigenSystem& Observable::eigensystem() const {
  std::call_once(cache_->once,
                 [this] { cache_->value.emplace(eigendecompose(matrix_)); });
  return *cache_->value;
}

DensityMatrix::DensityMatrix(Matrix matrix) : matrix_(std::move(matrix)) {
  if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 2) {
    throw Error(ErrorCode::kDimensionMismatch, "density matrix must be square");
  }
  if (!all_finite(matrix_)) {
    throw Error(ErrorCode::kInvalidArgument, "density matrix is not finite");
  }
  if (max_hermitian_defect(matrix_) > kReconstructionTolerance) {
    throw Error(ErrorCode::kNotHermitian, "density matrix is not Hermitian");
  }
  const Complex tr = matrix_.trace();
  if (std::abs(tr - 1.0) > kReconstructionTolerance) {
    throw Error(ErrorCode::kNotNormalized,
                "density matrix trace " + std::to_string(tr.real()));
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (matrix_ + matrix_.adjoint()),
                                               Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -kReconstructionTolerance) {
    throw Error(ErrorCode::kInvalidArgument,
                "density matrix has a negative eigenvalue");
  }
}

double DensityMatrix::purity() const {
  return (matrix_ * matrix_).trace().real();
}

double DensityMatrix::expectation(const PureState& phi) const {
  require_same_dimension(dim(), phi.dim(), "state");
  return phi.amplitudes().dot(matrix_ * phi.amplitudes()).real();
}

WeakValueResult weak_value(const Observable& observable, const PureState& psi,
                           const PureState& phi) {
  require_same_dimension(observable.dim(), psi.dim(), "pre-selected state");
  const Complex ov = checked_overlap(psi, phi);
  const Complex num = phi.amplitudes().dot(observable.matrix() * psi.amplitudes());
  return {num / ov, ov};
}

Complex matrix_weak_value(const Matrix& m, const PureState& psi,
                          const PureState& phi) {
  if (m.rows() != m.cols()) {
    throw Error(ErrorCode::kDimensionMismatch, "matrix must be square");
  }
  require_same_dimension(static_cast<int>(m.rows()), psi.dim(),
                         "pre-selected state");
  const Complex ov = checked_overlap(psi, phi);
  return phi.amplitudes().dot(m * psi.amplitudes()) / ov;
}

double expectation(const Observable& observable, const PureState& psi) {
  require_same_dimension(observable.dim(), psi.dim(), "state");
  return psi.amplitudes().dot(observable.matrix() * psi.amplitudes()).real();
}

AnomalousPair anomalous_pair(const Observable& observable, double epsilon,
                             WeakValuePart target,
                             const std::optional<PureState>& preselect) {
  if (!(std::abs(epsilon) > 0.0) || std::abs(epsilon) > 1.0 ||
      !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "epsilon must satisfy 0 < |eps| <= 1");
  }
  const EigenSystem& es = observable.eigensystem();
  const double scale = es.spectral_radius() + 1.0;
  if (es.spread() <= eigenvalue_merge_tolerance(es.spectral_radius())) {
    throw Error(ErrorCode::kProportionalToIdentity,
                "observable is proportional to the identity");
  }
  const double eigen_tol = 1e-9 * scale;
  const int d = observable.dim();

  std::optional<Vector> psi;
  if (preselect) {
    require_same_dimension(d, preselect->dim(), "pre-selected state");
    if (!is_eigenstate(observable, preselect->amplitudes(), eigen_tol)) {
      psi = preselect->amplitudes();
    }
  }
  if (!psi) {
    for (const Vector& c : candidate_preselections(d)) {
      if (!is_eigenstate(observable, c, eigen_tol)) {
        psi = c;
        break;
      }
    }
  }
  if (!psi) {
    throw Error(ErrorCode::kProportionalToIdentity,
                "no candidate pre-selection is a non-eigenstate");
  }

  const Vector a_psi = observable.matrix() * *psi;
  const Vector residual = a_psi - psi->dot(a_psi) * *psi;
  const Vector perp = residual / residual.norm();
  // Gram-Schmidt makes <perp|A|psi> = ||residual|| real and positive.
  const double coupling = perp.dot(a_psi).real();

  const double s = std::sqrt(1.0 - epsilon * epsilon);
  const Complex c = target == WeakValuePart::kReal ? Complex(1.0, 0.0)
                                                   : Complex(0.0, 1.0);
  Vector phi = s * c * perp + epsilon * *psi;
  phi /= phi.norm();

  PureState psi_state(*psi / psi->norm());
  PureState phi_state(phi);
  const double prob = std::norm(phi_state.amplitudes().dot(psi_state.amplitudes()));
  return {std::move(psi_state), std::move(phi_state), PureState(perp), coupling,
          epsilon, prob};
}

}  // namespace wmsim
