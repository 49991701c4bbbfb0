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

#pragma once

#include <complex>
#include <memory>
#include <mutex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "wmsim/error.hpp"

namespace wmsim {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kNormTolerance = 1e-12;
inline constexpr double kHermitianTolerance = 1e-12;
inline constexpr double kOrthogonalityTolerance = 1e-10;
inline constexpr double kReconstructionTolerance = 1e-10;

/// Normalized pure state of a d-level system (d >= 2).
class PureState {
 public:
  /// Throws kNotNormalized unless the Euclidean norm is 1 within 1e-12.
  explicit PureState(Vector amplitudes);

  /// Rescales `v` to unit norm; throws kNotNormalized for a zero vector.
  static PureState normalized(const Vector& v);
  static PureState basis(int dim, int index);

  int dim() const { return static_cast<int>(amplitudes_.size()); }
  const Vector& amplitudes() const { return amplitudes_; }
  Complex operator[](int i) const { return amplitudes_[i]; }

  /// |psi><psi|
  Matrix projector() const;

 private:
  Vector amplitudes_;
};

/// Distinct eigenvalues a_1 < ... < a_k with orthogonal spectral projectors.
struct EigenSystem {
  std::vector<double> eigenvalues;
  std::vector<Matrix> projectors;

  int dim() const;
  std::size_t size() const { return eigenvalues.size(); }
  double spectral_radius() const;
  double spread() const { return eigenvalues.back() - eigenvalues.front(); }
  Matrix reconstruct() const;
};

/// Hermitian observable with a lazily computed, shared eigensystem.
///
/// Copies share the eigensystem cache. The first call to eigensystem() from
/// any copy computes it exactly once; concurrent callers block until it is
/// ready.
class Observable {
 public:
  /// Throws kNotHermitian if max |M - M^dagger| exceeds 1e-12.
  explicit Observable(Matrix matrix);

  const Matrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  const EigenSystem& eigensystem() const;

 private:
  struct Cache {
    std::once_flag once;
    std::optional<EigenSystem> value;
  };

  Matrix matrix_;
  std::shared_ptr<Cache> cache_;
};

/// Mixed state: Hermitian, unit trace, positive semidefinite (within 1e-10).
class DensityMatrix {
 public:
  explicit DensityMatrix(Matrix matrix);

  const Matrix& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }
  double purity() const;
  /// <phi|rho|phi>
  double expectation(const PureState& phi) const;

 private:
  Matrix matrix_;
};

struct WeakValueResult {
  Complex value;
  Complex preselect_overlap;  // <phi|psi>

  double postselection_probability() const {
    return std::norm(preselect_overlap);
  }
};

enum class WeakValuePart { kReal, kImaginary };

struct AnomalousPair {
  PureState psi;
  PureState phi;
  PureState perp;
  /// <perp|A|psi>, real and strictly positive by construction.
  double coupling;
  double epsilon;
  /// |<phi|psi>|^2, the unperturbed post-selection probability.
  double postselection_probability;
};

/// Merge tolerance for nearly degenerate eigenvalues: 1e-10 (rho + 1).
double eigenvalue_merge_tolerance(double spectral_radius);

/// Throws kNotHermitian when the check fails.
EigenSystem eigendecompose(const Matrix& matrix);
EigenSystem eigendecompose(const Observable& observable);

double max_hermitian_defect(const Matrix& matrix);

/// <phi|A|psi> / <phi|psi>; kOrthogonalPostselection when |<phi|psi>| <= 1e-10.
WeakValueResult weak_value(const Observable& observable, const PureState& psi,
                           const PureState& phi);

/// <phi|M|psi> / <phi|psi> for an arbitrary square matrix M.
Complex matrix_weak_value(const Matrix& m, const PureState& psi,
                          const PureState& phi);

/// <psi|A|psi>
double expectation(const Observable& observable, const PureState& psi);

/// Builds |psi>, |perp> with <perp|psi> = 0 and <perp|A|psi> > 0, then
/// |phi> = sqrt(1 - eps^2) c |perp> + eps |psi> with c = 1 for the real part
/// and c = i for the imaginary part. With c = i the imaginary part of the
/// weak value is -<perp|A|psi>/eps + O(1).
///
/// When `preselect` is given it is used as |psi> unless it is an eigenstate
/// of A, in which case the fixed candidate list (basis states, then
/// (e_i + e_j)/sqrt 2, then (e_i + i e_j)/sqrt 2) is searched.
AnomalousPair anomalous_pair(const Observable& observable, double epsilon,
                             WeakValuePart target,
                             const std::optional<PureState>& preselect = {});

void require_same_dimension(int a, int b, const char* what);

}  // namespace wmsim
