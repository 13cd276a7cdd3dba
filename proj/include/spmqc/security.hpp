#pragma once

#include <array>
#include <span>

#include "spmqc/channel.hpp"

// Collective-attack bookkeeping for the security check: the Gram matrix of
// the sender/eavesdropper ensemble written in the attack amplitudes, its
// eigenvalues, and the resulting Holevo bound. The chain
//   gram_matrix -> eigenvalues -> ensemble_entropy
// reproduces the closed form S = 1 + h(eps), so the bound on the
// eavesdropper's information is h(eps).
namespace spmqc::security {

/// Amplitudes of the attack decomposition; they sum to one and encode the
/// DBERs through +-(1 - 2*eps) combinations.
struct DeltaVector {
  double delta1 = 0.0;
  double delta2 = 0.0;
  double delta3 = 0.0;
  double delta4 = 0.0;

  void validate() const;
  double epsilon_x() const;  // (1 - (d1 - d2 + d3 - d4)) / 2
  double epsilon_z() const;  // (1 - (d1 + d2 - d3 - d4)) / 2
};

/// 4x4 real symmetric Gram matrix with unit trace.
class GramMatrix {
 public:
  GramMatrix() = default;
  explicit GramMatrix(const std::array<std::array<double, 4>, 4>& entries);

  double at(int row, int col) const { return m_[row][col]; }
  double trace() const;
  bool is_symmetric(double tol = 1e-12) const;

 private:
  std::array<std::array<double, 4>, 4> m_{};
};

/// Ensemble Gram matrix for a security check in `basis` (X or Z only; the
/// circular basis is treated as equivalent to X) at error rate `epsilon`.
GramMatrix gram_matrix(channel::Basis basis, double epsilon);

/// Same matrix assembled from raw attack amplitudes.
GramMatrix gram_matrix_from_deltas(channel::Basis basis,
                                   const DeltaVector& deltas);

/// Eigenvalues of a symmetric 4x4 matrix, sorted descending (Jacobi sweeps).
std::array<double, 4> eigenvalues(const GramMatrix& g);

/// Von Neumann entropy -sum(lambda log2 lambda) of an eigenvalue spectrum
/// that sums to one.
double ensemble_entropy(std::span<const double> eigs);

/// Upper bound on the eavesdropper's information for a check in `basis`
/// at error rate `epsilon`; equals h(epsilon).
double holevo_bound(channel::Basis basis, double epsilon);

}  // namespace spmqc::security
