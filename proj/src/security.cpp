#include "spmqc/security.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace spmqc::security {

namespace {

constexpr double kDeltaTolerance = 1e-12;
constexpr double kEigTolerance = 1e-10;

void require_check_basis(channel::Basis basis) {
  if (basis == channel::Basis::Y) {
    throw std::invalid_argument(
        "gram matrix is defined for the X and Z checks; the Y check is "
        "treated as equivalent to X");
  }
}

void require_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 0.5)) {
    throw std::invalid_argument("epsilon must lie in [0, 1/2], got " +
                                std::to_string(epsilon));
  }
}

// Off-diagonal layout per check basis: the X check couples the
// anti-diagonal with a single signed combination; the Z check couples
// (0,2) and (1,3) with opposite signs.
GramMatrix assemble(channel::Basis basis, double x_comb, double z_comb) {
  std::array<std::array<double, 4>, 4> m{};
  for (int i = 0; i < 4; ++i) m[i][i] = 0.25;
  if (basis == channel::Basis::X) {
    const double off = 0.25 * x_comb;
    m[0][3] = m[3][0] = off;
    m[1][2] = m[2][1] = off;
  } else {
    m[0][2] = m[2][0] = 0.25 * -z_comb;
    m[1][3] = m[3][1] = 0.25 * z_comb;
  }
  return GramMatrix(m);
}

}  // namespace

void DeltaVector::validate() const {
  for (double d : {delta1, delta2, delta3, delta4}) {
    if (d < 0.0) {
      throw std::invalid_argument("attack amplitudes must be non-negative");
    }
  }
  const double sum = delta1 + delta2 + delta3 + delta4;
  if (std::abs(sum - 1.0) > kDeltaTolerance) {
    throw std::invalid_argument("attack amplitudes must sum to 1, got " +
                                std::to_string(sum));
  }
}

double DeltaVector::epsilon_x() const {
  return 0.5 * (1.0 - (delta1 - delta2 + delta3 - delta4));
}

double DeltaVector::epsilon_z() const {
  return 0.5 * (1.0 - (delta1 + delta2 - delta3 - delta4));
}

GramMatrix::GramMatrix(const std::array<std::array<double, 4>, 4>& entries)
    : m_(entries) {}

double GramMatrix::trace() const {
  return m_[0][0] + m_[1][1] + m_[2][2] + m_[3][3];
}

bool GramMatrix::is_symmetric(double tol) const {
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      if (std::abs(m_[i][j] - m_[j][i]) > tol) return false;
    }
  }
  return true;
}

GramMatrix gram_matrix(channel::Basis basis, double epsilon) {
  require_check_basis(basis);
  require_epsilon(epsilon);
  // For the X check the printed combination is -(1 - 2 eps); for Z the two
  // off-diagonal combinations are -(1 - 2 eps) and +(1 - 2 eps).
  return assemble(basis, -(1.0 - 2.0 * epsilon), 1.0 - 2.0 * epsilon);
}

GramMatrix gram_matrix_from_deltas(channel::Basis basis,
                                   const DeltaVector& d) {
  require_check_basis(basis);
  d.validate();
  const double x_comb = -d.delta1 + d.delta2 - d.delta3 + d.delta4;
  const double z_comb = d.delta1 + d.delta2 - d.delta3 - d.delta4;
  return assemble(basis, x_comb, z_comb);
}

std::array<double, 4> eigenvalues(const GramMatrix& g) {
  if (!g.is_symmetric()) {
    throw std::invalid_argument("eigenvalues: matrix is not symmetric");
  }
  std::array<std::array<double, 4>, 4> a{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) a[i][j] = g.at(i, j);
  }
  // Cyclic Jacobi: rotate away the largest off-diagonal entries until the
  // matrix is numerically diagonal. 4x4 inputs converge in a few sweeps.
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = i + 1; j < 4; ++j) off += a[i][j] * a[i][j];
    }
    if (off < 1e-30) break;
    for (int p = 0; p < 4; ++p) {
      for (int q = p + 1; q < 4; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = 0.5 * std::atan2(2.0 * a[p][q], a[q][q] - a[p][p]);
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        for (int k = 0; k < 4; ++k) {
          const double akp = a[k][p];
          const double akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < 4; ++k) {
          const double apk = a[p][k];
          const double aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  std::array<double, 4> eigs = {a[0][0], a[1][1], a[2][2], a[3][3]};
  std::sort(eigs.begin(), eigs.end(), std::greater<>());
  return eigs;
}

double ensemble_entropy(std::span<const double> eigs) {
  double sum = 0.0;
  for (double lambda : eigs) {
    if (lambda < -kEigTolerance) {
      throw std::invalid_argument("ensemble_entropy: negative eigenvalue " +
                                  std::to_string(lambda));
    }
    sum += lambda;
  }
  if (std::abs(sum - 1.0) > kEigTolerance) {
    throw std::invalid_argument("ensemble_entropy: spectrum must sum to 1");
  }
  double entropy = 0.0;
  for (double lambda : eigs) {
    if (lambda > 0.0) entropy -= lambda * std::log2(lambda);
  }
  return entropy;
}

double holevo_bound(channel::Basis basis, double epsilon) {
  const auto eigs = eigenvalues(gram_matrix(basis, epsilon));
  return ensemble_entropy(eigs) - 1.0;
}

}  // namespace spmqc::security
