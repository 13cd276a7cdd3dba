#pragma once

#include <array>
#include <complex>
#include <string>
#include <string_view>
#include <vector>

// Exact state-vector algebra for one- and two-qubit systems: the named
// single-photon states, the Bell basis, Pauli operations, Bell-state
// measurement statistics, and the teleportation correspondence used by the
// protocol's state-recovery step.
//
// Conventions (used everywhere):
//   - two-qubit amplitudes are ordered |q0 q1> with the leftmost qubit as
//     the most significant index, i.e. amp[q0*2 + q1]
//   - i*sigma_y = [[0, 1], [-1, 0]]
//   - |psi+-> = (|01> +- |10>)/sqrt(2), |phi+-> = (|00> +- |11>)/sqrt(2)
namespace spmqc::qcore {

using Complex = std::complex<double>;

inline constexpr double kStateTolerance = 1e-12;

/// Normalized amplitude vector for a 1-qubit (dim 2) or 2-qubit (dim 4) system.
class PureState {
 public:
  explicit PureState(std::vector<Complex> amplitudes);

  std::size_t dimension() const { return amps_.size(); }
  std::size_t qubit_count() const { return amps_.size() == 2 ? 1 : 2; }
  const std::vector<Complex>& amplitudes() const { return amps_; }
  Complex amplitude(std::size_t i) const { return amps_.at(i); }
  double norm() const;

 private:
  std::vector<Complex> amps_;
};

/// <a|b>; both states must have the same dimension.
Complex overlap(const PureState& a, const PureState& b);

enum class PauliOp { Identity, SigmaX, ISigmaY, SigmaZ };

using Matrix2 = std::array<std::array<Complex, 2>, 2>;

Matrix2 pauli_matrix(PauliOp op);
const char* to_string(PauliOp op);

enum class BellOutcome { PsiMinus = 0, PsiPlus = 1, PhiMinus = 2, PhiPlus = 3 };

inline constexpr std::array<BellOutcome, 4> kBellOutcomes = {
    BellOutcome::PsiMinus, BellOutcome::PsiPlus, BellOutcome::PhiMinus,
    BellOutcome::PhiPlus};

const char* to_string(BellOutcome outcome);
PureState bell_state(BellOutcome outcome);

// Recognized labels: "0", "1", "+", "-", "~+", "~-" (single photon) and
// "psi-", "psi+", "phi-", "phi+" (Bell pairs).
bool is_known_label(std::string_view label);
PureState prepare_state(std::string_view label);

/// Applies op to qubit `target` of `state` (identity on the other qubit).
PureState apply_pauli(PauliOp op, const PureState& state, std::size_t target);

/// Bell-measurement probabilities |<bell_k|joint>|^2, indexed by BellOutcome.
std::array<double, 4> bsm_probabilities(const PureState& joint);

enum class PrepBasis { Z, X };

const char* to_string(PrepBasis basis);

/// Post-measurement state of the sender's retained qubit when her |psi->
/// pair is joined with the receiver's photon and the two travelling qubits
/// are projected onto `outcome`, computed by exact three-qubit algebra.
/// `label` names the single-photon state the result is proportional to and
/// `phase` is the global phase relative to that state, so that
/// state == phase * prepare_state(label).
struct TeleportResult {
  PureState state;
  std::string label;
  Complex phase;
};

TeleportResult teleport_oracle(std::string_view bob_initial,
                               BellOutcome outcome);

/// The correction U in {I, i*sigma_y} that maps the retained qubit back to
/// the receiver's initial state (up to global phase) for any initial state
/// prepared in `basis`. Derived by searching against teleport_oracle.
PauliOp recovery_operation(BellOutcome outcome, PrepBasis basis);

}  // namespace spmqc::qcore
