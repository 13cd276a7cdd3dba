#include "spmqc/qcore.hpp"

#include <cmath>
#include <stdexcept>

namespace spmqc::qcore {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

std::vector<Complex> label_amplitudes(std::string_view label) {
  const Complex i{0.0, 1.0};
  if (label == "0") return {1.0, 0.0};
  if (label == "1") return {0.0, 1.0};
  if (label == "+") return {kInvSqrt2, kInvSqrt2};
  if (label == "-") return {kInvSqrt2, -kInvSqrt2};
  if (label == "~+") return {kInvSqrt2, i * kInvSqrt2};
  if (label == "~-") return {kInvSqrt2, -i * kInvSqrt2};
  if (label == "psi-") return {0.0, kInvSqrt2, -kInvSqrt2, 0.0};
  if (label == "psi+") return {0.0, kInvSqrt2, kInvSqrt2, 0.0};
  if (label == "phi-") return {kInvSqrt2, 0.0, 0.0, -kInvSqrt2};
  if (label == "phi+") return {kInvSqrt2, 0.0, 0.0, kInvSqrt2};
  return {};
}

}  // namespace

PureState::PureState(std::vector<Complex> amplitudes)
    : amps_(std::move(amplitudes)) {
  if (amps_.size() != 2 && amps_.size() != 4) {
    throw std::invalid_argument(
        "PureState: amplitude vector must have length 2 or 4, got " +
        std::to_string(amps_.size()));
  }
  double n2 = 0.0;
  for (const Complex& a : amps_) n2 += std::norm(a);
  if (std::abs(n2 - 1.0) > kStateTolerance) {
    throw std::invalid_argument("PureState: amplitudes are not normalized");
  }
}

double PureState::norm() const {
  double n2 = 0.0;
  for (const Complex& a : amps_) n2 += std::norm(a);
  return std::sqrt(n2);
}

Complex overlap(const PureState& a, const PureState& b) {
  if (a.dimension() != b.dimension()) {
    throw std::invalid_argument("overlap: dimension mismatch");
  }
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < a.dimension(); ++i) {
    s += std::conj(a.amplitudes()[i]) * b.amplitudes()[i];
  }
  return s;
}

Matrix2 pauli_matrix(PauliOp op) {
  const Complex i{0.0, 1.0};
  switch (op) {
    case PauliOp::Identity:
      return {{{1.0, 0.0}, {0.0, 1.0}}};
    case PauliOp::SigmaX:
      return {{{0.0, 1.0}, {1.0, 0.0}}};
    case PauliOp::ISigmaY:
      return {{{0.0, 1.0}, {-1.0, 0.0}}};
    case PauliOp::SigmaZ:
      return {{{1.0, 0.0}, {0.0, -1.0}}};
  }
  throw std::invalid_argument("pauli_matrix: unknown operator");
}

const char* to_string(PauliOp op) {
  switch (op) {
    case PauliOp::Identity: return "I";
    case PauliOp::SigmaX: return "sigma_x";
    case PauliOp::ISigmaY: return "i_sigma_y";
    case PauliOp::SigmaZ: return "sigma_z";
  }
  return "?";
}

const char* to_string(BellOutcome outcome) {
  switch (outcome) {
    case BellOutcome::PsiMinus: return "psi-";
    case BellOutcome::PsiPlus: return "psi+";
    case BellOutcome::PhiMinus: return "phi-";
    case BellOutcome::PhiPlus: return "phi+";
  }
  return "?";
}

PureState bell_state(BellOutcome outcome) {
  return prepare_state(to_string(outcome));
}

bool is_known_label(std::string_view label) {
  return !label_amplitudes(label).empty();
}

PureState prepare_state(std::string_view label) {
  std::vector<Complex> amps = label_amplitudes(label);
  if (amps.empty()) {
    throw std::invalid_argument("prepare_state: unknown state label '" +
                                std::string(label) + "'");
  }
  return PureState(std::move(amps));
}

PureState apply_pauli(PauliOp op, const PureState& state, std::size_t target) {
  if (target >= state.qubit_count()) {
    throw std::out_of_range("apply_pauli: qubit index out of range");
  }
  const Matrix2 m = pauli_matrix(op);
  const auto& in = state.amplitudes();
  std::vector<Complex> out(in.size());
  // Stride between the target qubit's |0> and |1> components; the leftmost
  // qubit is the most significant index.
  const std::size_t stride = state.dimension() >> (target + 1);
  for (std::size_t base = 0; base < in.size(); ++base) {
    if ((base / stride) % 2 != 0) continue;
    const Complex a0 = in[base];
    const Complex a1 = in[base + stride];
    out[base] = m[0][0] * a0 + m[0][1] * a1;
    out[base + stride] = m[1][0] * a0 + m[1][1] * a1;
  }
  return PureState(std::move(out));
}

std::array<double, 4> bsm_probabilities(const PureState& joint) {
  if (joint.qubit_count() != 2) {
    throw std::invalid_argument("bsm_probabilities: two-qubit state required");
  }
  std::array<double, 4> probs{};
  for (BellOutcome outcome : kBellOutcomes) {
    probs[static_cast<std::size_t>(outcome)] =
        std::norm(overlap(bell_state(outcome), joint));
  }
  return probs;
}

const char* to_string(PrepBasis basis) {
  return basis == PrepBasis::Z ? "Z" : "X";
}

TeleportResult teleport_oracle(std::string_view bob_initial,
                               BellOutcome outcome) {
  if (bob_initial != "0" && bob_initial != "1" && bob_initial != "+" &&
      bob_initial != "-") {
    throw std::invalid_argument(
        "teleport_oracle: initial state must be one of 0, 1, +, -");
  }
  const PureState pair = prepare_state("psi-");   // qubits (A, T)
  const PureState bob = prepare_state(bob_initial);  // qubit B
  const PureState bell = bell_state(outcome);

  // Three-qubit joint state indexed |a t b>; project qubits (T, B) onto
  // <bell| and read off the unnormalized state of the retained qubit A.
  std::array<Complex, 2> retained{};
  for (std::size_t a = 0; a < 2; ++a) {
    for (std::size_t t = 0; t < 2; ++t) {
      for (std::size_t b = 0; b < 2; ++b) {
        const Complex amp = pair.amplitudes()[a * 2 + t] * bob.amplitudes()[b];
        retained[a] += std::conj(bell.amplitudes()[t * 2 + b]) * amp;
      }
    }
  }
  double n2 = std::norm(retained[0]) + std::norm(retained[1]);
  if (n2 < kStateTolerance) {
    throw std::logic_error("teleport_oracle: outcome has zero amplitude");
  }
  const double inv = 1.0 / std::sqrt(n2);
  PureState state({retained[0] * inv, retained[1] * inv});

  // The result is always proportional to one of the four preparation states.
  for (const char* label : {"0", "1", "+", "-"}) {
    const Complex ph = overlap(prepare_state(label), state);
    if (std::abs(std::abs(ph) - 1.0) < kStateTolerance) {
      return TeleportResult{std::move(state), label, ph};
    }
  }
  throw std::logic_error("teleport_oracle: result not in the preparation set");
}

PauliOp recovery_operation(BellOutcome outcome, PrepBasis basis) {
  // Small enough to derive on demand: search {I, i sigma_y} for the unique
  // correction that restores both basis states up to global phase.
  static const auto table = [] {
    std::array<std::array<PauliOp, 2>, 4> t{};
    for (BellOutcome out : kBellOutcomes) {
      for (PrepBasis b : {PrepBasis::Z, PrepBasis::X}) {
        const char* l0 = (b == PrepBasis::Z) ? "0" : "+";
        const char* l1 = (b == PrepBasis::Z) ? "1" : "-";
        PauliOp found = PauliOp::Identity;
        bool ok = false;
        for (PauliOp candidate : {PauliOp::Identity, PauliOp::ISigmaY}) {
          bool restores = true;
          for (const char* label : {l0, l1}) {
            const TeleportResult r = teleport_oracle(label, out);
            const PureState corrected = apply_pauli(candidate, r.state, 0);
            const double fid =
                std::abs(overlap(prepare_state(label), corrected));
            if (std::abs(fid - 1.0) > kStateTolerance) {
              restores = false;
              break;
            }
          }
          if (restores) {
            found = candidate;
            ok = true;
            break;
          }
        }
        if (!ok) throw std::logic_error("recovery_operation: no correction");
        t[static_cast<std::size_t>(out)][b == PrepBasis::X ? 1 : 0] = found;
      }
    }
    return t;
  }();
  return table[static_cast<std::size_t>(outcome)]
              [basis == PrepBasis::X ? 1 : 0];
}

}  // namespace spmqc::qcore
