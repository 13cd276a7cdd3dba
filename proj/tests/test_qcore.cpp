#include "doctest.h"

#include <stdexcept>

#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "spmqc/qcore.hpp"

using namespace spmqc;
using qcore::BellOutcome;
using qcore::Complex;
using qcore::PureState;

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void check_state(const PureState& state, const std::vector<Complex>& expected,
                 double tol = 1e-12) {
  REQUIRE(state.dimension() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(std::abs(state.amplitudes()[i] - expected[i]) < tol);
  }
}

PureState random_two_qubit_state(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::array<Complex, 4> amps;
  double n2 = 0.0;
  for (auto& a : amps) {
    a = {dist(rng), dist(rng)};
    n2 += std::norm(a);
  }
  std::vector<Complex> v;
  for (const auto& a : amps) v.push_back(a / std::sqrt(n2));
  return PureState(v);
}

// Independent projection oracle: norm^2 of <bell|_(T,B) (|psi->_(A,T) |b>_B)
// for each Bell outcome, computed from scratch.
double outcome_probability(const char* bob_label, BellOutcome outcome) {
  const PureState pair = qcore::prepare_state("psi-");
  const PureState bob = qcore::prepare_state(bob_label);
  const PureState bell = qcore::bell_state(outcome);
  Complex retained[2] = {};
  for (int a = 0; a < 2; ++a) {
    for (int t = 0; t < 2; ++t) {
      for (int b = 0; b < 2; ++b) {
        retained[a] += std::conj(bell.amplitudes()[t * 2 + b]) *
                       pair.amplitudes()[a * 2 + t] * bob.amplitudes()[b];
      }
    }
  }
  return std::norm(retained[0]) + std::norm(retained[1]);
}

struct Cell {
  const char* initial;
  BellOutcome outcome;
  const char* label;
  double sign;
};

// Expected teleportation correspondence, frozen from the exact projection.
constexpr std::array<Cell, 16> kCells = {{
    {"0", BellOutcome::PsiMinus, "0", -1.0},
    {"0", BellOutcome::PsiPlus, "0", 1.0},
    {"0", BellOutcome::PhiMinus, "1", -1.0},
    {"0", BellOutcome::PhiPlus, "1", -1.0},
    {"1", BellOutcome::PsiMinus, "1", -1.0},
    {"1", BellOutcome::PsiPlus, "1", -1.0},
    {"1", BellOutcome::PhiMinus, "0", -1.0},
    {"1", BellOutcome::PhiPlus, "0", 1.0},
    {"+", BellOutcome::PsiMinus, "+", -1.0},
    {"+", BellOutcome::PsiPlus, "-", 1.0},
    {"+", BellOutcome::PhiMinus, "+", -1.0},
    {"+", BellOutcome::PhiPlus, "-", 1.0},
    {"-", BellOutcome::PsiMinus, "-", -1.0},
    {"-", BellOutcome::PsiPlus, "+", 1.0},
    {"-", BellOutcome::PhiMinus, "-", 1.0},
    {"-", BellOutcome::PhiPlus, "+", -1.0},
}};

}  // namespace

TEST_CASE("prepare_state returns the named amplitude vectors") {
  check_state(qcore::prepare_state("+"), {kInvSqrt2, kInvSqrt2});
  check_state(qcore::prepare_state("0"), {1.0, 0.0});
  check_state(qcore::prepare_state("psi-"),
              {0.0, kInvSqrt2, -kInvSqrt2, 0.0});
  check_state(qcore::prepare_state("~-"),
              {kInvSqrt2, Complex(0.0, -kInvSqrt2)});
  CHECK_THROWS_AS(qcore::prepare_state("plus"), std::invalid_argument);
  CHECK(qcore::is_known_label("~+"));
  CHECK_FALSE(qcore::is_known_label("2"));
}

TEST_CASE("PureState validates length and normalization") {
  CHECK_THROWS_AS(PureState(std::vector<Complex>{1.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PureState(std::vector<Complex>{1.0, 0.0, 0.0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(PureState(std::vector<Complex>{0.5, 0.5}),
                  std::invalid_argument);
}

TEST_CASE("apply_pauli acts with the fixed matrix conventions") {
  const PureState zero = qcore::prepare_state("0");
  check_state(qcore::apply_pauli(qcore::PauliOp::ISigmaY, zero, 0),
              {0.0, -1.0});
  check_state(qcore::apply_pauli(qcore::PauliOp::Identity,
                                 qcore::prepare_state("~+"), 0),
              {kInvSqrt2, Complex(0.0, kInvSqrt2)});
  check_state(qcore::apply_pauli(qcore::PauliOp::SigmaX,
                                 qcore::prepare_state("+"), 0),
              {kInvSqrt2, kInvSqrt2});
  CHECK_THROWS_AS(qcore::apply_pauli(qcore::PauliOp::SigmaX, zero, 1),
                  std::out_of_range);
}

TEST_CASE("apply_pauli targets either qubit of a pair") {
  const PureState phi_plus = qcore::prepare_state("phi+");
  // sigma_x on the left qubit maps |phi+> to |psi+>
  check_state(qcore::apply_pauli(qcore::PauliOp::SigmaX, phi_plus, 0),
              {0.0, kInvSqrt2, kInvSqrt2, 0.0});
  // sigma_z on the right qubit maps |phi+> to |phi->
  check_state(qcore::apply_pauli(qcore::PauliOp::SigmaZ, phi_plus, 1),
              {kInvSqrt2, 0.0, 0.0, -kInvSqrt2});
}

TEST_CASE("apply_pauli preserves the norm on random states") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const PureState state = random_two_qubit_state(rng);
    for (auto op : {qcore::PauliOp::Identity, qcore::PauliOp::SigmaX,
                    qcore::PauliOp::ISigmaY, qcore::PauliOp::SigmaZ}) {
      const PureState out = qcore::apply_pauli(op, state, i % 2);
      CHECK(std::abs(out.norm() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("pauli matrices are unitary") {
  for (auto op : {qcore::PauliOp::Identity, qcore::PauliOp::SigmaX,
                  qcore::PauliOp::ISigmaY, qcore::PauliOp::SigmaZ}) {
    const auto m = qcore::pauli_matrix(op);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) {
        Complex dot =
            std::conj(m[0][i]) * m[0][j] + std::conj(m[1][i]) * m[1][j];
        CHECK(std::abs(dot - Complex(i == j ? 1.0 : 0.0)) < 1e-12);
      }
    }
  }
}

TEST_CASE("bsm_probabilities projects onto the Bell basis") {
  const auto pure = qcore::bsm_probabilities(qcore::prepare_state("psi-"));
  CHECK(pure[static_cast<int>(BellOutcome::PsiMinus)] ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pure[static_cast<int>(BellOutcome::PsiPlus)] ==
        doctest::Approx(0.0).epsilon(1e-12));

  // |00> splits evenly between |phi+> and |phi->
  const PureState zz(std::vector<Complex>{1.0, 0.0, 0.0, 0.0});
  const auto split = qcore::bsm_probabilities(zz);
  CHECK(split[static_cast<int>(BellOutcome::PhiPlus)] ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(split[static_cast<int>(BellOutcome::PhiMinus)] ==
        doctest::Approx(0.5).epsilon(1e-12));
  CHECK(split[static_cast<int>(BellOutcome::PsiMinus)] ==
        doctest::Approx(0.0).epsilon(1e-12));

  CHECK_THROWS_AS(qcore::bsm_probabilities(qcore::prepare_state("0")),
                  std::invalid_argument);
}

TEST_CASE("bsm_probabilities sums to one for random states") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 1000; ++i) {
    const auto probs = qcore::bsm_probabilities(random_two_qubit_state(rng));
    CHECK(std::abs(probs[0] + probs[1] + probs[2] + probs[3] - 1.0) < 1e-12);
  }
}

TEST_CASE("teleportation outcomes are uniform over the Bell basis") {
  for (const char* label : {"0", "1", "+", "-"}) {
    for (BellOutcome outcome : qcore::kBellOutcomes) {
      CHECK(outcome_probability(label, outcome) ==
            doctest::Approx(0.25).epsilon(1e-12));
    }
  }
}

TEST_CASE("teleport_oracle reproduces the correspondence table") {
  for (const Cell& cell : kCells) {
    const auto r = qcore::teleport_oracle(cell.initial, cell.outcome);
    CHECK(r.label == cell.label);
    const double fidelity =
        std::abs(qcore::overlap(qcore::prepare_state(cell.label), r.state));
    CHECK(std::abs(fidelity - 1.0) < 1e-12);
    CHECK(std::abs(r.phase - Complex(cell.sign)) < 1e-12);
  }
  CHECK_THROWS_AS(qcore::teleport_oracle("~+", BellOutcome::PsiMinus),
                  std::invalid_argument);
}

TEST_CASE("recovery_operation matches the protocol rule") {
  CHECK(qcore::recovery_operation(BellOutcome::PhiMinus,
                                  qcore::PrepBasis::Z) ==
        qcore::PauliOp::ISigmaY);
  CHECK(qcore::recovery_operation(BellOutcome::PhiPlus,
                                  qcore::PrepBasis::Z) ==
        qcore::PauliOp::ISigmaY);
  CHECK(qcore::recovery_operation(BellOutcome::PsiMinus,
                                  qcore::PrepBasis::Z) ==
        qcore::PauliOp::Identity);
}

TEST_CASE("recovery_operation restores every basis state up to phase") {
  for (BellOutcome outcome : qcore::kBellOutcomes) {
    for (qcore::PrepBasis basis :
         {qcore::PrepBasis::Z, qcore::PrepBasis::X}) {
      const qcore::PauliOp op = qcore::recovery_operation(outcome, basis);
      const char* l0 = basis == qcore::PrepBasis::Z ? "0" : "+";
      const char* l1 = basis == qcore::PrepBasis::Z ? "1" : "-";
      for (const char* label : {l0, l1}) {
        const auto r = qcore::teleport_oracle(label, outcome);
        const auto fixed = qcore::apply_pauli(op, r.state, 0);
        const double fidelity =
            std::abs(qcore::overlap(qcore::prepare_state(label), fixed));
        CHECK(std::abs(fidelity - 1.0) < 1e-12);
      }
    }
  }
}
