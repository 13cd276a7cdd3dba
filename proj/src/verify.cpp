#include "spmqc/verify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "spmqc/channel.hpp"
#include "spmqc/protocol.hpp"
#include "spmqc/qcore.hpp"
#include "spmqc/rng.hpp"
#include "spmqc/security.hpp"

namespace spmqc::verify {

namespace {

using qcore::BellOutcome;

struct TableCell {
  const char* initial;
  BellOutcome outcome;
  const char* label;
  double sign;
};

// Teleportation correspondence: receiver's initial state and Bell outcome
// versus the sender's retained state, including the explicit sign.
constexpr std::array<TableCell, 16> kCorrespondence = {{
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

Check teleport_table_check() {
  Check c{"teleport correspondence (16 cells, state and sign)", 0.0, 1e-12,
          false};
  for (const TableCell& cell : kCorrespondence) {
    const auto r = qcore::teleport_oracle(cell.initial, cell.outcome);
    const auto expected = qcore::prepare_state(cell.label);
    const double fidelity = std::abs(qcore::overlap(expected, r.state));
    c.deviation = std::max(c.deviation, std::abs(fidelity - 1.0));
    if (r.label != cell.label) c.deviation = std::max(c.deviation, 1.0);
    c.deviation =
        std::max(c.deviation, std::abs(r.phase - qcore::Complex(cell.sign)));
  }
  c.pass = c.deviation < c.tolerance;
  return c;
}

Check recovery_check() {
  Check c{"recovery operation restores the receiver's state", 0.0, 1e-12,
          false};
  for (qcore::BellOutcome outcome : qcore::kBellOutcomes) {
    for (qcore::PrepBasis basis : {qcore::PrepBasis::Z, qcore::PrepBasis::X}) {
      const qcore::PauliOp op = qcore::recovery_operation(outcome, basis);
      const char* l0 = basis == qcore::PrepBasis::Z ? "0" : "+";
      const char* l1 = basis == qcore::PrepBasis::Z ? "1" : "-";
      for (const char* label : {l0, l1}) {
        const auto r = qcore::teleport_oracle(label, outcome);
        const auto corrected = qcore::apply_pauli(op, r.state, 0);
        const double fidelity =
            std::abs(qcore::overlap(qcore::prepare_state(label), corrected));
        c.deviation = std::max(c.deviation, std::abs(fidelity - 1.0));
      }
    }
  }
  c.pass = c.deviation < c.tolerance;
  return c;
}

Check holevo_check(std::uint64_t seed) {
  Check c{"gram/eigenvalue/entropy chain matches 1 + h(eps)", 0.0, 1e-12,
          false};
  protocol::Rng rng(seed);
  for (int i = 0; i < 200; ++i) {
    const double eps = 0.5 * rng.real01();
    for (channel::Basis basis : {channel::Basis::X, channel::Basis::Z}) {
      const auto eigs =
          security::eigenvalues(security::gram_matrix(basis, eps));
      const double entropy = security::ensemble_entropy(eigs);
      c.deviation = std::max(
          c.deviation,
          std::abs(entropy - (1.0 + channel::binary_entropy(eps))));
    }
  }
  c.pass = c.deviation < c.tolerance;
  return c;
}

Check click_prob_routes_check(std::uint64_t seed) {
  Check c{"coincidence closed forms match the photon-number expansion", 0.0,
          1e-12, false};
  protocol::Rng rng(seed);
  for (int i = 0; i < 100; ++i) {
    const double eta = rng.real01();
    const double p_d = rng.real01() * 0.01;
    for (channel::Basis basis : channel::kAllBases) {
      for (int ba = 0; ba < 2; ++ba) {
        for (int bb = 0; bb < 2; ++bb) {
          const auto pa = channel::pol_eigenstate(basis, ba);
          const auto pb = channel::pol_eigenstate(basis, bb);
          for (channel::ClickPair pair : channel::kCoincidencePairs) {
            const double direct =
                channel::pair_click_prob(pair, pa, pb, eta, p_d);
            const double expanded =
                channel::pair_click_prob_expanded(pair, pa, pb, eta, p_d);
            c.deviation = std::max(c.deviation, std::abs(direct - expanded));
          }
        }
      }
    }
  }
  c.pass = c.deviation < c.tolerance;
  return c;
}

Check mc_check_rounds(std::uint64_t seed) {
  // Largest |z| score of the empirical DBER against the analytic value,
  // over the three bases at 30 km.
  Check c{"Monte Carlo DBER matches the model at 30 km (|z| < 3)", 0.0, 3.0,
          false};
  channel::ChannelParams params;
  const double eta = channel::transmittance(params, 30.0);
  protocol::AttackConfig no_attack;
  protocol::CheckSampler sampler(params, eta, no_attack);
  protocol::RoleRngs rngs(seed);
  std::array<std::uint64_t, 3> n{};
  std::array<std::uint64_t, 3> err{};
  for (int i = 0; i < 600000; ++i) {
    const auto o =
        sampler.sample(rngs.alice, rngs.bob, rngs.channel, rngs.eve);
    if (o.sifted && o.coincidence) {
      const auto u = static_cast<std::size_t>(o.basis);
      ++n[u];
      if (o.error) ++err[u];
    }
  }
  for (channel::Basis u : channel::kAllBases) {
    const auto ui = static_cast<std::size_t>(u);
    const double expected = channel::dber(u, params, eta);
    const double sigma = std::sqrt(expected * (1.0 - expected) /
                                   static_cast<double>(n[ui]));
    const double est =
        static_cast<double>(err[ui]) / static_cast<double>(n[ui]);
    c.deviation = std::max(c.deviation, std::abs(est - expected) / sigma);
  }
  c.pass = c.deviation < c.tolerance;
  return c;
}

Check mc_step5(std::uint64_t seed) {
  Check c{"Monte Carlo QBER matches the model at 30 km (|z| < 3)", 0.0, 3.0,
          false};
  channel::ChannelParams params;
  const double eta = channel::transmittance(params, 30.0);
  const double q_c2 = channel::click_rate_2(eta, params.p_d);
  const double e = channel::qber(params, eta);
  protocol::Rng rng(protocol::mix_seed(seed, 77));
  std::uint64_t clicks = 0;
  std::uint64_t flips = 0;
  for (int i = 0; i < 600000; ++i) {
    const auto s = protocol::sample_step5(q_c2, e, rng);
    if (s.clicked) {
      ++clicks;
      if (s.flipped) ++flips;
    }
  }
  const double est = static_cast<double>(flips) / static_cast<double>(clicks);
  const double sigma =
      std::sqrt(e * (1.0 - e) / static_cast<double>(clicks));
  c.deviation = std::abs(est - e) / sigma;
  c.pass = c.deviation < c.tolerance;
  return c;
}

Check bsm_completeness(std::uint64_t seed) {
  Check c{"Bell measurement probabilities sum to one", 0.0, 1e-12, false};
  protocol::Rng rng(protocol::mix_seed(seed, 99));
  for (int i = 0; i < 1000; ++i) {
    std::array<qcore::Complex, 4> amps;
    double n2 = 0.0;
    for (auto& a : amps) {
      a = {rng.real01() - 0.5, rng.real01() - 0.5};
      n2 += std::norm(a);
    }
    const double inv = 1.0 / std::sqrt(n2);
    std::vector<qcore::Complex> v;
    for (const auto& a : amps) v.push_back(a * inv);
    const auto probs = qcore::bsm_probabilities(qcore::PureState(v));
    const double sum = probs[0] + probs[1] + probs[2] + probs[3];
    c.deviation = std::max(c.deviation, std::abs(sum - 1.0));
  }
  c.pass = c.deviation < c.tolerance;
  return c;
}

}  // namespace

std::vector<Check> run_verification(std::uint64_t seed) {
  std::vector<Check> checks;
  checks.push_back(teleport_table_check());
  checks.push_back(recovery_check());
  checks.push_back(bsm_completeness(seed));
  checks.push_back(holevo_check(seed));
  checks.push_back(click_prob_routes_check(seed));
  checks.push_back(mc_check_rounds(seed));
  checks.push_back(mc_step5(seed));
  return checks;
}

}  // namespace spmqc::verify
