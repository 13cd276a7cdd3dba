#include "spmqc/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spmqc::protocol {

namespace {

constexpr std::array<channel::Pol, 6> kAllPols = {
    channel::Pol::H,        channel::Pol::V,         channel::Pol::DiagPlus,
    channel::Pol::DiagMinus, channel::Pol::CircPlus, channel::Pol::CircMinus};

const char* pol_state_label(channel::Pol pol) {
  switch (pol) {
    case channel::Pol::H: return "0";
    case channel::Pol::V: return "1";
    case channel::Pol::DiagPlus: return "+";
    case channel::Pol::DiagMinus: return "-";
    case channel::Pol::CircPlus: return "~+";
    case channel::Pol::CircMinus: return "~-";
  }
  return "?";
}

std::size_t pol_index(channel::Pol pol) {
  return static_cast<std::size_t>(
      std::find(kAllPols.begin(), kAllPols.end(), pol) - kAllPols.begin());
}

qcore::PureState tensor(const qcore::PureState& a, const qcore::PureState& b) {
  std::vector<qcore::Complex> amps(4);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      amps[i * 2 + j] = a.amplitudes()[i] * b.amplitudes()[j];
    }
  }
  return qcore::PureState(std::move(amps));
}

BitVec xor_bits(const BitVec& a, const BitVec& b) {
  BitVec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] ^ b[i];
  return out;
}

BitVec prefix_bits(const BitVec& bits, std::size_t count) {
  return BitVec(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(count));
}

}  // namespace

channel::Basis conjugate_basis(channel::Basis basis) {
  switch (basis) {
    case channel::Basis::X: return channel::Basis::Z;
    case channel::Basis::Z: return channel::Basis::X;
    case channel::Basis::Y: return channel::Basis::Z;
  }
  return channel::Basis::Z;
}

double SessionConfig::resolved_dber_threshold() const {
  return dber_threshold >= 0.0 ? dber_threshold : params.e_d + 0.03;
}

double SessionConfig::resolved_qber_threshold() const {
  return qber_threshold >= 0.0 ? qber_threshold : params.e_det + 0.03;
}

std::size_t SessionConfig::resolved_bootstrap_bits() const {
  return bootstrap_key_bits > 0 ? bootstrap_key_bits : message_bits;
}

void SessionConfig::validate() const {
  params.validate();
  if (distance_km < 0.0) {
    throw std::invalid_argument("distance_km must be non-negative");
  }
  if (repetition < 1 || repetition % 2 == 0) {
    throw std::invalid_argument("repetition must be odd and positive");
  }
  if (!(check_round_fraction >= 0.0 && check_round_fraction < 1.0)) {
    throw std::invalid_argument("check_round_fraction must lie in [0, 1)");
  }
  if (!(integrity_check_fraction >= 0.0 && integrity_check_fraction <= 1.0)) {
    throw std::invalid_argument(
        "integrity_check_fraction must lie in [0, 1]");
  }
  if (message_bits == 0) {
    throw std::invalid_argument("message_bits must be positive");
  }
  if (max_frame_retries < 1) {
    throw std::invalid_argument("max_frame_retries must be positive");
  }
  if (step5_max_attempts < 1) {
    throw std::invalid_argument("step5_max_attempts must be positive");
  }
  if (bootstrap_capacity_factor < 0.0) {
    throw std::invalid_argument("bootstrap_capacity_factor must be >= 0");
  }
  if (attack.enabled &&
      !(attack.fraction >= 0.0 && attack.fraction <= 1.0)) {
    throw std::invalid_argument("attack.fraction must lie in [0, 1]");
  }
}

const char* to_string(FrameAbort abort) {
  switch (abort) {
    case FrameAbort::None: return "none";
    case FrameAbort::SecurityCheck: return "security_check";
    case FrameAbort::IntegrityCheck: return "integrity_check";
    case FrameAbort::Decode: return "decode";
    case FrameAbort::KeyUnderflow: return "key_underflow";
  }
  return "?";
}

CheckSampler::CheckSampler(const channel::ChannelParams& params, double eta_c,
                           const AttackConfig& attack)
    : eta_c_(eta_c), misalignment_(params.e_d), attack_(attack) {
  for (channel::Basis u : channel::kAllBases) {
    const auto ui = static_cast<std::size_t>(u);
    for (int ba = 0; ba < 2; ++ba) {
      for (int bb = 0; bb < 2; ++bb) {
        const channel::Pol pa = channel::pol_eigenstate(u, ba);
        const channel::Pol pb = channel::pol_eigenstate(u, bb);
        double acc = 0.0;
        for (std::size_t k = 0; k < channel::kCoincidencePairs.size(); ++k) {
          acc += channel::pair_click_prob(channel::kCoincidencePairs[k], pa,
                                          pb, eta_c, params.p_d);
          cum_[ui][ba][bb][k] = acc;
        }
      }
    }
  }
  // Exact two-photon Bell weights for every polarization pair; used when an
  // intercepted round reaches the Bell measurement.
  for (channel::Pol a : kAllPols) {
    for (channel::Pol b : kAllPols) {
      const auto state_a = qcore::prepare_state(pol_state_label(a));
      const auto state_b = qcore::prepare_state(pol_state_label(b));
      const auto probs = qcore::bsm_probabilities(tensor(state_a, state_b));
      bell_[pol_index(a)][pol_index(b)] = {
          probs[static_cast<std::size_t>(qcore::BellOutcome::PsiMinus)],
          probs[static_cast<std::size_t>(qcore::BellOutcome::PsiPlus)]};
      overlap2_[pol_index(a)][pol_index(b)] =
          std::norm(qcore::overlap(state_a, state_b));
    }
  }
}

CheckRoundOutcome CheckSampler::sample(Rng& alice, Rng& bob, Rng& channel_rng,
                                       Rng& eve) const {
  const auto ua = static_cast<channel::Basis>(alice.below(3));
  const int bit_a = alice.bit();
  const auto ub = static_cast<channel::Basis>(bob.below(3));
  const int bit_b = bob.bit();

  CheckRoundOutcome out;
  out.alice_pol = channel::pol_eigenstate(ua, bit_a);
  out.bob_pol = channel::pol_eigenstate(ub, bit_b);

  // Eve acts before the bases are announced.
  channel::Pol resent = out.alice_pol;
  if (attack_.enabled && eve.bernoulli(attack_.fraction)) {
    out.attacked = true;
    const channel::Basis eve_basis =
        attack_.fixed_conjugate
            ? conjugate_basis(attack_.target)
            : (eve.bernoulli(0.5) ? attack_.target
                                  : conjugate_basis(attack_.target));
    const channel::Pol e0 = channel::pol_eigenstate(eve_basis, 0);
    const double keep =
        bell_collapse_prob(pol_index(e0), pol_index(out.alice_pol));
    resent = channel::pol_eigenstate(eve_basis, eve.real01() < keep ? 0 : 1);
  }

  if (ua != ub) return out;  // sifted away, nothing tallied
  out.sifted = true;
  out.basis = ua;

  if (out.attacked) {
    const auto& w = bell_[pol_index(resent)][pol_index(out.bob_pol)];
    const double p_cross = eta_c_ * eta_c_ * w[0];
    const double p_shared = eta_c_ * eta_c_ * w[1];
    const double r = channel_rng.real01();
    if (r < p_cross) {
      out.coincidence = true;
      out.pair_index = static_cast<int>(channel_rng.below(2));
    } else if (r < p_cross + p_shared) {
      out.coincidence = true;
      out.pair_index = 2 + static_cast<int>(channel_rng.below(2));
    }
  } else {
    const auto& cum =
        cum_[static_cast<std::size_t>(ua)][bit_a][bit_b];
    const double r = channel_rng.real01();
    for (std::size_t k = 0; k < cum.size(); ++k) {
      if (r < cum[k]) {
        out.coincidence = true;
        out.pair_index = static_cast<int>(k);
        break;
      }
    }
  }

  if (out.coincidence) {
    const bool wrong = channel::is_error_coincidence(
        channel::kCoincidencePairs[static_cast<std::size_t>(out.pair_index)],
        out.alice_pol, out.bob_pol);
    out.error = wrong != channel_rng.bernoulli(misalignment_);
  }
  return out;
}

double CheckSampler::bell_collapse_prob(std::size_t eigen_index,
                                        std::size_t pol) const {
  return overlap2_[eigen_index][pol];
}

Step5Sample sample_step5(double q_c2, double qber, Rng& channel_rng) {
  Step5Sample s;
  s.clicked = channel_rng.bernoulli(q_c2);
  if (s.clicked) s.flipped = channel_rng.bernoulli(qber);
  return s;
}

std::optional<qcore::BellOutcome> sample_message_bsm(double q_c1,
                                                     Rng& channel_rng,
                                                     Rng& charlie) {
  if (!channel_rng.bernoulli(q_c1)) return std::nullopt;
  return qcore::kBellOutcomes[charlie.below(4)];
}

SecurityCheckResult evaluate_security_check(
    const std::array<std::uint64_t, 3>& coincidences,
    const std::array<std::uint64_t, 3>& errors, double threshold) {
  SecurityCheckResult result;
  result.coincidences = coincidences;
  result.errors = errors;
  result.conclusive = true;
  bool below = true;
  for (std::size_t u = 0; u < 3; ++u) {
    if (coincidences[u] == 0) {
      result.conclusive = false;
      continue;
    }
    const double est =
        static_cast<double>(errors[u]) / static_cast<double>(coincidences[u]);
    result.dber.values[u] = est;
    if (est > threshold) below = false;
  }
  result.pass = result.conclusive && below;
  return result;
}

Session::Session(SessionConfig config, std::uint64_t seed)
    : config_(std::move(config)),
      point_(channel::secrecy_capacity(config_.params, config_.distance_km,
                                       config_.check_basis, config_.incum)),
      check_sampler_(config_.params, point_.eta_c, config_.attack),
      code_(make_repetition_code(config_.repetition)),
      rngs_(seed) {
  config_.validate();
  if (point_.selected_q_c1() <= 0.0 || point_.q_c2 <= 0.0) {
    throw std::invalid_argument(
        "Session: click rates vanish at this configuration");
  }
  codeword_bits_ = code_->codeword_length(config_.message_bits);
  integrity_bits_ = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(
             config_.integrity_check_fraction *
             static_cast<double>(codeword_bits_))));
  total_positions_ = codeword_bits_ + integrity_bits_;

  Rng bootstrap(config_.bootstrap_key_seed);
  BitVec pool(config_.resolved_bootstrap_bits());
  for (auto& b : pool) b = bootstrap.bit();
  alice_sink_.push(pool, -1);
  bob_sink_.push(pool, -1);
}

BitVec Session::random_message() {
  BitVec m(config_.message_bits);
  for (auto& b : m) b = rngs_.alice.bit();
  return m;
}

Session::TransportResult Session::run_transport() {
  TransportResult t;
  t.positions.resize(total_positions_);
  const bool recording = config_.record_transcript;
  const double q_c1 = point_.selected_q_c1();
  const double q_c2 = point_.q_c2;
  const double e = point_.qber;

  std::size_t resolved = 0;
  while (resolved < total_positions_) {
    if (rngs_.alice.bernoulli(config_.check_round_fraction)) {
      ++t.check_rounds;
      const CheckRoundOutcome o =
          check_sampler_.sample(rngs_.alice, rngs_.bob, rngs_.channel,
                                rngs_.eve);
      if (o.sifted && o.coincidence) {
        const auto u = static_cast<std::size_t>(o.basis);
        ++t.check_coincidences[u];
        if (o.error) ++t.check_errors[u];
      }
      if (recording) {
        RoundRecord r;
        r.kind = RoundKind::Check;
        r.alice_state = channel::to_string(o.alice_pol);
        r.bob_state = channel::to_string(o.bob_pol);
        r.sifted = o.sifted;
        r.pair_index = static_cast<std::int8_t>(o.pair_index);
        r.error = o.error;
        r.attacked = o.attacked;
        t.rounds.push_back(std::move(r));
      }
    } else {
      ++t.message_rounds;
      const std::uint8_t bob_in_x = rngs_.bob.bit();
      const std::uint8_t bob_bit = rngs_.bob.bit();
      const auto outcome =
          sample_message_bsm(q_c1, rngs_.channel, rngs_.charlie);
      if (!outcome) {
        if (recording) {
          RoundRecord r;
          r.kind = RoundKind::Message;
          r.alice_state = "psi-";
          t.rounds.push_back(std::move(r));
        }
        continue;
      }
      auto& pos = t.positions[resolved];
      const std::int32_t attempt = pos.attempts++;
      ++t.step5_uses;
      const Step5Sample s5 = sample_step5(q_c2, e, rngs_.channel);
      if (recording) {
        const auto basis = bob_in_x ? qcore::PrepBasis::X : qcore::PrepBasis::Z;
        RoundRecord r;
        r.kind = RoundKind::Message;
        r.alice_state = "psi-";
        r.bob_state = bob_in_x ? (bob_bit ? "-" : "+") : (bob_bit ? "1" : "0");
        r.bsm = static_cast<std::int8_t>(*outcome);
        r.recovery = static_cast<std::int8_t>(
            qcore::recovery_operation(*outcome, basis));
        r.position = static_cast<std::int32_t>(resolved);
        r.attempt = attempt;
        r.step5_click = s5.clicked;
        t.rounds.push_back(std::move(r));
      }
      if (s5.clicked) {
        pos.valid = true;
        pos.flipped = s5.flipped;
        ++resolved;
      } else if (pos.attempts >= config_.step5_max_attempts) {
        pos.valid = false;
        ++resolved;
      }
    }
  }
  return t;
}

RoundReport Session::run_frame(const BitVec& message) {
  if (message.size() != config_.message_bits) {
    throw std::invalid_argument("run_frame: message length mismatch");
  }
  RoundReport report;
  report.frame_index = frame_index_;
  FrameAbort last_abort = FrameAbort::SecurityCheck;
  const bool recording = config_.record_transcript;

  for (int pass = 1; pass <= config_.max_frame_retries; ++pass) {
    report.passes = pass;
    TransportResult t = run_transport();
    report.check_rounds += t.check_rounds;
    report.message_rounds += t.message_rounds;
    report.step5_uses += t.step5_uses;

    FrameTrace trace;
    if (recording) {
      trace.frame_index = frame_index_;
      trace.pass = pass;
      trace.rounds = std::move(t.rounds);
      trace.position_valid.resize(total_positions_);
      for (std::size_t i = 0; i < total_positions_; ++i) {
        trace.position_valid[i] = t.positions[i].valid ? 1 : 0;
      }
    }

    const SecurityCheckResult sec = evaluate_security_check(
        t.check_coincidences, t.check_errors,
        config_.resolved_dber_threshold());
    report.dber_estimate = sec.dber;
    report.dber_coincidences = sec.coincidences;
    if (!sec.pass) {
      last_abort = FrameAbort::SecurityCheck;
      if (recording) traces_.push_back(std::move(trace));
      continue;
    }

    if (alice_sink_.size() < config_.message_bits) {
      last_abort = FrameAbort::KeyUnderflow;
      if (recording) traces_.push_back(std::move(trace));
      break;  // deferred until key material exists; no point retrying now
    }
    const BitVec key_alice = *alice_sink_.take(config_.message_bits);
    const BitVec key_bob = *bob_sink_.take(config_.message_bits);

    const BitVec ciphertext = xor_bits(message, key_alice);
    const BitVec codeword = code_->encode(ciphertext);

    // Interleave the integrity-check slots among the codeword slots.
    std::vector<std::uint32_t> order(total_positions_);
    std::iota(order.begin(), order.end(), 0u);
    for (std::size_t i = total_positions_ - 1; i > 0; --i) {
      const auto j = rngs_.alice.below(static_cast<std::uint32_t>(i + 1));
      std::swap(order[i], order[j]);
    }
    std::vector<std::uint32_t> check_positions(
        order.begin(), order.begin() + static_cast<std::ptrdiff_t>(
                                            integrity_bits_));
    std::sort(check_positions.begin(), check_positions.end());
    std::vector<std::uint8_t> is_check(total_positions_, 0);
    for (std::uint32_t p : check_positions) is_check[p] = 1;

    BitVec check_bits(integrity_bits_);
    for (auto& b : check_bits) b = rngs_.alice.bit();

    // Bit carried by each qubit slot, before masking.
    BitVec slot_bit(total_positions_);
    std::vector<std::int32_t> slot_codeword_index(total_positions_, -1);
    {
      std::size_t next_check = 0;
      std::size_t next_data = 0;
      for (std::size_t p = 0; p < total_positions_; ++p) {
        if (is_check[p]) {
          slot_bit[p] = check_bits[next_check++];
        } else {
          slot_codeword_index[p] = static_cast<std::int32_t>(next_data);
          slot_bit[p] = codeword[next_data++];
        }
      }
    }

    // Masking draws one fresh local bit per transmission attempt of every
    // codeword slot; the announced mask is the bit used on the final
    // attempt. Draw order is fixed by slot then attempt.
    BitVec final_mask(codeword_bits_, 0);
    std::vector<BitVec> attempt_masks;
    if (recording) attempt_masks.resize(total_positions_);
    if (config_.incum) {
      for (std::size_t p = 0; p < total_positions_; ++p) {
        if (slot_codeword_index[p] < 0) continue;
        BitVec masks(static_cast<std::size_t>(t.positions[p].attempts));
        for (auto& b : masks) b = rngs_.alice.bit();
        if (!masks.empty()) {
          final_mask[static_cast<std::size_t>(slot_codeword_index[p])] =
              masks.back();
        }
        if (recording) attempt_masks[p] = std::move(masks);
      }
    }

    if (recording) {
      // Everything up to here was transmitted, so it belongs to the trace
      // even when a later check aborts the pass; mask announcements are
      // appended only after the integrity check passes.
      trace.message = message;
      trace.key = key_alice;
      trace.ciphertext = ciphertext;
      trace.codeword = codeword;
      trace.mask = final_mask;
      if (config_.incum) trace.masked = xor_bits(codeword, final_mask);
      trace.check_positions = check_positions;
      trace.check_bits = check_bits;
      for (RoundRecord& r : trace.rounds) {
        if (r.position < 0) continue;
        const auto p = static_cast<std::size_t>(r.position);
        const std::uint8_t data = slot_bit[p];
        std::uint8_t carried = data;
        if (config_.incum && slot_codeword_index[p] >= 0) {
          carried = static_cast<std::uint8_t>(
              data ^ attempt_masks[p][static_cast<std::size_t>(r.attempt)]);
          r.mask_bit = static_cast<std::int8_t>(
              attempt_masks[p][static_cast<std::size_t>(r.attempt)]);
        }
        r.encode_op = static_cast<std::int8_t>(
            carried ? qcore::PauliOp::ISigmaY : qcore::PauliOp::Identity);
        if (r.step5_click) {
          const std::uint8_t bob_bit =
              (r.bob_state == "1" || r.bob_state == "-") ? 1 : 0;
          const std::uint8_t flip =
              (r.attempt == t.positions[p].attempts - 1 &&
               t.positions[p].valid && t.positions[p].flipped)
                  ? 1
                  : 0;
          r.step5_bit = static_cast<std::int8_t>(bob_bit ^ carried ^ flip);
        }
      }
    }

    // Step 6: integrity check on the announced check bits.
    std::uint64_t check_valid = 0;
    std::uint64_t check_errors = 0;
    for (std::uint32_t p : check_positions) {
      if (!t.positions[p].valid) continue;
      ++check_valid;
      if (t.positions[p].flipped) ++check_errors;
    }
    if (check_valid == 0) {
      last_abort = FrameAbort::IntegrityCheck;
      if (recording) traces_.push_back(std::move(trace));
      continue;
    }
    const double qber_est = static_cast<double>(check_errors) /
                            static_cast<double>(check_valid);
    report.qber_estimate = qber_est;
    report.qber_samples = check_valid;
    if (qber_est > config_.resolved_qber_threshold()) {
      last_abort = FrameAbort::IntegrityCheck;
      if (recording) traces_.push_back(std::move(trace));
      continue;
    }

    if (recording && config_.incum) {
      // Unmasking announcement: only now, and only for slots the receiver
      // reported as valid.
      for (std::size_t p = 0; p < total_positions_; ++p) {
        if (slot_codeword_index[p] >= 0 && t.positions[p].valid) {
          trace.announced_mask_positions.push_back(
              static_cast<std::uint32_t>(p));
        }
      }
    }

    // Unmask and decode. A slot whose qubit never produced a usable click
    // is an erasure; masking makes no difference to the received bit since
    // the same mask bit is removed again.
    BitVec received(codeword_bits_, 0);
    BitVec valid(codeword_bits_, 0);
    for (std::size_t p = 0; p < total_positions_; ++p) {
      const std::int32_t ci = slot_codeword_index[p];
      if (ci < 0) continue;
      const auto idx = static_cast<std::size_t>(ci);
      valid[idx] = t.positions[p].valid ? 1 : 0;
      if (valid[idx]) {
        received[idx] = codeword[idx] ^ (t.positions[p].flipped ? 1 : 0);
      }
    }
    const auto decoded = code_->decode(received, valid);
    if (!decoded) {
      last_abort = FrameAbort::Decode;
      if (recording) traces_.push_back(std::move(trace));
      continue;
    }
    const BitVec plain = xor_bits(*decoded, key_bob);

    report.delivered = true;
    report.message_intact = (plain == message);
    last_abort = FrameAbort::None;

    // Step 6: capacity estimate and key distillation.
    double cs_est;
    if (frame_index_ == 0) {
      cs_est = config_.bootstrap_capacity_factor * point_.selected_capacity();
    } else {
      cs_est = std::max(
          0.0, channel::capacity_from_estimates(
                   point_, config_.check_basis, config_.incum, qber_est,
                   sec.dber[config_.check_basis]));
    }
    report.capacity_estimate = cs_est;
    const auto distill = std::min<std::size_t>(
        config_.message_bits,
        static_cast<std::size_t>(std::floor(
            static_cast<double>(codeword_bits_) * cs_est)));
    if (distill > 0) {
      alice_sink_.push(prefix_bits(message, distill),
                       static_cast<std::int64_t>(frame_index_));
      bob_sink_.push(prefix_bits(plain, distill),
                     static_cast<std::int64_t>(frame_index_));
    }
    report.distilled_key_len = distill;

    if (recording) {
      trace.delivered = true;
      traces_.push_back(std::move(trace));
    }
    break;
  }

  report.aborted_at = report.delivered ? FrameAbort::None : last_abort;
  ++frame_index_;
  return report;
}

std::vector<RoundReport> Session::run(std::size_t n_frames) {
  std::vector<RoundReport> reports;
  reports.reserve(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    reports.push_back(run_frame(random_message()));
  }
  return reports;
}

std::vector<RoundReport> run_session(const SessionConfig& config,
                                     std::size_t n_frames,
                                     std::uint64_t seed) {
  Session session(config, seed);
  return session.run(n_frames);
}

}  // namespace spmqc::protocol
