#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spmqc/channel.hpp"
#include "spmqc/code.hpp"
#include "spmqc/keysink.hpp"
#include "spmqc/qcore.hpp"
#include "spmqc/rng.hpp"

// Monte Carlo execution of the six-step protocol, one frame per round:
//
//   1. each transmission round is either a single-photon security-check
//      round or an entangled message round (Bell pair + receiver photon)
//   2. the middle node's Bell measurement is sampled from the analytic
//      click model; check rounds sample the detector-pair coincidences
//   3. the security check estimates the DBER per basis and gates the frame
//   4. the sender one-time-pads the message with sink keys, encodes it with
//      the configured error-control code, interleaves integrity-check bits,
//      and (optionally) masks every data bit with local randomness
//   5. each encoded qubit is measured by the middle node in the receiver's
//      announced basis; positions without a usable click are retransmitted
//      on a fresh teleported qubit up to a configured budget
//   6. the integrity check estimates the QBER; on success the receiver
//      unmasks, decodes and decrypts, and both endpoints distill the same
//      number of key bits into their sinks for the next frame
namespace spmqc::protocol {

/// Intercept-resend eavesdropper acting on security-check rounds. Eve
/// measures the sender's photon and forwards her collapsed eigenstate.
/// By default she guesses the measurement basis uniformly between the
/// targeted basis and its conjugate; with `fixed_conjugate` she always
/// measures in the conjugate basis.
struct AttackConfig {
  bool enabled = false;
  double fraction = 1.0;  // of check rounds intercepted
  channel::Basis target = channel::Basis::X;
  bool fixed_conjugate = false;
};

channel::Basis conjugate_basis(channel::Basis basis);

struct SessionConfig {
  channel::ChannelParams params{};
  double distance_km = 20.0;
  channel::Basis check_basis = channel::Basis::X;
  bool incum = true;
  int repetition = 3;  // repetition-code copies, odd
  double check_round_fraction = 0.5;     // step-1 single-photon rounds
  double integrity_check_fraction = 0.1; // check bits per codeword bit
  double dber_threshold = -1.0;  // < 0 resolves to e_d + 0.03
  double qber_threshold = -1.0;  // < 0 resolves to e_det + 0.03
  std::size_t message_bits = 64;
  std::size_t bootstrap_key_bits = 0;  // 0 resolves to message_bits
  std::uint64_t bootstrap_key_seed = 0x5eed;
  double bootstrap_capacity_factor = 0.5;  // round-1 capacity estimate
  int max_frame_retries = 8;      // restarts before giving up on a frame
  int step5_max_attempts = 1024;  // per-position retransmission budget
  bool record_transcript = false;
  AttackConfig attack{};

  double resolved_dber_threshold() const;
  double resolved_qber_threshold() const;
  std::size_t resolved_bootstrap_bits() const;
  void validate() const;
};

enum class RoundKind { Check, Message };

enum class FrameAbort { None, SecurityCheck, IntegrityCheck, Decode,
                        KeyUnderflow };

const char* to_string(FrameAbort abort);

/// Per-frame summary.
struct RoundReport {
  std::size_t frame_index = 0;
  channel::BasisMap dber_estimate;  // empirical, per check basis
  std::array<std::uint64_t, 3> dber_coincidences{};
  double qber_estimate = 0.0;
  std::uint64_t qber_samples = 0;  // valid integrity-check bits
  double capacity_estimate = 0.0;  // bits/use, used for distillation
  std::size_t distilled_key_len = 0;
  bool delivered = false;
  bool message_intact = false;  // simulation ground truth
  FrameAbort aborted_at = FrameAbort::None;
  int passes = 1;  // transmissions of this frame (1 = no restart)
  std::uint64_t check_rounds = 0;
  std::uint64_t message_rounds = 0;  // step-2 attempts
  std::uint64_t step5_uses = 0;
};

/// One transmission round as it appears in the transcript.
struct RoundRecord {
  RoundKind kind = RoundKind::Check;
  std::string alice_state;  // polarization label or "psi-"
  std::string bob_state;
  std::int8_t bsm = -1;       // BellOutcome index, -1 = no click
  std::int8_t pair_index = -1;  // coincidence pair, check rounds
  bool sifted = false;        // check round with matching bases
  bool error = false;         // DBER error tally (check rounds)
  bool attacked = false;
  std::int8_t recovery = -1;  // PauliOp index (message rounds)
  std::int32_t position = -1;   // qubit slot carried by this round
  std::int32_t attempt = -1;    // retransmission attempt number
  bool step5_click = false;
  std::int8_t step5_bit = -1;   // announced measurement result
  std::int8_t encode_op = -1;   // PauliOp index of the data mapping
  std::int8_t mask_bit = -1;    // local mask bit used on this attempt
};

/// Everything one frame announced or carried, for export and assertions.
struct FrameTrace {
  std::size_t frame_index = 0;
  int pass = 0;
  bool delivered = false;
  BitVec message;
  BitVec key;
  BitVec ciphertext;
  BitVec codeword;
  BitVec mask;    // final mask bit per codeword position
  BitVec masked;  // codeword XOR mask
  std::vector<std::uint32_t> check_positions;
  BitVec check_bits;
  std::vector<std::uint8_t> position_valid;  // per qubit slot
  std::vector<std::uint32_t> announced_mask_positions;
  std::vector<RoundRecord> rounds;
};

/// Outcome of one security-check round.
struct CheckRoundOutcome {
  bool sifted = false;
  channel::Basis basis = channel::Basis::X;
  channel::Pol alice_pol = channel::Pol::H;
  channel::Pol bob_pol = channel::Pol::H;
  bool coincidence = false;
  int pair_index = -1;
  bool error = false;  // after the misalignment flip
  bool attacked = false;
};

/// Samples check rounds from the coincidence model; intercepted rounds use
/// the exact Bell statistics of the state Eve forwards (dark-count assisted
/// coincidences are neglected on those rounds).
class CheckSampler {
 public:
  CheckSampler(const channel::ChannelParams& params, double eta_c,
               const AttackConfig& attack);

  CheckRoundOutcome sample(Rng& alice, Rng& bob, Rng& channel_rng,
                           Rng& eve) const;

 private:
  double bell_collapse_prob(std::size_t eigen_index, std::size_t pol) const;

  double eta_c_;
  double misalignment_;
  AttackConfig attack_;
  // cumulative coincidence probability per (basis, alice bit, bob bit);
  // the four entries follow kCoincidencePairs order
  std::array<std::array<std::array<std::array<double, 4>, 2>, 2>, 3> cum_{};
  // Bell-projection weights |<psi-|a b>|^2 and |<psi+|a b>|^2 per
  // polarization pair, for attacked rounds
  std::array<std::array<std::array<double, 2>, 6>, 6> bell_{};
  // |<a|b>|^2 between polarization eigenstates, for Eve's collapse
  std::array<std::array<double, 6>, 6> overlap2_{};
};

/// Step-5 measurement of one encoded qubit.
struct Step5Sample {
  bool clicked = false;
  bool flipped = false;
};

Step5Sample sample_step5(double q_c2, double qber, Rng& channel_rng);

/// Step-2 Bell measurement for an entangled round: succeeds with
/// probability q_C1 of the session's check basis, outcomes uniform.
std::optional<qcore::BellOutcome> sample_message_bsm(double q_c1,
                                                     Rng& channel_rng,
                                                     Rng& charlie);

/// Empirical security-check verdict for a set of check-round outcomes.
struct SecurityCheckResult {
  channel::BasisMap dber;
  std::array<std::uint64_t, 3> coincidences{};
  std::array<std::uint64_t, 3> errors{};
  bool conclusive = false;  // every basis produced at least one coincidence
  bool pass = false;
};

SecurityCheckResult evaluate_security_check(
    const std::array<std::uint64_t, 3>& coincidences,
    const std::array<std::uint64_t, 3>& errors, double threshold);

/// Sequential frame engine; the key sinks carry state across frames.
class Session {
 public:
  Session(SessionConfig config, std::uint64_t seed);

  RoundReport run_frame(const BitVec& message);
  std::vector<RoundReport> run(std::size_t n_frames);

  const SessionConfig& config() const { return config_; }
  const channel::PerformancePoint& point() const { return point_; }
  const KeySink& alice_sink() const { return alice_sink_; }
  const KeySink& bob_sink() const { return bob_sink_; }
  bool sinks_synced() const { return alice_sink_.same_content(bob_sink_); }
  std::size_t codeword_bits() const { return codeword_bits_; }
  std::size_t integrity_bits() const { return integrity_bits_; }
  std::size_t total_positions() const { return total_positions_; }
  const std::vector<FrameTrace>& traces() const { return traces_; }

  BitVec random_message();

 private:
  struct PositionOutcome {
    std::int32_t attempts = 0;
    bool valid = false;
    bool flipped = false;
  };

  struct TransportResult {
    std::array<std::uint64_t, 3> check_coincidences{};
    std::array<std::uint64_t, 3> check_errors{};
    std::vector<PositionOutcome> positions;
    std::uint64_t check_rounds = 0;
    std::uint64_t message_rounds = 0;
    std::uint64_t step5_uses = 0;
    std::vector<RoundRecord> rounds;  // only when recording
  };

  TransportResult run_transport();

  SessionConfig config_;
  channel::PerformancePoint point_;
  CheckSampler check_sampler_;
  std::unique_ptr<ErrorControlCode> code_;
  RoleRngs rngs_;
  KeySink alice_sink_;
  KeySink bob_sink_;
  std::size_t codeword_bits_ = 0;
  std::size_t integrity_bits_ = 0;
  std::size_t total_positions_ = 0;
  std::size_t frame_index_ = 0;
  std::vector<FrameTrace> traces_;
};

std::vector<RoundReport> run_session(const SessionConfig& config,
                                     std::size_t n_frames,
                                     std::uint64_t seed);

}  // namespace spmqc::protocol
