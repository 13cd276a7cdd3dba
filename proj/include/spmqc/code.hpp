#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace spmqc::protocol {

using BitVec = std::vector<std::uint8_t>;

/// Forward error-control code applied to the ciphertext before it is mapped
/// onto qubits. Decoding sees per-position validity flags: a position whose
/// qubit never produced a usable measurement is an erasure.
class ErrorControlCode {
 public:
  virtual ~ErrorControlCode() = default;

  virtual double rate() const = 0;
  virtual std::size_t codeword_length(std::size_t message_bits) const = 0;
  virtual BitVec encode(const BitVec& message) const = 0;

  /// `received` and `valid` have codeword length; received[i] is only
  /// meaningful when valid[i] != 0. Returns the decoded message, or nullopt
  /// when some bit cannot be resolved.
  virtual std::optional<BitVec> decode(const BitVec& received,
                                       const BitVec& valid) const = 0;
};

/// Repeats each message bit `copies` times (odd) and decodes by majority
/// over the non-erased copies; a tie or a fully erased bit is a decode
/// failure.
class RepetitionCode final : public ErrorControlCode {
 public:
  explicit RepetitionCode(int copies);

  int copies() const { return copies_; }
  double rate() const override { return 1.0 / copies_; }
  std::size_t codeword_length(std::size_t message_bits) const override {
    return message_bits * static_cast<std::size_t>(copies_);
  }
  BitVec encode(const BitVec& message) const override;
  std::optional<BitVec> decode(const BitVec& received,
                               const BitVec& valid) const override;

 private:
  int copies_;
};

std::unique_ptr<ErrorControlCode> make_repetition_code(int copies);

}  // namespace spmqc::protocol
