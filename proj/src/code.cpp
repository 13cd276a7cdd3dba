#include "spmqc/code.hpp"

#include <stdexcept>

namespace spmqc::protocol {

RepetitionCode::RepetitionCode(int copies) : copies_(copies) {
  if (copies < 1 || copies % 2 == 0) {
    throw std::invalid_argument(
        "RepetitionCode: copy count must be odd and positive");
  }
}

BitVec RepetitionCode::encode(const BitVec& message) const {
  BitVec out;
  out.reserve(message.size() * static_cast<std::size_t>(copies_));
  for (std::uint8_t bit : message) {
    for (int k = 0; k < copies_; ++k) out.push_back(bit);
  }
  return out;
}

std::optional<BitVec> RepetitionCode::decode(const BitVec& received,
                                             const BitVec& valid) const {
  if (received.size() != valid.size() ||
      received.size() % static_cast<std::size_t>(copies_) != 0) {
    throw std::invalid_argument("RepetitionCode: malformed codeword");
  }
  const std::size_t bits = received.size() / static_cast<std::size_t>(copies_);
  BitVec out(bits);
  for (std::size_t i = 0; i < bits; ++i) {
    int ones = 0;
    int zeros = 0;
    for (int k = 0; k < copies_; ++k) {
      const std::size_t idx = i * static_cast<std::size_t>(copies_) +
                              static_cast<std::size_t>(k);
      if (!valid[idx]) continue;
      if (received[idx]) {
        ++ones;
      } else {
        ++zeros;
      }
    }
    if (ones == zeros) return std::nullopt;  // tie or fully erased
    out[i] = ones > zeros ? 1 : 0;
  }
  return out;
}

std::unique_ptr<ErrorControlCode> make_repetition_code(int copies) {
  return std::make_unique<RepetitionCode>(copies);
}

}  // namespace spmqc::protocol
