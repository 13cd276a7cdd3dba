#include "spmqc/keysink.hpp"

namespace spmqc::protocol {

void KeySink::push(const BitVec& bits, std::int64_t round_index) {
  for (std::uint8_t b : bits) {
    bits_.push_back(b);
    provenance_.push_back(round_index);
  }
  total_pushed_ += bits.size();
}

std::optional<BitVec> KeySink::take(std::size_t count) {
  if (bits_.size() < count) return std::nullopt;
  BitVec out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(bits_.front());
    bits_.pop_front();
    provenance_.pop_front();
  }
  total_taken_ += count;
  return out;
}

}  // namespace spmqc::protocol
