#pragma once

#include <cstdint>
#include <deque>
#include <optional>

#include "spmqc/code.hpp"

namespace spmqc::protocol {

/// FIFO store of key bits shared by the two endpoints. Bits are consumed
/// exactly once, in insertion order; each bit remembers the frame that
/// produced it (the pre-shared bootstrap pool uses round index -1).
class KeySink {
 public:
  void push(const BitVec& bits, std::int64_t round_index);

  /// Removes and returns the oldest `count` bits, or nullopt (and leaves
  /// the sink untouched) when fewer are available.
  std::optional<BitVec> take(std::size_t count);

  std::size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  /// True when both sinks hold the same bits with the same provenance.
  bool same_content(const KeySink& other) const {
    return bits_ == other.bits_ && provenance_ == other.provenance_;
  }

  std::size_t total_pushed() const { return total_pushed_; }
  std::size_t total_taken() const { return total_taken_; }

 private:
  std::deque<std::uint8_t> bits_;
  std::deque<std::int64_t> provenance_;
  std::size_t total_pushed_ = 0;
  std::size_t total_taken_ = 0;
};

}  // namespace spmqc::protocol
