// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CLOUDGAUGE_RANGE_CODER_HPP
#define CLOUDGAUGE_RANGE_CODER_HPP

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace cloudgauge {

// Order-0 adaptive frequency model over byte symbols. Every symbol starts
// with count 1; counts are halved once the total would exceed kMaxTotal.
class AdaptiveByteModel {
 public:
  static constexpr std::uint32_t kMaxTotal = 1u << 16;
  static constexpr std::uint32_t kIncrement = 24;

  AdaptiveByteModel();

  std::uint32_t total() const noexcept { return total_; }
  std::uint32_t frequency(std::uint8_t s) const noexcept { return freq_[s]; }
  std::uint32_t cumulative(std::uint8_t s) const noexcept;

  /// Symbol whose cumulative interval contains `target` (< total()), and its
  /// cumulative start.
  std::uint8_t find(std::uint32_t target, std::uint32_t& start) const noexcept;

  void update(std::uint8_t s) noexcept;

 private:
  std::array<std::uint32_t, 256> freq_{};
  std::uint32_t total_ = 0;
};

// Carry-propagating range encoder (32-bit range, byte output).
class RangeEncoder {
 public:
  void encode(std::uint32_t start, std::uint32_t size, std::uint32_t total);
  void encode(std::uint8_t symbol, AdaptiveByteModel& model);
  std::vector<std::uint8_t> finish();

 private:
  void shift_low();

  std::uint64_t low_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint8_t cache_ = 0;
  std::uint64_t cache_size_ = 1;
  std::vector<std::uint8_t> out_;
};

class RangeDecoder {
 public:
  explicit RangeDecoder(std::span<const std::uint8_t> input);

  /// Throws DataError when the input cannot have been produced by the encoder.
  std::uint8_t decode(AdaptiveByteModel& model);

  /// True when every input byte was consumed and none was read past the end.
  bool exhausted_cleanly() const noexcept { return pos_ == input_.size() && overrun_ == 0; }

 private:
  std::uint8_t next_byte() noexcept;

  std::span<const std::uint8_t> input_;
  std::size_t pos_ = 0;
  std::size_t overrun_ = 0;
  std::uint32_t range_ = 0xFFFFFFFFu;
  std::uint32_t code_ = 0;
};

std::vector<std::uint8_t> range_encode(std::span<const std::uint8_t> symbols);

}  // namespace cloudgauge

#endif  // CLOUDGAUGE_RANGE_CODER_HPP
