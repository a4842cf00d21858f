// SPDX-FileCopyrightText: 2026 The cloudgauge Authors
// SPDX-License-Identifier: Apache-2.0

#include "cloudgauge/range_coder.hpp"

#include "cloudgauge/error.hpp"

namespace cloudgauge {

namespace {
constexpr std::uint32_t kTop = 1u << 24;
}

AdaptiveByteModel::AdaptiveByteModel() {
  freq_.fill(1);
  total_ = 256;
}

std::uint32_t AdaptiveByteModel::cumulative(std::uint8_t s) const noexcept {
  std::uint32_t c = 0;
  for (unsigned i = 0; i < s; ++i) c += freq_[i];
  return c;
}

std::uint8_t AdaptiveByteModel::find(std::uint32_t target, std::uint32_t& start) const noexcept {
  std::uint32_t c = 0;
  for (unsigned i = 0; i < 255; ++i) {
    if (target < c + freq_[i]) {
      start = c;
      return static_cast<std::uint8_t>(i);
    }
    c += freq_[i];
  }
  start = c;
  return 255;
}

void AdaptiveByteModel::update(std::uint8_t s) noexcept {
  freq_[s] += kIncrement;
  total_ += kIncrement;
  if (total_ > kMaxTotal) {
    total_ = 0;
    for (auto& f : freq_) {
      f = (f >> 1) | 1u;
      total_ += f;
    }
  }
}

void RangeEncoder::shift_low() {
  if (static_cast<std::uint32_t>(low_) < 0xFF000000u || (low_ >> 32) != 0) {
    const auto carry = static_cast<std::uint8_t>(low_ >> 32);
    std::uint8_t pending = cache_;
    do {
      out_.push_back(static_cast<std::uint8_t>(pending + carry));
      pending = 0xFF;
    } while (--cache_size_ != 0);
    cache_ = static_cast<std::uint8_t>(low_ >> 24);
  }
  ++cache_size_;
  low_ = (low_ & 0x00FFFFFFu) << 8;
}

void RangeEncoder::encode(std::uint32_t start, std::uint32_t size, std::uint32_t total) {
  const std::uint32_t r = range_ / total;
  low_ += static_cast<std::uint64_t>(r) * start;
  range_ = r * size;
  while (range_ < kTop) {
    range_ <<= 8;
    shift_low();
  }
}

void RangeEncoder::encode(std::uint8_t symbol, AdaptiveByteModel& model) {
  encode(model.cumulative(symbol), model.frequency(symbol), model.total());
  model.update(symbol);
}

std::vector<std::uint8_t> RangeEncoder::finish() {
  for (int i = 0; i < 5; ++i) shift_low();
  return std::move(out_);
}

RangeDecoder::RangeDecoder(std::span<const std::uint8_t> input) : input_(input) {
  for (int i = 0; i < 5; ++i) code_ = (code_ << 8) | next_byte();
}

std::uint8_t RangeDecoder::next_byte() noexcept {
  if (pos_ < input_.size()) return input_[pos_++];
  ++overrun_;
  return 0;
}

std::uint8_t RangeDecoder::decode(AdaptiveByteModel& model) {
  if (overrun_ > 0) throw DataError("range decoder desync: read past end of payload");
  const std::uint32_t r = range_ / model.total();
  const std::uint32_t target = code_ / r;
  if (target >= model.total()) throw DataError("range decoder desync: code out of range");
  std::uint32_t start = 0;
  const std::uint8_t symbol = model.find(target, start);
  code_ -= r * start;
  range_ = r * model.frequency(symbol);
  while (range_ < kTop) {
    range_ <<= 8;
    code_ = (code_ << 8) | next_byte();
  }
  model.update(symbol);
  return symbol;
}

std::vector<std::uint8_t> range_encode(std::span<const std::uint8_t> symbols) {
  AdaptiveByteModel model;
  RangeEncoder encoder;
  for (const std::uint8_t s : symbols) encoder.encode(s, model);
  return encoder.finish();
}

}  // namespace cloudgauge
