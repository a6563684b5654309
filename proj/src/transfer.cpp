#include "toxpipe/model/transfer.hpp"

namespace toxpipe::model {

std::vector<std::uint8_t> attention_mask(std::span<const int> ids) {
  std::vector<std::uint8_t> mask(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) mask[i] = ids[i] != 0 ? 1 : 0;
  return mask;
}

namespace {

double unit_hash(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  // 53 random bits mapped to [-1, 1).
  const std::uint64_t h = nn::mix_seed(a, b, c) >> 11;
  return static_cast<double>(h) * 0x1.0p-52 - 1.0;
}

}  // namespace

nn::Matrix<double> HashEncoder::encode(std::span<const int> ids, std::span<const std::uint8_t> mask) const {
  if (ids.size() != max_len_ || mask.size() != max_len_)
    throw std::invalid_argument("hash encoder: input length must equal max_len");
  nn::Matrix<double> out = nn::Matrix<double>::Zero(static_cast<nn::Index>(max_len_),
                                                    static_cast<nn::Index>(width_));
  for (std::size_t t = 0; t < max_len_; ++t) {
    if (!mask[t]) continue;
    for (std::size_t k = 0; k < width_; ++k) {
      out(static_cast<nn::Index>(t), static_cast<nn::Index>(k)) =
          unit_hash(seed_, static_cast<std::uint64_t>(ids[t]), k) +
          0.1 * unit_hash(~seed_, t, k);
    }
  }
  return out;
}

nn::Matrix<double> EmbeddingEncoder::encode(std::span<const int> ids,
                                            std::span<const std::uint8_t> mask) const {
  if (ids.size() != max_len_ || mask.size() != max_len_)
    throw std::invalid_argument("embedding encoder: input length must equal max_len");
  nn::Matrix<double> out = nn::Matrix<double>::Zero(static_cast<nn::Index>(max_len_), matrix_.cols());
  for (std::size_t t = 0; t < max_len_; ++t) {
    if (!mask[t]) continue;
    if (ids[t] < 0 || ids[t] >= matrix_.rows())
      throw std::out_of_range("embedding encoder: token id " + std::to_string(ids[t]));
    out.row(static_cast<nn::Index>(t)) = matrix_.row(ids[t]).cast<double>();
  }
  return out;
}

}  // namespace toxpipe::model
