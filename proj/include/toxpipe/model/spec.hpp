#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace toxpipe::model {

enum class HeadInput { flatten, final_state };
enum class EmbeddingMode { trainable, frozen };

std::string to_string(HeadInput h);
HeadInput head_input_from_string(const std::string& s);

struct ModelSpec {
  std::size_t vocab_size = 2000;  // words; the embedding has vocab_size + 1 rows
  std::size_t embed_dim = 100;
  std::size_t max_len = 512;
  std::size_t lstm1_units = 100;
  double lstm1_dropout = 0.0;
  std::size_t lstm2_units = 100;
  double lstm2_dropout = 0.0;
  HeadInput head_input = HeadInput::flatten;
  std::size_t dense1_units = 128;
  double dense1_dropout = 0.2;
  std::size_t dense2_units = 64;
  double dense2_dropout = 0.2;
  double l2 = 0.01;
  std::size_t classes = 3;
  EmbeddingMode embedding = EmbeddingMode::trainable;

  // Width of the block handed to the head (after flatten or final state).
  std::size_t head_width() const;
  void check() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

void to_json(nlohmann::json& j, const ModelSpec& s);
void from_json(const nlohmann::json& j, ModelSpec& s);

struct TrainConfig {
  std::size_t batch_size = 128;
  std::size_t epochs = 20;
  double lr = 0.001;
  std::uint64_t seed = 0;
  bool shuffle = true;

  void check() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Dense stack shared by the recurrent classifier and the transfer head.
struct HeadShape {
  std::size_t dense1_units = 128;
  double dense1_dropout = 0.2;
  std::size_t dense2_units = 64;
  double dense2_dropout = 0.2;
  double l2 = 0.01;
  std::size_t classes = 3;
};

inline HeadShape head_shape(const ModelSpec& s) {
  return {s.dense1_units, s.dense1_dropout, s.dense2_units, s.dense2_dropout, s.l2, s.classes};
}

}  // namespace toxpipe::model
