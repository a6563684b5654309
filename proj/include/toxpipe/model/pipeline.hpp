#pragma once

#include <array>
#include <filesystem>
#include <span>
#include <string_view>

#include <nlohmann/json.hpp>

#include "toxpipe/corpus.hpp"
#include "toxpipe/embed.hpp"
#include "toxpipe/model/classifier.hpp"
#include "toxpipe/model/trainer.hpp"
#include "toxpipe/preprocess.hpp"

namespace toxpipe::model {

// Raw text -> cleaned tokens -> vocabulary ids -> post-padded sequence.
struct TextPipeline {
  CleanConfig clean;
  Vocab vocab;
  std::size_t max_len = 512;

  Sequence encode(std::string_view text) const;
};

EncodedDataset encode_corpus(const Corpus& corpus, const TextPipeline& pipeline);

struct Prediction {
  int label = 0;
  std::array<double, 3> probs{};
};

template <class M>
Prediction predict(const M& model, std::string_view text, const TextPipeline& pipeline) {
  const Sequence seq = pipeline.encode(text);
  const auto probs = model.predict_proba(std::span<const Sequence>(&seq, 1));
  Prediction p;
  for (int k = 0; k < 3; ++k) p.probs[k] = static_cast<double>(probs(0, k));
  p.label = argmax_row(probs, 0);
  return p;
}

// Binary container: "TOXM", u32 version, u32 length + JSON metadata
// (model spec, vocabulary and its hash, cleaning config, run config), u32
// tensor count, then per tensor: u32 name length, name, u32 rows, u32 cols,
// rows*cols little-endian float32 values.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct LoadedModel {
  Model model;
  TextPipeline pipeline;
  nlohmann::json run;
};

void save_checkpoint(const std::filesystem::path& path, Model& model, const TextPipeline& pipeline,
                     const nlohmann::json& run);
LoadedModel load_checkpoint(const std::filesystem::path& path);

}  // namespace toxpipe::model
