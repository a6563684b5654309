#include "toxpipe/model/pipeline.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace toxpipe::model {

Sequence TextPipeline::encode(std::string_view text) const {
  return pad(toxpipe::encode(split_tokens(toxpipe::clean(text, this->clean)), vocab), max_len);
}

EncodedDataset encode_corpus(const Corpus& corpus, const TextPipeline& pipeline) {
  EncodedDataset out;
  out.inputs.reserve(corpus.size());
  out.labels.reserve(corpus.size());
  for (const auto& ex : corpus) {
    out.inputs.push_back(pipeline.encode(ex.text));
    out.labels.push_back(ex.label);
  }
  return out;
}

namespace {

constexpr char kMagic[4] = {'T', 'O', 'X', 'M'};

void put_u32(std::ostream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("checkpoint: truncated file");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::string get_bytes(std::istream& in, std::size_t n) {
  std::string s(n, '\0');
  if (n && !in.read(s.data(), static_cast<std::streamsize>(n)))
    throw std::runtime_error("checkpoint: truncated file");
  return s;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, Model& model, const TextPipeline& pipeline,
                     const nlohmann::json& run) {
  nlohmann::json meta;
  meta["spec"] = model.spec();
  meta["vocab"] = pipeline.vocab.words();
  meta["vocab_hash"] = pipeline.vocab.hash();
  meta["clean"] = pipeline.clean;
  meta["max_len"] = pipeline.max_len;
  meta["run"] = run;
  const std::string json = meta.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out.write(kMagic, 4);
  put_u32(out, kCheckpointVersion);
  put_u32(out, static_cast<std::uint32_t>(json.size()));
  out.write(json.data(), static_cast<std::streamsize>(json.size()));

  const auto params = model.parameters();
  put_u32(out, static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    put_u32(out, static_cast<std::uint32_t>(p->name.size()));
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_u32(out, static_cast<std::uint32_t>(p->value.rows()));
    put_u32(out, static_cast<std::uint32_t>(p->value.cols()));
    for (nn::Index i = 0; i < p->value.size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(p->value.data()[i]));
  }
  if (!out) throw std::runtime_error("error writing checkpoint " + path.string());
}

LoadedModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  if (get_bytes(in, 4) != std::string(kMagic, 4)) throw std::runtime_error("checkpoint: bad magic");
  const auto version = get_u32(in);
  if (version != kCheckpointVersion)
    throw std::runtime_error("checkpoint: unsupported version " + std::to_string(version));
  const auto meta = nlohmann::json::parse(get_bytes(in, get_u32(in)));

  const auto spec = meta.at("spec").get<ModelSpec>();
  TextPipeline pipeline;
  pipeline.vocab = Vocab(meta.at("vocab").get<std::vector<std::string>>());
  if (pipeline.vocab.hash() != meta.at("vocab_hash").get<std::string>())
    throw std::runtime_error("checkpoint: vocabulary hash mismatch");
  pipeline.clean = meta.at("clean").get<CleanConfig>();
  pipeline.max_len = meta.at("max_len").get<std::size_t>();

  const EmbeddingMatrix placeholder = EmbeddingMatrix::Zero(static_cast<nn::Index>(spec.vocab_size + 1),
                                                            static_cast<nn::Index>(spec.embed_dim));
  LoadedModel loaded{Model(spec, placeholder, 0, Init::zeros), std::move(pipeline), meta.at("run")};

  std::map<std::string, nn::Param<float>*> by_name;
  for (auto* p : loaded.model.parameters()) by_name[p->name] = p;
  const auto count = get_u32(in);
  if (count != by_name.size()) throw std::runtime_error("checkpoint: tensor count mismatch");
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto name = get_bytes(in, get_u32(in));
    auto it = by_name.find(name);
    if (it == by_name.end()) throw std::runtime_error("checkpoint: unexpected tensor " + name);
    const auto rows = get_u32(in), cols = get_u32(in);
    auto& value = it->second->value;
    if (rows != value.rows() || cols != value.cols())
      throw std::runtime_error("checkpoint: shape mismatch for " + name);
    for (nn::Index i = 0; i < value.size(); ++i) value.data()[i] = std::bit_cast<float>(get_u32(in));
  }
  return loaded;
}

}  // namespace toxpipe::model
