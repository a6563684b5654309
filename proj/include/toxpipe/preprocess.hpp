#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace toxpipe {

// Ordered so that serialized configs (and checkpoints) are byte-stable.
using WordMap = std::map<std::string, std::string>;

struct CleanConfig {
  bool lowercase = true;
  bool strip_urls = true;
  bool strip_mentions = true;
  bool keep_hashtag_text = true;
  WordMap emoji_map;
  WordMap slang_map;
  bool strip_special = true;

  // All stages off, empty maps: clean() is the identity.
  static CleanConfig passthrough();
};

void to_json(nlohmann::json& j, const CleanConfig& c);
void from_json(const nlohmann::json& j, CleanConfig& c);

// Stages, in order: lowercase, URL removal, @mention removal, hashtag marker
// removal, emoji substitution, slang expansion, special-character stripping,
// whitespace collapse. Disabled stages are skipped; the final collapse
// always runs unless every other stage is disabled.
std::string clean(std::string_view text, const CleanConfig& config);

// Whole-token replacement on whitespace-separated tokens.
std::string expand_slang(std::string_view text, const WordMap& map);

// Replaces every mapped emoji by " word ", then collapses whitespace.
std::string emoji_to_text(std::string_view text, const WordMap& map);

std::string collapse_whitespace(std::string_view text);
std::vector<std::string> split_tokens(std::string_view text);
std::string join_tokens(const std::vector<std::string>& tokens);

// `key<TAB>value` per line; '#'-prefixed lines and blank lines are skipped.
WordMap load_word_map(const std::filesystem::path& path);

}  // namespace toxpipe
