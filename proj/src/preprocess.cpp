#include "toxpipe/preprocess.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <stdexcept>

namespace toxpipe {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
}

bool is_alnum(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

char ascii_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ascii_lower);
  return out;
}

bool starts_with_icase(std::string_view s, std::size_t pos, std::string_view prefix) {
  if (s.size() - pos < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i)
    if (ascii_lower(s[pos + i]) != prefix[i]) return false;
  return true;
}

std::string remove_urls(std::string_view s) {
  static constexpr std::array<std::string_view, 3> kPrefixes = {"http://", "https://", "www."};
  std::string out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    const bool hit = std::any_of(kPrefixes.begin(), kPrefixes.end(),
                                 [&](std::string_view p) { return starts_with_icase(s, i, p); });
    if (hit) {
      while (i < s.size() && !is_space(s[i])) ++i;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

std::string remove_mentions(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] == '@') {
      ++i;
      while (i < s.size() && (is_alnum(s[i]) || s[i] == '_')) ++i;
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

std::string remove_char(std::string_view s, char c) {
  std::string out;
  out.reserve(s.size());
  for (char ch : s)
    if (ch != c) out.push_back(ch);
  return out;
}

// Longest key wins at each position.
std::string substitute_emoji(std::string_view s, const WordMap& map, bool lower_values) {
  if (map.empty()) return std::string(s);
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    const WordMap::value_type* best = nullptr;
    for (const auto& entry : map) {
      const auto& key = entry.first;
      if (key.empty() || s.compare(i, key.size(), key) != 0) continue;
      if (!best || key.size() > best->first.size()) best = &entry;
    }
    if (best) {
      out.push_back(' ');
      out += lower_values ? lowercase(best->second) : best->second;
      out.push_back(' ');
      i += best->first.size();
    } else {
      out.push_back(s[i++]);
    }
  }
  return out;
}

std::string alnum_projection(std::string_view token) {
  std::string out;
  for (char c : token)
    if (is_alnum(c)) out.push_back(c);
  return out;
}

std::string strip_special_chars(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s)
    if (is_alnum(c) || is_space(c)) out.push_back(c);
  return out;
}

// `project` also matches the token once special characters are gone, so a
// second cleaning pass finds nothing left to expand.
std::string expand_tokens(std::string_view text, const WordMap& map, bool project, bool lower_values) {
  auto tokens = split_tokens(text);
  for (auto& tok : tokens) {
    auto it = map.find(tok);
    if (it == map.end() && project) it = map.find(alnum_projection(tok));
    if (it != map.end()) tok = lower_values ? lowercase(it->second) : it->second;
  }
  return join_tokens(tokens);
}

}  // namespace

CleanConfig CleanConfig::passthrough() {
  CleanConfig c;
  c.lowercase = false;
  c.strip_urls = false;
  c.strip_mentions = false;
  c.keep_hashtag_text = false;
  c.strip_special = false;
  return c;
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    const std::size_t start = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > start) tokens.emplace_back(text.substr(start, i - start));
  }
  return tokens;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string collapse_whitespace(std::string_view text) { return join_tokens(split_tokens(text)); }

std::string expand_slang(std::string_view text, const WordMap& map) {
  return expand_tokens(text, map, false, false);
}

std::string emoji_to_text(std::string_view text, const WordMap& map) {
  return collapse_whitespace(substitute_emoji(text, map, false));
}

std::string clean(std::string_view text, const CleanConfig& c) {
  const bool any_stage = c.lowercase || c.strip_urls || c.strip_mentions || c.keep_hashtag_text ||
                         c.strip_special || !c.emoji_map.empty() || !c.slang_map.empty();
  if (!any_stage) return std::string(text);

  std::string s(text);
  if (c.lowercase) s = lowercase(s);
  if (c.strip_urls) s = remove_urls(s);
  if (c.strip_mentions) s = remove_mentions(s);
  if (c.keep_hashtag_text) s = remove_char(s, '#');
  if (!c.emoji_map.empty()) s = substitute_emoji(s, c.emoji_map, c.lowercase);
  if (!c.slang_map.empty()) s = expand_tokens(s, c.slang_map, c.strip_special, c.lowercase);
  if (c.strip_special) s = strip_special_chars(s);
  return collapse_whitespace(s);
}

WordMap load_word_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open word map " + path.string());
  WordMap map;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) +
                               ": expected key<TAB>value");
    map.try_emplace(line.substr(0, tab), line.substr(tab + 1));
  }
  return map;
}

void to_json(nlohmann::json& j, const CleanConfig& c) {
  j = {{"lowercase", c.lowercase},
       {"strip_urls", c.strip_urls},
       {"strip_mentions", c.strip_mentions},
       {"keep_hashtag_text", c.keep_hashtag_text},
       {"strip_special", c.strip_special},
       {"emoji_map", c.emoji_map},
       {"slang_map", c.slang_map}};
}

void from_json(const nlohmann::json& j, CleanConfig& c) {
  j.at("lowercase").get_to(c.lowercase);
  j.at("strip_urls").get_to(c.strip_urls);
  j.at("strip_mentions").get_to(c.strip_mentions);
  j.at("keep_hashtag_text").get_to(c.keep_hashtag_text);
  j.at("strip_special").get_to(c.strip_special);
  j.at("emoji_map").get_to(c.emoji_map);
  j.at("slang_map").get_to(c.slang_map);
}

}  // namespace toxpipe
