// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "sidpmm/util.hpp"

namespace sidpmm {

struct RawDocument {
  std::string id;
  std::string text;
  std::optional<std::string> label;  // ground truth, evaluation only
};

struct TokenizerConfig {
  std::unordered_set<std::string> stopwords;  // empty = keep everything
};

// Sentinel emitted for bytes that are not valid UTF-8 (U+FFFD).
inline const std::string kBadByteToken = "\xEF\xBF\xBD";

// Lowercase, split on non-alphanumeric runs. Multi-byte UTF-8 sequences count
// as token characters and are kept verbatim; invalid bytes become a
// standalone sentinel token.
inline std::vector<std::string> tokenize(const std::string& text,
                                         const TokenizerConfig& rules = {}) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      if (rules.stopwords.empty() || !rules.stopwords.count(cur)) tokens.push_back(cur);
      cur.clear();
    }
  };
  size_t i = 0;
  const size_t n = text.size();
  while (i < n) {
    unsigned char c = text[i];
    if (c < 0x80) {
      if (std::isalnum(c)) {
        cur.push_back(static_cast<char>(std::tolower(c)));
      } else {
        flush();
      }
      ++i;
      continue;
    }
    // Multi-byte sequence: validate length and continuation bytes.
    int len = 0;
    if ((c & 0xE0) == 0xC0) len = 2;
    else if ((c & 0xF0) == 0xE0) len = 3;
    else if ((c & 0xF8) == 0xF0) len = 4;
    bool valid = len > 0 && i + len <= n;
    for (int j = 1; valid && j < len; ++j) {
      valid = (static_cast<unsigned char>(text[i + j]) & 0xC0) == 0x80;
    }
    if (valid) {
      cur.append(text, i, len);
      i += len;
    } else {
      flush();
      tokens.push_back(kBadByteToken);
      ++i;
    }
  }
  flush();
  return tokens;
}

enum class CorpusFormat { kLines, kJsonLines };

inline CorpusFormat parse_corpus_format(const std::string& s) {
  if (s == "lines") return CorpusFormat::kLines;
  if (s == "json-lines" || s == "jsonl") return CorpusFormat::kJsonLines;
  throw std::invalid_argument("unknown corpus format: " + s);
}

// lines format: "label<TAB>text" or bare "text"; json-lines: {id,label,text}.
inline std::vector<RawDocument> load_corpus(const std::string& path, CorpusFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open corpus file: " + path);
  std::vector<RawDocument> docs;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    RawDocument doc;
    if (format == CorpusFormat::kLines) {
      if (line.empty())
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": empty record");
      size_t tab = line.find('\t');
      if (tab == std::string::npos) {
        doc.text = line;
      } else {
        doc.label = line.substr(0, tab);
        doc.text = line.substr(tab + 1);
        if (doc.text.empty())
          throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing text field");
      }
      doc.id = std::to_string(lineno);
    } else {
      nlohmann::json rec;
      try {
        rec = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
      }
      if (!rec.contains("text") || !rec["text"].is_string())
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": missing text field");
      doc.text = rec["text"].get<std::string>();
      if (rec.contains("id")) {
        doc.id = rec["id"].is_string() ? rec["id"].get<std::string>() : rec["id"].dump();
      } else {
        doc.id = std::to_string(lineno);
      }
      if (rec.contains("label") && !rec["label"].is_null()) {
        doc.label = rec["label"].is_string() ? rec["label"].get<std::string>() : rec["label"].dump();
      }
    }
    docs.push_back(std::move(doc));
  }
  if (docs.empty()) throw std::runtime_error("empty corpus file: " + path);
  return docs;
}

class Vocabulary {
 public:
  // Top max_size terms by corpus frequency, ties broken lexicographically.
  static Vocabulary build(const std::vector<std::vector<std::string>>& docs, size_t max_size) {
    if (max_size < 1) throw std::invalid_argument("build_vocabulary: max_size must be >= 1");
    std::unordered_map<std::string, int64_t> freq;
    for (const auto& toks : docs)
      for (const auto& t : toks) ++freq[t];
    if (freq.empty()) throw std::runtime_error("build_vocabulary: corpus has no tokens");
    std::vector<std::pair<std::string, int64_t>> terms(freq.begin(), freq.end());
    std::sort(terms.begin(), terms.end(), [](const auto& a, const auto& b) {
      if (a.second != b.second) return a.second > b.second;
      return a.first < b.first;
    });
    if (terms.size() > max_size) terms.resize(max_size);
    Vocabulary v;
    v.terms_.reserve(terms.size());
    v.freq_.reserve(terms.size());
    for (const auto& [term, f] : terms) {
      v.index_.emplace(term, static_cast<int>(v.terms_.size()));
      v.terms_.push_back(term);
      v.freq_.push_back(f);
    }
    return v;
  }

  int size() const { return static_cast<int>(terms_.size()); }

  std::optional<int> index_of(const std::string& term) const {
    auto it = index_.find(term);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& term_of(int i) const { return terms_.at(i); }
  int64_t frequency(int i) const { return freq_.at(i); }
  int64_t total_tokens() const {
    int64_t s = 0;
    for (int64_t f : freq_) s += f;
    return s;
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
    for (int i = 0; i < size(); ++i) out << terms_[i] << '\t' << freq_[i] << '\n';
  }

  static Vocabulary load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read vocabulary: " + path);
    Vocabulary v;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      size_t tab = line.find('\t');
      if (tab == std::string::npos) throw std::runtime_error("bad vocabulary line: " + line);
      v.index_.emplace(line.substr(0, tab), static_cast<int>(v.terms_.size()));
      v.terms_.push_back(line.substr(0, tab));
      v.freq_.push_back(std::stoll(line.substr(tab + 1)));
    }
    if (v.terms_.empty()) throw std::runtime_error("empty vocabulary file: " + path);
    return v;
  }

 private:
  std::unordered_map<std::string, int> index_;
  std::vector<std::string> terms_;
  std::vector<int64_t> freq_;
};

// Sparse term counts for one document, sorted by term index.
struct DocCounts {
  std::vector<std::pair<int, int64_t>> counts;
  int64_t total = 0;
};

// Out-of-vocabulary tokens are dropped.
inline DocCounts vectorize(const std::vector<std::string>& tokens, const Vocabulary& vocab) {
  std::unordered_map<int, int64_t> acc;
  for (const auto& t : tokens) {
    if (auto idx = vocab.index_of(t)) ++acc[*idx];
  }
  DocCounts out;
  out.counts.assign(acc.begin(), acc.end());
  std::sort(out.counts.begin(), out.counts.end());
  for (const auto& [t, c] : out.counts) out.total += c;
  return out;
}

// Everything the sampler needs for one document.
struct Document {
  DocCounts counts;
  Eigen::VectorXd word_embedding;  // e_i, empty if the channel is off
  Eigen::VectorXd seq_embedding;   // s_i, empty if the channel is off
};

}  // namespace sidpmm
