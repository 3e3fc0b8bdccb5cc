#include "vc/language/vocabulary.hpp"

#include <algorithm>
#include <fstream>

#include "vc/errors.hpp"

namespace vc::language {

namespace {
const std::vector<std::string> kReservedWords{"<pad>", "<unk>", "<s>", "</s>"};
}

Vocabulary::Vocabulary() : Vocabulary(from_words(kReservedWords)) {}

Vocabulary Vocabulary::from_words(std::vector<std::string> words) {
  if (words.size() < kReserved || !std::equal(kReservedWords.begin(), kReservedWords.end(), words.begin()))
    throw ValidationError("vocabulary must start with the reserved words <pad> <unk> <s> </s>");
  Vocabulary v{Empty{}};
  v.words_ = std::move(words);
  for (std::size_t i = 0; i < v.words_.size(); ++i)
    if (!v.index_.emplace(v.words_[i], i).second) throw ValidationError("duplicate vocabulary word '" + v.words_[i] + "'");
  return v;
}

Vocabulary Vocabulary::build(std::span<const std::vector<std::string>> sentences, std::size_t min_count) {
  std::map<std::string, std::size_t> counts;
  for (const auto& s : sentences)
    for (const auto& w : s) ++counts[w];
  std::vector<std::string> words(kReservedWords);
  for (const auto& [w, n] : counts)
    if (n >= min_count && std::find(kReservedWords.begin(), kReservedWords.end(), w) == kReservedWords.end())
      words.push_back(w);
  return from_words(std::move(words));
}

std::size_t Vocabulary::id(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

const std::string& Vocabulary::word(std::size_t id) const {
  if (id >= words_.size()) throw DomainError("word id " + std::to_string(id) + " outside vocabulary");
  return words_[id];
}

std::vector<std::size_t> Vocabulary::encode(std::span<const std::string> tokens, std::size_t max_len,
                                            std::size_t pad_to) const {
  std::vector<std::size_t> ids;
  for (const auto& t : tokens) {
    if (ids.size() >= max_len) break;
    ids.push_back(id(t));
  }
  while (ids.size() < pad_to) ids.push_back(kPad);
  return ids;
}

std::vector<std::string> Vocabulary::decode(std::span<const std::size_t> ids) const {
  std::vector<std::string> out;
  for (auto i : ids) out.push_back(word(i));
  return out;
}

void save_vocabularies(const std::filesystem::path& path, const Vocabulary& comprehension, const Vocabulary& generation) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "[comprehension]\n";
  for (const auto& w : comprehension.words()) out << w << '\n';
  out << "[generation]\n";
  for (const auto& w : generation.words()) out << w << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

std::pair<Vocabulary, Vocabulary> load_vocabularies(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> comp, gen;
  std::vector<std::string>* cur = nullptr;
  for (std::string line; std::getline(in, line);) {
    if (line == "[comprehension]") cur = &comp;
    else if (line == "[generation]") cur = &gen;
    else if (!line.empty()) {
      if (!cur) throw ValidationError(path.string() + ": word before section header");
      cur->push_back(line);
    }
  }
  return {Vocabulary::from_words(std::move(comp)), Vocabulary::from_words(std::move(gen))};
}

}  // namespace vc::language
