#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace vc::language {

// Word <-> id table. Ids 0..3 are reserved for pad, unk, start and stop.
class Vocabulary {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;
  static constexpr std::size_t kStart = 2;
  static constexpr std::size_t kStop = 3;
  static constexpr std::size_t kReserved = 4;

  Vocabulary();

  // Keeps words seen at least `min_count` times, in lexicographic order.
  static Vocabulary build(std::span<const std::vector<std::string>> sentences, std::size_t min_count);
  // Words in id order, reserved entries included.
  static Vocabulary from_words(std::vector<std::string> words);

  std::size_t id(const std::string& word) const;  // kUnk when absent
  bool contains(const std::string& word) const { return index_.count(word) > 0; }
  const std::string& word(std::size_t id) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // Maps words to ids, truncating to `max_len` and padding up to `pad_to`.
  std::vector<std::size_t> encode(std::span<const std::string> tokens, std::size_t max_len, std::size_t pad_to = 0) const;
  std::vector<std::string> decode(std::span<const std::size_t> ids) const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.words_ == b.words_; }

 private:
  struct Empty {};
  explicit Vocabulary(Empty) {}

  std::vector<std::string> words_;
  std::map<std::string, std::size_t> index_;
};

// Sidecar text format: "[comprehension]" / "[generation]" sections, one word
// per line in id order.
void save_vocabularies(const std::filesystem::path& path, const Vocabulary& comprehension, const Vocabulary& generation);
std::pair<Vocabulary, Vocabulary> load_vocabularies(const std::filesystem::path& path);

}  // namespace vc::language
