#pragma once

// Shared generators and fixtures for the test suites.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace parcorp::testing {

inline std::string encode_utf8(char32_t cp) {
  std::string out;
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
  return out;
}

// Random text drawn from a pool that exercises whitespace, control and
// format characters, combining marks, typographic quotes and astral code
// points.
inline std::string random_unicode(std::mt19937_64& rng, std::size_t max_len = 40) {
  static const std::vector<char32_t> pool = {
      U'a', U'B', U'e', U'z', U'\'', U'.', U' ', U' ', U'\t', U'\n', U'\r',
      0x00A0, 0x2003, 0x3000, 0x0001, 0x001F, 0x007F, 0x0085, 0x200B, 0x200D,
      0xFEFF, 0x0301, 0x0308, 0x0327, 0x00E9, 0x00C5, 0x212B, 0x2018, 0x2019,
      0x201C, 0x201D, 0x02BC, 0x4E2D, 0x1F600, 0x1E9E, 0x03A3, 0x0130};
  std::uniform_int_distribution<std::size_t> len_dist(0, max_len);
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::string out;
  const std::size_t n = len_dist(rng);
  for (std::size_t i = 0; i < n; ++i) out += encode_utf8(pool[pick(rng)]);
  return out;
}

inline std::string random_word(std::mt19937_64& rng, std::size_t vocab = 10) {
  static const std::vector<std::string> words = {
      "the", "cat", "sat", "on", "mat", "inni", "ba'e", "bishaan", "dhufe", "mana",
      "Adurree", "Ani", "gaarii", "dog", "ran", "away"};
  std::uniform_int_distribution<std::size_t> pick(0, std::min(vocab, words.size()) - 1);
  return words[pick(rng)];
}

// Self-removing temporary directory.
class TempDir {
 public:
  TempDir() {
    static std::mt19937_64 rng{std::random_device{}()};
    path_ = std::filesystem::temp_directory_path() /
            ("parcorp-test-" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace parcorp::testing
