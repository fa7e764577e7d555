#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "flew/corpus.hpp"
#include "flew/encoder.hpp"
#include "flew/rng.hpp"

namespace flew::testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// Space-separated words "w<k>" drawn from a vocabulary of `vocab` words.
std::string random_text(Rng& rng, std::size_t vocab, std::size_t words);

/// Random triplet whose loss under `params` is active by at least `min_loss`
/// and whose distances are bounded away from zero.
TripletFeatures random_active_triplet(Rng& rng, const EncoderParams& params, double margin,
                                      double min_loss = 1e-3);

}  // namespace flew::testing
