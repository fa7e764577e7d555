#include "support/fixtures.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "support/gradient_oracle.hpp"

namespace flew::testing {

namespace fs = std::filesystem;

TempDir::TempDir(const std::string& tag) {
  static std::uint64_t counter = 0;
  Rng rng(combine_keys(static_cast<std::uint64_t>(std::hash<std::string>{}(tag)),
                       static_cast<std::uint64_t>(reinterpret_cast<std::uintptr_t>(this)) + ++counter));
  path_ = fs::temp_directory_path() / ("flew-" + tag + "-" + std::to_string(rng.next() % 1000000007ULL));
  fs::remove_all(path_);
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

void write_file(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string random_text(Rng& rng, std::size_t vocab, std::size_t words) {
  std::string out;
  for (std::size_t i = 0; i < words; ++i) {
    if (i) out += ' ';
    out += "w" + std::to_string(rng.uniform_index(vocab));
  }
  return out;
}

TripletFeatures random_active_triplet(Rng& rng, const EncoderParams& params, double margin,
                                      double min_loss) {
  for (int attempt = 0; attempt < 10000; ++attempt) {
    TripletFeatures f{featurize(random_text(rng, 40, 1 + rng.uniform_index(6)), params.buckets),
                      featurize(random_text(rng, 40, 1 + rng.uniform_index(6)), params.buckets),
                      featurize(random_text(rng, 40, 1 + rng.uniform_index(6)), params.buckets)};
    const auto q = encode_features(params, f.query);
    const auto p = encode_features(params, f.positive);
    const auto n = encode_features(params, f.negative);
    const double dp = l2_distance(q, p);
    const double dn = l2_distance(q, n);
    if (dp < 1e-3 || dn < 1e-3) continue;
    if (reference::triplet_loss_forward(params.weights, params.dim, params.buckets, f, margin) < min_loss) {
      continue;
    }
    return f;
  }
  throw std::runtime_error("could not draw an active triplet");
}

}  // namespace flew::testing
