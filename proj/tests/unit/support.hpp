#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "vc/compute/graph.hpp"
#include "vc/data/dataset.hpp"
#include "vc/model.hpp"

namespace vc::test {

inline compute::Vector vec(std::initializer_list<double> v) {
  compute::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index k = 0;
  for (double x : v) out[k++] = x;
  return out;
}

inline std::vector<double> to_std(const compute::Vector& v) { return {v.data(), v.data() + v.size()}; }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("vc_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Scene with `n` regions laid out left to right; visual features random.
inline data::Scene toy_scene(std::int64_t id, std::size_t n, std::size_t visual_dim, Rng& rng) {
  data::Scene s;
  s.id = id;
  s.width = 100;
  s.height = 100;
  for (std::size_t k = 0; k < n; ++k) {
    data::Region r;
    r.id = static_cast<std::int64_t>(k);
    const double x = 2.0 + 12.0 * static_cast<double>(k);
    r.box = {x, 10.0 + static_cast<double>(k), x + 10.0, 30.0 + 2.0 * static_cast<double>(k)};
    r.category = k % 2 == 0 ? "ball" : "cube";
    r.feature.visual.resize(visual_dim);
    for (auto& v : r.feature.visual) v = rng.uniform(-1.0, 1.0);
    s.regions.push_back(r);
  }
  data::finalize_features(s, true);
  return s;
}

inline ModelConfig tiny_config(std::size_t region_dim) {
  ModelConfig cfg;
  cfg.encoder.embed_dim = 6;
  cfg.encoder.hidden = 4;
  cfg.region_dim = region_dim;
  cfg.decoder_hidden = 8;
  cfg.gen_min_count = 1;
  return cfg;
}

}  // namespace vc::test
