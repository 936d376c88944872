#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "texfuse/dataset.hpp"
#include "texfuse/util.hpp"

using namespace texfuse;
namespace fs = std::filesystem;

namespace {

DatasetManifest flat_manifest(int classes, int per_class) {
  DatasetManifest m;
  for (int c = 0; c < classes; ++c) {
    m.classes.push_back("class" + std::to_string(c));
    for (int s = 0; s < per_class; ++s) m.samples.push_back({"img" + std::to_string(c * per_class + s), c});
  }
  return m;
}

std::array<int, 4> split_sizes_for_class(const DatasetManifest& m, const SplitAssignment& a, int c) {
  std::array<int, 4> sizes{};
  for (size_t i = 0; i < m.samples.size(); ++i)
    if (m.samples[i].class_index == c) ++sizes[static_cast<size_t>(a.labels[i])];
  return sizes;
}

}  // namespace

TEST_CASE("boundary rule: n=64 with paper fractions gives 38/7/13/6") {
  const DatasetManifest m = flat_manifest(3, 64);
  SplitSpec spec;
  spec.fractions = {0.6, 0.1, 0.2, 0.1};
  spec.seed = 9;
  const SplitAssignment a = split(m, spec);
  for (int c = 0; c < 3; ++c) {
    const auto sizes = split_sizes_for_class(m, a, c);
    CHECK(sizes == std::array<int, 4>{38, 7, 13, 6});
  }
}

TEST_CASE("boundary rule: n=160 gives exact multiples 96/16/32/16") {
  const DatasetManifest m = flat_manifest(2, 160);
  SplitSpec spec;
  spec.fractions = {0.6, 0.1, 0.2, 0.1};
  spec.seed = 3;
  const SplitAssignment a = split(m, spec);
  CHECK(split_sizes_for_class(m, a, 0) == std::array<int, 4>{96, 16, 32, 16});
  CHECK(split_sizes_for_class(m, a, 1) == std::array<int, 4>{96, 16, 32, 16});
}

TEST_CASE("degenerate fractions put everything in train") {
  const DatasetManifest m = flat_manifest(2, 8);
  SplitSpec spec;
  spec.fractions = {1.0, 0.0, 0.0, 0.0};
  spec.seed = 1;
  const SplitAssignment a = split(m, spec);
  for (Split s : a.labels) CHECK(s == Split::train);
}

TEST_CASE("nonzero fraction that receives zero samples errors") {
  const DatasetManifest m = flat_manifest(2, 4);
  SplitSpec spec;
  spec.fractions = {0.97, 0.01, 0.01, 0.01};
  spec.seed = 1;
  CHECK_THROWS_WITH_AS(split(m, spec), doctest::Contains("zero samples"), std::runtime_error);
}

TEST_CASE("fractions must sum to one") {
  SplitSpec spec;
  spec.fractions = {0.5, 0.1, 0.2, 0.1};
  CHECK_THROWS_AS(spec.validate(), std::runtime_error);
  spec.fractions = {0.6, 0.1, 0.2, 0.1};
  CHECK_NOTHROW(spec.validate());
  spec.fractions = {0.6, -0.1, 0.4, 0.1};
  CHECK_THROWS_AS(spec.validate(), std::runtime_error);
}

TEST_CASE("split is a stratified partition and deterministic in the seed") {
  const DatasetManifest m = flat_manifest(4, 25);
  SplitSpec spec;
  spec.fractions = {0.6, 0.1, 0.2, 0.1};
  spec.seed = 42;
  const SplitAssignment a1 = split(m, spec);
  const SplitAssignment a2 = split(m, spec);
  CHECK(a1.labels == a2.labels);  // same seed, same manifest

  spec.seed = 43;
  const SplitAssignment b = split(m, spec);
  CHECK(a1.labels != b.labels);

  // partition: each sample appears in exactly one split, sizes cover all
  CHECK(a1.labels.size() == m.samples.size());
  size_t total = 0;
  for (Split s : {Split::train, Split::validation, Split::fusion_map, Split::test})
    total += a1.indices_of(s).size();
  CHECK(total == m.samples.size());

  // stratification: n=25 boundaries 15, 18 (17.5 rounds up), 23, 25
  for (int c = 0; c < 4; ++c) CHECK(split_sizes_for_class(m, a1, c) == std::array<int, 4>{15, 3, 5, 2});
}

TEST_CASE("manifest validation") {
  DatasetManifest m = flat_manifest(2, 4);
  CHECK_NOTHROW(m.validate());
  m.samples.pop_back();
  CHECK_THROWS_WITH_AS(m.validate(), doctest::Contains("need >= 4"), std::runtime_error);
}

TEST_CASE("synthetic counts and shapes") {
  const LoadedDataset d = generate_synthetic_in_memory(2, 4, 64, 5);
  CHECK(d.images.size() == 8);
  CHECK(d.num_classes == 2);
  for (const auto& img : d.images) {
    CHECK(img.width == 64);
    CHECK(img.height == 64);
  }

  const LoadedDataset big = generate_synthetic_in_memory(8, 64, 64, 5);
  CHECK(big.images.size() == 512);
}

TEST_CASE("synthetic generation is deterministic per seed") {
  const LoadedDataset a = generate_synthetic_in_memory(3, 3, 32, 11);
  const LoadedDataset b = generate_synthetic_in_memory(3, 3, 32, 11);
  for (size_t i = 0; i < a.images.size(); ++i) CHECK(a.images[i].pixels == b.images[i].pixels);

  const LoadedDataset c = generate_synthetic_in_memory(3, 3, 32, 12);
  bool any_diff = false;
  for (size_t i = 0; i < a.images.size(); ++i) any_diff |= a.images[i].pixels != c.images[i].pixels;
  CHECK(any_diff);
}

TEST_CASE("synthetic dataset writes loadable files and manifest") {
  const fs::path dir = fs::temp_directory_path() / "texfuse_synth_test";
  fs::remove_all(dir);
  const DatasetManifest m = generate_synthetic(2, 4, 32, 7, dir);
  CHECK(m.samples.size() == 8);
  CHECK(m.classes.size() == 2);
  for (const auto& s : m.samples) CHECK(fs::exists(dir / s.path));

  // files match the in-memory generator sample for sample
  const LoadedDataset mem = generate_synthetic_in_memory(2, 4, 32, 7);
  for (size_t i = 0; i < m.samples.size(); ++i)
    CHECK(load_image(dir / m.samples[i].path).pixels == mem.images[i].pixels);
  fs::remove_all(dir);
}

TEST_CASE("manifest json round trip with split data") {
  DatasetManifest m = flat_manifest(2, 8);
  m.image_root = "images";
  m.source_width = 64;
  m.source_height = 64;
  SplitSpec spec;
  spec.fractions = {0.5, 0.25, 0.125, 0.125};
  spec.seed = 77;
  const SplitAssignment a = split(m, spec);

  const std::string text = manifest_to_json(m, &spec, &a, "deadbeef");
  SplitSpec spec2;
  SplitAssignment a2;
  const DatasetManifest m2 = manifest_from_json(text, &spec2, &a2);
  CHECK(m2.classes == m.classes);
  CHECK(m2.samples.size() == m.samples.size());
  CHECK(m2.image_root == "images");
  CHECK(spec2.seed == 77);
  CHECK(spec2.fractions == spec.fractions);
  CHECK(a2.labels == a.labels);

  // manifest without split info rejects split queries
  const std::string bare = manifest_to_json(m, nullptr, nullptr, "");
  CHECK_THROWS_WITH_AS(manifest_from_json(bare, &spec2, nullptr), doctest::Contains("split"), std::runtime_error);
}

TEST_CASE("ingest scans class directories in sorted order") {
  const fs::path root = fs::temp_directory_path() / "texfuse_ingest_test";
  fs::remove_all(root);
  GrayImage img;
  img.width = 8;
  img.height = 8;
  img.pixels.assign(64, 9);
  for (const char* cls : {"wool", "brick", "sand"})
    for (int i = 0; i < 4; ++i) save_pgm(img, root / cls / ("s" + std::to_string(i) + ".pgm"));

  const DatasetManifest m = ingest_directory(root);
  CHECK(m.classes == std::vector<std::string>{"brick", "sand", "wool"});
  CHECK(m.samples.size() == 12);
  CHECK(m.source_width == 8);

  const LoadedDataset d = load_dataset(m, root, 8);
  CHECK(d.images.size() == 12);
  fs::remove_all(root);
}
