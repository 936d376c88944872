#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "texfuse/image.hpp"

namespace texfuse {

struct DatasetManifest {
  std::vector<std::string> classes;
  struct Sample {
    std::string path;  // relative to image_root
    int class_index = 0;
  };
  std::vector<Sample> samples;
  // Resolved against the manifest's directory when relative.
  std::string image_root = ".";
  int source_width = 0;
  int source_height = 0;

  /// Class indices contiguous from 0, every class with >= 4 samples.
  void validate() const;
  std::vector<int> class_sizes() const;
};

enum class Split : uint8_t { train = 0, validation = 1, fusion_map = 2, test = 3 };

const char* split_name(Split s);
Split split_from_name(const std::string& name);

struct SplitSpec {
  // (train, validation, fusion-map, test); must sum to 1 within 1e-9.
  std::array<double, 4> fractions{0.6, 0.1, 0.2, 0.1};
  uint64_t seed = 0;

  void validate() const;
};

struct SplitAssignment {
  std::vector<Split> labels;  // aligned with manifest.samples

  std::vector<size_t> indices_of(Split s) const;
};

/// Stratified 4-way split. Within each class the sample order is shuffled by
/// a Fisher-Yates pass driven by mt19937_64 (seeded from spec.seed and the
/// class index), then cut at boundaries b_k = round_half_up(n * cum_frac_k).
/// Errors if any nonzero fraction receives zero samples in some class.
SplitAssignment split(const DatasetManifest& manifest, const SplitSpec& spec);

/// Same boundary rule on a bare label sequence; `split` delegates here.
SplitAssignment split_labels(const std::vector<int>& labels, int num_classes, const SplitSpec& spec);

/// Scans root/<class_name>/*.pgm|*.png into a manifest. Class names are the
/// directory names in lexicographic order.
DatasetManifest ingest_directory(const std::filesystem::path& root);

/// Procedural texture families with distinct second-order statistics:
/// class c uses family c % 3 (sinusoidal grating / checkerboard / correlated
/// noise) at strength c / 3, each sample perturbed by seeded jitter (phase,
/// small rotation, additive noise). Writes PGMs under out_dir/<class>/ and
/// returns the manifest. Same seed => byte-identical images.
DatasetManifest generate_synthetic(int classes, int samples_per_class, int size, uint64_t seed,
                                   const std::filesystem::path& out_dir);

/// In-memory variant used by the experiment drivers; no files are written.
struct LoadedDataset {
  std::vector<GrayImage> images;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  int num_classes = 0;
};
LoadedDataset generate_synthetic_in_memory(int classes, int samples_per_class, int size, uint64_t seed);

/// Loads every manifest sample, resizing to input_size x input_size.
LoadedDataset load_dataset(const DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
                           int input_size);

// Manifest JSON: classes, samples [{path, class}], and after splitting also
// seed, fractions, assignment, generator. config_hash is embedded when given.
std::string manifest_to_json(const DatasetManifest& m, const SplitSpec* spec, const SplitAssignment* assignment,
                             const std::string& config_hash);
DatasetManifest manifest_from_json(const std::string& text, SplitSpec* spec_out, SplitAssignment* assignment_out);

}  // namespace texfuse
