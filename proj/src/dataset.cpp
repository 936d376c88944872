#include "texfuse/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "texfuse/util.hpp"

namespace texfuse {

void DatasetManifest::validate() const {
  if (classes.empty()) throw std::runtime_error("manifest: no classes");
  std::vector<int> sizes(classes.size(), 0);
  for (const auto& s : samples) {
    if (s.class_index < 0 || s.class_index >= static_cast<int>(classes.size()))
      throw std::runtime_error("manifest: class index out of range for " + s.path);
    ++sizes[s.class_index];
  }
  for (size_t c = 0; c < sizes.size(); ++c) {
    if (sizes[c] < 4)
      throw std::runtime_error("manifest: class '" + classes[c] + "' has " + std::to_string(sizes[c]) +
                               " samples, need >= 4");
  }
}

std::vector<int> DatasetManifest::class_sizes() const {
  std::vector<int> sizes(classes.size(), 0);
  for (const auto& s : samples) ++sizes[s.class_index];
  return sizes;
}

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::validation: return "validation";
    case Split::fusion_map: return "fusion-map";
    case Split::test: return "test";
  }
  return "?";
}

Split split_from_name(const std::string& name) {
  for (Split s : {Split::train, Split::validation, Split::fusion_map, Split::test})
    if (name == split_name(s)) return s;
  throw std::runtime_error("unknown split label: " + name);
}

void SplitSpec::validate() const {
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) throw std::runtime_error("split fractions must be non-negative");
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::runtime_error("split fractions must sum to 1");
}

std::vector<size_t> SplitAssignment::indices_of(Split s) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < labels.size(); ++i)
    if (labels[i] == s) out.push_back(i);
  return out;
}

namespace {

// The 1e-9 guard keeps accumulated fraction error from flipping an exact
// .5 boundary downward (e.g. 25 * 0.9 evaluating to 22.499999999999996).
inline int round_half_up(double x) { return static_cast<int>(std::floor(x + 0.5 + 1e-9)); }

// Fisher-Yates with a modulo draw: exactly reproducible on every platform.
void shuffle_indices(std::vector<size_t>& idx, std::mt19937_64& gen) {
  for (size_t i = idx.size(); i > 1; --i) {
    size_t j = gen() % i;
    std::swap(idx[i - 1], idx[j]);
  }
}

}  // namespace

SplitAssignment split_labels(const std::vector<int>& labels, int num_classes, const SplitSpec& spec) {
  spec.validate();
  SplitAssignment out;
  out.labels.assign(labels.size(), Split::train);

  for (int c = 0; c < num_classes; ++c) {
    std::vector<size_t> members;
    for (size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) members.push_back(i);

    std::mt19937_64 gen(mix_seed(spec.seed, static_cast<uint64_t>(c)));
    shuffle_indices(members, gen);

    const int n = static_cast<int>(members.size());
    double cum = 0.0;
    int prev = 0;
    for (int k = 0; k < 4; ++k) {
      cum += spec.fractions[k];
      const int bound = (k == 3) ? n : round_half_up(n * cum);
      if (spec.fractions[k] > 0.0 && bound - prev < 1)
        throw std::runtime_error(std::string("split: nonzero '") + split_name(static_cast<Split>(k)) +
                                 "' fraction receives zero samples in class " + std::to_string(c));
      for (int i = prev; i < bound; ++i) out.labels[members[i]] = static_cast<Split>(k);
      prev = bound;
    }
  }
  return out;
}

SplitAssignment split(const DatasetManifest& manifest, const SplitSpec& spec) {
  manifest.validate();
  std::vector<int> labels(manifest.samples.size());
  for (size_t i = 0; i < manifest.samples.size(); ++i) labels[i] = manifest.samples[i].class_index;
  return split_labels(labels, static_cast<int>(manifest.classes.size()), spec);
}

DatasetManifest ingest_directory(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw std::runtime_error("dataset root not found: " + root.string());

  DatasetManifest m;
  std::vector<fs::path> class_dirs;
  for (const auto& e : fs::directory_iterator(root))
    if (e.is_directory()) class_dirs.push_back(e.path());
  std::sort(class_dirs.begin(), class_dirs.end());

  for (const auto& dir : class_dirs) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir)) {
      if (!e.is_regular_file()) continue;
      auto ext = e.path().extension().string();
      if (ext == ".pgm" || ext == ".png") files.push_back(e.path());
    }
    if (files.empty()) continue;
    std::sort(files.begin(), files.end());
    const int ci = static_cast<int>(m.classes.size());
    m.classes.push_back(dir.filename().string());
    for (const auto& f : files)
      m.samples.push_back({fs::relative(f, root).generic_string(), ci});
  }
  if (m.classes.empty()) throw std::runtime_error("dataset root has no class directories with images: " + root.string());

  GrayImage first = load_image(root / m.samples.front().path);
  m.source_width = first.width;
  m.source_height = first.height;
  return m;
}

namespace {

// ---- synthetic texture families ------------------------------------------
//
// family 0: sinusoidal grating, class-specific wavelength and orientation
// family 1: checkerboard, class-specific period and orientation
// family 2: correlated noise, class-specific autocorrelation length
//
// Jitter makes samples of one class vary enough that few-shot training is
// measurably worse than full training while the classes stay separable.

constexpr double kPi = 3.14159265358979323846;
constexpr double kNoiseSigma = 16.0;   // additive pixel noise, families 0/1
constexpr double kRotJitterDeg = 6.0;  // continuous per-sample rotation
constexpr double kScaleJitter = 0.10;  // relative wavelength/period jitter
// Samples occasionally come from a rotated pose mode, the way Brodatz mixes
// unique patches with rotated/scaled variations. Small training slices tend
// to miss whole modes; the full training fraction covers them.
constexpr double kPoseModeDeg = 15.0;
constexpr double kPoseModeProb = 0.15;  // each of the two rotated modes

double clamp255(double v) { return v < 0.0 ? 0.0 : (v > 255.0 ? 255.0 : v); }

// per-sample photometric jitter: v -> gain * (v - 128) + 128 + offset
struct Photometric {
  double gain;
  double offset;
  double apply(double v) const { return gain * (v - 128.0) + 128.0 + offset; }
};

Photometric photometric_jitter(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  return {0.7 + 0.4 * unit(gen), (unit(gen) * 2.0 - 1.0) * 16.0};
}

GrayImage synth_sample(int class_index, int sample_index, int size, uint64_t seed) {
  const int family = class_index % 3;
  const int variant = class_index / 3;
  std::mt19937_64 gen(mix_seed(seed, static_cast<uint64_t>(class_index) * 1000003ull + sample_index));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  GrayImage img;
  img.width = size;
  img.height = size;
  img.pixels.resize(static_cast<size_t>(size) * size);

  const double cx = (size - 1) / 2.0;
  const double mode_draw = unit(gen);
  const double pose_mode = mode_draw < kPoseModeProb ? -1.0 : (mode_draw < 2.0 * kPoseModeProb ? 1.0 : 0.0);
  const double rot = (pose_mode * kPoseModeDeg + (unit(gen) * 2.0 - 1.0) * kRotJitterDeg) * kPi / 180.0;
  const double scale_jitter = (unit(gen) * 2.0 - 1.0) * kScaleJitter;
  const double cr = std::cos(rot), sr = std::sin(rot);

  const Photometric photo = photometric_jitter(gen);
  if (family == 0) {
    const double base_wave = 6.0 + 2.0 * variant;
    const double theta = (25.0 + 35.0 * variant) * kPi / 180.0;
    const double wave = base_wave * (1.0 + scale_jitter);
    const double phase = unit(gen) * 2.0 * kPi;
    const double amp = 35.0 + unit(gen) * 25.0;
    const double kx = std::cos(theta), ky = std::sin(theta);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double xr = cr * (x - cx) - sr * (y - cx);
        const double yr = sr * (x - cx) + cr * (y - cx);
        const double v = photo.apply(127.5 + amp * std::sin(2.0 * kPi * (kx * xr + ky * yr) / wave + phase)) +
                         gauss(gen) * kNoiseSigma;
        img.at(y, x) = static_cast<uint8_t>(clamp255(std::floor(v + 0.5)));
      }
  } else if (family == 1) {
    const double base_period = 5.0 + 2.0 * variant;
    const double theta0 = (10.0 + 25.0 * variant) * kPi / 180.0;
    const double period = base_period * (1.0 + scale_jitter);
    const double ox = unit(gen) * period, oy = unit(gen) * period;
    const double amp = 40.0 + unit(gen) * 25.0;
    const double ct = std::cos(theta0 + rot), st = std::sin(theta0 + rot);
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double xr = ct * (x - cx) - st * (y - cx) + ox;
        const double yr = st * (x - cx) + ct * (y - cx) + oy;
        const long long parity =
            (static_cast<long long>(std::floor(xr / period)) + static_cast<long long>(std::floor(yr / period))) & 1;
        const double v = photo.apply(127.5 + (parity ? amp : -amp)) + gauss(gen) * kNoiseSigma;
        img.at(y, x) = static_cast<uint8_t>(clamp255(std::floor(v + 0.5)));
      }
  } else {
    // Correlated noise: white field smoothed by two box-blur passes of
    // class-specific radius, then restandardized.
    const int radius = 1 + variant;
    const int pad = 2 * radius + 2;
    const int fsize = size + 2 * pad;
    std::vector<double> field(static_cast<size_t>(fsize) * fsize);
    for (double& f : field) f = gauss(gen);

    std::vector<double> tmp(field.size());
    for (int pass = 0; pass < 2; ++pass) {
      // horizontal then vertical box blur
      for (int y = 0; y < fsize; ++y)
        for (int x = 0; x < fsize; ++x) {
          double s = 0.0;
          int cnt = 0;
          for (int k = -radius; k <= radius; ++k) {
            const int xx = x + k;
            if (xx >= 0 && xx < fsize) { s += field[static_cast<size_t>(y) * fsize + xx]; ++cnt; }
          }
          tmp[static_cast<size_t>(y) * fsize + x] = s / cnt;
        }
      for (int y = 0; y < fsize; ++y)
        for (int x = 0; x < fsize; ++x) {
          double s = 0.0;
          int cnt = 0;
          for (int k = -radius; k <= radius; ++k) {
            const int yy = y + k;
            if (yy >= 0 && yy < fsize) { s += tmp[static_cast<size_t>(yy) * fsize + x]; ++cnt; }
          }
          field[static_cast<size_t>(y) * fsize + x] = s / cnt;
        }
    }

    double mean = 0.0;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) mean += field[static_cast<size_t>(y + pad) * fsize + (x + pad)];
    mean /= size * static_cast<double>(size);
    double var = 0.0;
    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double d = field[static_cast<size_t>(y + pad) * fsize + (x + pad)] - mean;
        var += d * d;
      }
    const double sd = std::sqrt(var / (size * static_cast<double>(size))) + 1e-12;

    for (int y = 0; y < size; ++y)
      for (int x = 0; x < size; ++x) {
        const double z = (field[static_cast<size_t>(y + pad) * fsize + (x + pad)] - mean) / sd;
        const double v = photo.apply(128.0 + 40.0 * z);
        img.at(y, x) = static_cast<uint8_t>(clamp255(std::floor(v + 0.5)));
      }
  }
  return img;
}

std::string class_dir_name(int class_index) {
  static const char* families[3] = {"grating", "checker", "noise"};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%02d_%s%d", class_index, families[class_index % 3], class_index / 3);
  return buf;
}

}  // namespace

DatasetManifest generate_synthetic(int classes, int samples_per_class, int size, uint64_t seed,
                                   const std::filesystem::path& out_dir) {
  if (classes < 2) throw std::runtime_error("synthetic dataset needs >= 2 classes");
  DatasetManifest m;
  m.source_width = size;
  m.source_height = size;
  for (int c = 0; c < classes; ++c) {
    const std::string cname = class_dir_name(c);
    m.classes.push_back(cname);
    for (int s = 0; s < samples_per_class; ++s) {
      GrayImage img = synth_sample(c, s, size, seed);
      char fname[32];
      std::snprintf(fname, sizeof fname, "sample_%04d.pgm", s);
      const std::string rel = cname + "/" + fname;
      save_pgm(img, out_dir / rel);
      m.samples.push_back({rel, c});
    }
  }
  return m;
}

LoadedDataset generate_synthetic_in_memory(int classes, int samples_per_class, int size, uint64_t seed) {
  if (classes < 2) throw std::runtime_error("synthetic dataset needs >= 2 classes");
  LoadedDataset d;
  d.num_classes = classes;
  for (int c = 0; c < classes; ++c) {
    d.class_names.push_back(class_dir_name(c));
    for (int s = 0; s < samples_per_class; ++s) {
      d.images.push_back(synth_sample(c, s, size, seed));
      d.labels.push_back(c);
    }
  }
  return d;
}

LoadedDataset load_dataset(const DatasetManifest& manifest, const std::filesystem::path& manifest_dir,
                           int input_size) {
  LoadedDataset d;
  d.class_names = manifest.classes;
  d.num_classes = static_cast<int>(manifest.classes.size());
  d.images.reserve(manifest.samples.size());
  d.labels.reserve(manifest.samples.size());
  const std::filesystem::path base = manifest_dir / manifest.image_root;
  for (const auto& s : manifest.samples) {
    d.images.push_back(resize_to(load_image(base / s.path), input_size));
    d.labels.push_back(s.class_index);
  }
  return d;
}

std::string manifest_to_json(const DatasetManifest& m, const SplitSpec* spec, const SplitAssignment* assignment,
                             const std::string& config_hash) {
  nlohmann::json j;
  j["classes"] = m.classes;
  auto& samples = j["samples"] = nlohmann::json::array();
  for (const auto& s : m.samples) samples.push_back({{"path", s.path}, {"class", s.class_index}});
  j["image_root"] = m.image_root;
  j["source_width"] = m.source_width;
  j["source_height"] = m.source_height;
  if (spec) {
    j["seed"] = spec->seed;
    j["fractions"] = spec->fractions;
    j["generator"] = "mt19937_64";
  }
  if (assignment) {
    auto& a = j["assignment"] = nlohmann::json::array();
    for (Split s : assignment->labels) a.push_back(split_name(s));
  }
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  return j.dump(2) + "\n";
}

DatasetManifest manifest_from_json(const std::string& text, SplitSpec* spec_out, SplitAssignment* assignment_out) {
  nlohmann::json j = nlohmann::json::parse(text);
  DatasetManifest m;
  m.classes = j.at("classes").get<std::vector<std::string>>();
  for (const auto& s : j.at("samples")) m.samples.push_back({s.at("path").get<std::string>(), s.at("class").get<int>()});
  m.image_root = j.value("image_root", ".");
  m.source_width = j.value("source_width", 0);
  m.source_height = j.value("source_height", 0);
  if (spec_out) {
    if (!j.contains("seed") || !j.contains("fractions"))
      throw std::runtime_error("manifest has no split information (run the split stage first)");
    spec_out->seed = j.at("seed").get<uint64_t>();
    auto f = j.at("fractions").get<std::vector<double>>();
    if (f.size() != 4) throw std::runtime_error("manifest fractions must have 4 entries");
    std::copy(f.begin(), f.end(), spec_out->fractions.begin());
  }
  if (assignment_out) {
    if (!j.contains("assignment"))
      throw std::runtime_error("manifest has no assignment (run the split stage first)");
    assignment_out->labels.clear();
    for (const auto& s : j.at("assignment")) assignment_out->labels.push_back(split_from_name(s.get<std::string>()));
    if (assignment_out->labels.size() != m.samples.size())
      throw std::runtime_error("manifest assignment length mismatch");
  }
  return m;
}

}  // namespace texfuse
