#pragma once

// Paired (motion-corrupted reconstruction, clean reconstruction) dataset generation.
//
// Layout under out_dir:
//   manifest.jsonl                 one JSON record per pair, sorted by id
//   sources/src00000.mrt           motion-free source image (real64, H x W)
//   targets/src00000.mrt           |CG SENSE of still acquisition| / peak
//   corrupted/<id>.mrt             |CG SENSE of moving acquisition| / peak, clipped to [0, 1]
// All paths inside the manifest are relative to out_dir.

#include "cgsense.hpp"
#include "coils.hpp"
#include "metrics.hpp"
#include "motion.hpp"
#include "png.hpp"
#include "random.hpp"
#include "tensor_io.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

namespace mocosim {

inline constexpr double kTrainFraction = 0.7;

struct SourceImage
{
  std::string name;
  RealImage image;
};

struct ManifestRecord
{
  std::string id;
  std::string source_path;
  double degree = 0.0;
  std::size_t shots = 0;
  std::size_t coils = 0;
  std::string split; // "train" | "test"
  std::string corrupted_path;
  std::string target_path;
  std::uint64_t seed = 0;
  double normalization_peak = 1.0;

  bool operator==(ManifestRecord const &) const = default;
};

inline nlohmann::ordered_json to_json(ManifestRecord const &r)
{
  return {
    {"id", r.id},
    {"source_path", r.source_path},
    {"degree", r.degree},
    {"shots", r.shots},
    {"coils", r.coils},
    {"split", r.split},
    {"corrupted_path", r.corrupted_path},
    {"target_path", r.target_path},
    {"seed", r.seed},
    {"normalization_peak", r.normalization_peak},
  };
}

inline ManifestRecord record_from_json(nlohmann::json const &j)
{
  ManifestRecord r;
  r.id = j.at("id").get<std::string>();
  r.source_path = j.at("source_path").get<std::string>();
  r.degree = j.at("degree").get<double>();
  r.shots = j.at("shots").get<std::size_t>();
  r.coils = j.at("coils").get<std::size_t>();
  r.split = j.at("split").get<std::string>();
  r.corrupted_path = j.at("corrupted_path").get<std::string>();
  r.target_path = j.at("target_path").get<std::string>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.normalization_peak = j.at("normalization_peak").get<double>();
  if (r.split != "train" && r.split != "test") {
    throw InvalidArgument("manifest record " + r.id + " has unknown split '" + r.split + "'");
  }
  return r;
}

struct DatasetManifest
{
  /// Directory that relative record paths resolve against.
  std::filesystem::path root;
  std::vector<ManifestRecord> records;

  std::filesystem::path resolve(std::string const &rel) const { return root / rel; }

  std::vector<ManifestRecord> split(std::string const &tag) const
  {
    std::vector<ManifestRecord> out;
    std::copy_if(records.begin(), records.end(), std::back_inserter(out), [&](auto const &r) { return r.split == tag; });
    return out;
  }

  std::string to_jsonl() const
  {
    std::string out;
    for (auto const &r : records) {
      out += to_json(r).dump();
      out += '\n';
    }
    return out;
  }
};

inline void write_manifest(DatasetManifest const &m, std::filesystem::path const &path)
{
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) {
    throw IoError(path.string(), "cannot open manifest for writing");
  }
  f << m.to_jsonl();
  if (!f) {
    throw IoError(path.string(), "manifest write failed");
  }
}

/// Reads manifest.jsonl; record paths resolve against the manifest's directory.
inline DatasetManifest read_manifest(std::filesystem::path const &path)
{
  std::ifstream f(path);
  if (!f) {
    throw IoError(path.string(), "cannot open manifest");
  }
  DatasetManifest m;
  m.root = path.parent_path();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    if (line.empty()) {
      continue;
    }
    try {
      m.records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (nlohmann::json::exception const &e) {
      throw FormatError(FormatError::Kind::BadHeader, path.string(), "line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return m;
}

/// Deterministic Fisher-Yates split: the first round(0.7 n) shuffled items are train.
inline std::vector<bool> train_mask(std::size_t n, std::uint64_t seed)
{
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  SplitMix64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::swap(order[i - 1], order[rng.below(i)]);
  }
  auto const n_train = static_cast<std::size_t>(std::llround(kTrainFraction * static_cast<double>(n)));
  std::vector<bool> train(n, false);
  for (std::size_t i = 0; i < n_train; ++i) {
    train[order[i]] = true;
  }
  return train;
}

struct PairOptions
{
  std::size_t shots = 2;
  std::size_t coils = 4;
  double sigma_fraction = 0.5;
  CGConfig cg;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool png = false;
};

namespace detail {

inline std::string degree_tag(double degree)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "deg%06.2f", degree);
  return buf;
}

inline std::string source_tag(std::size_t index)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "src%05zu", index);
  return buf;
}

inline RealImage reconstruct_magnitude(Tensor<cx> const &y, SenseOperator const &op, CGConfig const &cg)
{
  return magnitude(cg_sense(y, op, cg).image);
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn &&fn)
{
  workers = std::max<std::size_t>(1, std::min(workers, n));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) {
            failure = std::current_exception();
          }
          next = n;
        }
      }
    });
  }
  for (auto &th : pool) {
    th.join();
  }
  if (failure) {
    std::rethrow_exception(failure);
  }
}

} // namespace detail

/// Generates one (corrupted, target) pair per (source, degree), writes tensors and manifest.jsonl
/// under out_dir and returns the manifest. Output is a pure function of the arguments.
inline DatasetManifest generate_pairs(
  std::vector<SourceImage> const &sources, std::vector<double> const &degrees, PairOptions const &opt,
  std::filesystem::path const &out_dir)
{
  namespace fs = std::filesystem;
  if (sources.empty()) {
    throw InvalidArgument("generate_pairs: no source images");
  }
  if (degrees.empty()) {
    throw InvalidArgument("generate_pairs: no degrees of motion");
  }
  opt.cg.validate();
  std::vector<MotionTrajectory> trajectories;
  for (double d : degrees) {
    trajectories.push_back(make_trajectory(opt.shots, d));
  }
  {
    auto sorted = degrees;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw InvalidArgument("generate_pairs: duplicate degree");
    }
  }
  for (auto const *sub : {"sources", "targets", "corrupted"}) {
    std::error_code ec;
    fs::create_directories(out_dir / sub, ec);
    if (ec) {
      throw IoError((out_dir / sub).string(), ec.message());
    }
  }

  std::vector<std::vector<bool>> train(degrees.size());
  for (std::size_t d = 0; d < degrees.size(); ++d) {
    train[d] = train_mask(sources.size(), derive_seed(opt.seed, 0x5eed0000 + d));
  }

  std::vector<std::vector<ManifestRecord>> per_source(sources.size());
  detail::parallel_for(sources.size(), opt.workers, [&](std::size_t i) {
    std::string const src = detail::source_tag(i);
    std::string current_id = src;
    try {
      RealImage const &x = sources[i].image;
      auto const maps = gen_gaussian_maps(opt.coils, x.height(), x.width(), opt.sigma_fraction, opt.seed);
      auto const pattern = interleaved_pattern(opt.shots, x.height());
      SenseOperator const op(maps, pattern);

      RealImage target =
        detail::reconstruct_magnitude(corrupt(x, maps, pattern, MotionTrajectory::still(opt.shots)), op, opt.cg);
      double const peak = *std::max_element(target.data().begin(), target.data().end());
      if (!(peak > 0.0)) {
        throw InvalidArgument("source image reconstructs to all zeros");
      }
      for (auto &v : target.data()) {
        v /= peak;
      }
      std::string const source_rel = "sources/" + src + ".mrt";
      std::string const target_rel = "targets/" + src + ".mrt";
      save_tensor(out_dir / source_rel, x);
      save_tensor(out_dir / target_rel, target);
      if (opt.png) {
        export_png(target, out_dir / "targets" / (src + ".png"));
      }

      for (std::size_t d = 0; d < degrees.size(); ++d) {
        current_id = detail::degree_tag(degrees[d]) + "-" + src;
        RealImage corrupted =
          detail::reconstruct_magnitude(corrupt(x, maps, pattern, trajectories[d]), op, opt.cg);
        for (auto &v : corrupted.data()) {
          v = std::clamp(v / peak, 0.0, 1.0);
        }
        std::string const corrupted_rel = "corrupted/" + current_id + ".mrt";
        save_tensor(out_dir / corrupted_rel, corrupted);
        if (opt.png) {
          export_png(corrupted, out_dir / "corrupted" / (current_id + ".png"));
        }
        per_source[i].push_back(
          {current_id, source_rel, degrees[d], opt.shots, opt.coils, train[d][i] ? "train" : "test", corrupted_rel,
           target_rel, opt.seed, peak});
      }
    } catch (std::exception const &e) {
      throw Error("pair " + current_id + " (" + sources[i].name + "): " + e.what());
    }
  });

  DatasetManifest manifest;
  manifest.root = out_dir;
  for (auto &recs : per_source) {
    manifest.records.insert(manifest.records.end(), recs.begin(), recs.end());
  }
  std::sort(manifest.records.begin(), manifest.records.end(), [](auto const &a, auto const &b) { return a.id < b.id; });
  write_manifest(manifest, out_dir / "manifest.jsonl");
  return manifest;
}

/// Mean PSNR/SSIM of corrupted vs target for one split, one report per degree (ascending).
inline std::vector<MetricReport> evaluate_manifest(DatasetManifest const &manifest, std::string const &split)
{
  std::map<double, std::vector<std::pair<double, double>>> buckets;
  for (auto const &r : manifest.records) {
    if (r.split != split) {
      continue;
    }
    RealImage const target = load_real_image(manifest.resolve(r.target_path));
    RealImage const corrupted = load_real_image(manifest.resolve(r.corrupted_path));
    buckets[r.degree].emplace_back(psnr(target, corrupted), ssim(target, corrupted));
  }
  if (buckets.empty()) {
    throw InvalidArgument("manifest has no records in split '" + split + "'");
  }
  std::vector<MetricReport> reports;
  for (auto const &[degree, values] : buckets) {
    MetricReport m{degree, 0.0, 0.0, values.size()};
    for (auto const &[p, s] : values) {
      m.psnr_db += p;
      m.ssim += s;
    }
    m.psnr_db /= static_cast<double>(values.size());
    m.ssim /= static_cast<double>(values.size());
    reports.push_back(m);
  }
  return reports;
}

} // namespace mocosim
