#pragma once

// Command-line front end. Numeric results go to `out` as JSON, progress and errors to `err`.
// Exit codes: 0 success, 1 usage error, 2 runtime error.

#include <mocosim/mocosim.hpp>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace mocosim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

struct UsageError : Error
{
  using Error::Error;
};

/// "N" -> N x N, "HxW" -> H x W.
inline std::pair<std::size_t, std::size_t> parse_size(std::string const &s)
{
  auto const parse_dim = [&](std::string const &part) -> std::size_t {
    if (part.empty() || part.find_first_not_of("0123456789") != std::string::npos) {
      throw UsageError("invalid --size '" + s + "', expected N or HxW");
    }
    return std::stoul(part);
  };
  auto const x = s.find_first_of("xX");
  if (x == std::string::npos) {
    auto const n = parse_dim(s);
    return {n, n};
  }
  return {parse_dim(s.substr(0, x)), parse_dim(s.substr(x + 1))};
}

inline std::filesystem::path png_sibling(std::filesystem::path p, std::string const &suffix = "")
{
  auto const stem = p.stem().string();
  return p.replace_filename(stem + suffix + ".png");
}

/// Loads an image from a TensorFile or, for *.png, a grayscale PNG.
inline RealImage load_image_any(std::filesystem::path const &path)
{
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".png") {
    return ingest_png(path);
  }
  return load_real_image(path);
}

struct CommonOptions
{
  std::string size = "128";
  std::size_t coils = 4;
  std::size_t shots = 2;
  double sigma = 0.5;
  std::uint64_t seed = 0;
  std::size_t iters = 20;
  double tol = 1e-8;
  double lambda = 0.0;
  std::size_t workers = 1;
  bool png = false;

  CGConfig cg() const
  {
    CGConfig c{iters, tol, lambda};
    c.validate();
    return c;
  }
};

inline void add_cg_flags(CLI::App *cmd, CommonOptions &o)
{
  cmd->add_option("--iters", o.iters, "Maximum CG iterations")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--tol", o.tol, "CG relative-residual tolerance")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--lambda", o.lambda, "Tikhonov weight")->capture_default_str()->check(CLI::NonNegativeNumber);
}

inline void add_map_flags(CLI::App *cmd, CommonOptions &o)
{
  cmd->add_option("--coils", o.coils, "Number of synthetic receive coils")->capture_default_str()->check(CLI::PositiveNumber);
  cmd->add_option("--sigma", o.sigma, "Coil Gaussian width as a fraction of min(H, W)")->capture_default_str();
  cmd->add_option("--seed", o.seed, "Seed")->capture_default_str();
}

inline SensitivityMaps maps_for(std::string const &maps_path, CommonOptions const &o, std::size_t h, std::size_t w)
{
  if (!maps_path.empty()) {
    SensitivityMaps maps(load_complex_tensor(maps_path));
    if (maps.height() != h || maps.width() != w) {
      throw InvalidArgument("maps in " + maps_path + " do not match the image size");
    }
    return maps;
  }
  return gen_gaussian_maps(o.coils, h, w, o.sigma, o.seed);
}

inline std::vector<RealImage> phantom_set(std::size_t count, std::size_t h, std::size_t w, std::uint64_t seed)
{
  std::vector<RealImage> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(shepp_logan_variant(h, w, derive_seed(seed, i)));
  }
  return out;
}

inline double mean_of(std::vector<double> const &v)
{
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

inline double stddev_of(std::vector<double> const &v)
{
  if (v.size() < 2) {
    return 0.0;
  }
  double const m = mean_of(v);
  double acc = 0.0;
  for (double x : v) {
    acc += (x - m) * (x - m);
  }
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

inline int run(std::vector<std::string> const &args, std::ostream &out, std::ostream &err)
{
  CLI::App app{"Multishot MRI motion simulation and CG SENSE reconstruction toolkit", "mocosim"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for all subcommands");

  CommonOptions o;
  std::string out_path, in_path, ref_path, test_path, maps_path, kspace_path, manifest_path, split = "test";
  std::string multishot_path, out_dir, report_path;
  double degree = 0.0;
  std::vector<double> degrees{5, 8, 10, 12, 14};
  std::vector<std::string> inputs;
  std::size_t count = 10;

  auto *phantom = app.add_subcommand("phantom", "Generate a Shepp-Logan phantom (seed 0 = canonical, else a seeded variant)");
  phantom->add_option("--size", o.size, "N or HxW")->capture_default_str();
  phantom->add_option("--seed", o.seed, "Variant seed; 0 gives the canonical phantom")->capture_default_str();
  phantom->add_option("--in", in_path, "Convert a grayscale PNG instead of generating");
  phantom->add_option("--out", out_path, "Output tensor file")->required();
  phantom->add_flag("--png", o.png, "Also write <out>.png");

  auto *maps_cmd = app.add_subcommand("maps", "Generate SOS-normalized Gaussian coil maps");
  maps_cmd->add_option("--size", o.size, "N or HxW")->capture_default_str();
  add_map_flags(maps_cmd, o);
  maps_cmd->add_option("--out", out_path, "Output tensor file (complex, C x H x W)")->required();
  maps_cmd->add_flag("--png", o.png, "Also write one PNG per coil magnitude");

  auto *corrupt_cmd = app.add_subcommand("corrupt", "Simulate a multishot acquisition with inter-shot rotation");
  corrupt_cmd->add_option("--in", in_path, "Motion-free image (tensor or PNG)")->required();
  corrupt_cmd->add_option("--maps", maps_path, "Coil maps tensor; generated from --coils/--sigma/--seed if omitted");
  add_map_flags(corrupt_cmd, o);
  corrupt_cmd->add_option("--shots", o.shots, "Number of interleaved shots")->capture_default_str()->check(CLI::PositiveNumber);
  corrupt_cmd->add_option("--degree", degree, "Rotation of shots 1..S-1 in degrees")->capture_default_str();
  corrupt_cmd->add_option("--out", out_path, "Combined k-space output (complex, C x H x W)")->required();
  corrupt_cmd->add_option("--multishot-out", multishot_path, "Also write per-shot k-space (complex, S x C x H x W)");
  corrupt_cmd->add_flag("--png", o.png, "Also write the coil-combined zero-motion adjoint image as PNG");

  auto *recon_cmd = app.add_subcommand("reconstruct", "CG SENSE reconstruction of combined k-space");
  recon_cmd->add_option("--kspace", kspace_path, "Combined k-space tensor")->required();
  recon_cmd->add_option("--maps", maps_path, "Coil maps tensor; generated from --coils/--sigma/--seed if omitted");
  add_map_flags(recon_cmd, o);
  recon_cmd->add_option("--shots", o.shots, "Number of interleaved shots")->capture_default_str()->check(CLI::PositiveNumber);
  add_cg_flags(recon_cmd, o);
  recon_cmd->add_option("--out", out_path, "Reconstructed image (complex, H x W)")->required();
  recon_cmd->add_option("--report", report_path, "Also write the CG report JSON here");
  recon_cmd->add_flag("--png", o.png, "Also write <out>.png");

  auto *dataset_cmd = app.add_subcommand("dataset", "Generate paired corrupted/target reconstructions");
  dataset_cmd->add_option("--size", o.size, "Phantom size, N or HxW")->capture_default_str();
  dataset_cmd->add_option("--count", count, "Number of phantom sources")->capture_default_str()->check(CLI::PositiveNumber);
  dataset_cmd->add_option("--inputs", inputs, "Source images (tensor or PNG) instead of phantoms");
  dataset_cmd->add_option("--degrees", degrees, "Comma-separated degrees of motion")->delimiter(',')->capture_default_str();
  dataset_cmd->add_option("--shots", o.shots, "Number of interleaved shots")->capture_default_str()->check(CLI::PositiveNumber);
  add_map_flags(dataset_cmd, o);
  add_cg_flags(dataset_cmd, o);
  dataset_cmd->add_option("--out-dir", out_dir, "Output directory")->required();
  dataset_cmd->add_option("--workers", o.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  dataset_cmd->add_flag("--png", o.png, "Also write PNGs next to each tensor");

  auto *metrics_cmd = app.add_subcommand("metrics", "PSNR/SSIM between two images or across a manifest split");
  metrics_cmd->add_option("--ref", ref_path, "Reference image");
  metrics_cmd->add_option("--test", test_path, "Test image");
  metrics_cmd->add_option("--manifest", manifest_path, "manifest.jsonl to evaluate");
  metrics_cmd->add_option("--split", split, "Manifest split (train|test)")->capture_default_str()->check(CLI::IsMember({"train", "test"}));

  auto *bench_cmd = app.add_subcommand("bench", "Time CG SENSE reconstructions of motion-corrupted phantoms");
  bench_cmd->add_option("--size", o.size, "N or HxW")->capture_default_str();
  bench_cmd->add_option("--count", count, "Number of images")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--shots", o.shots, "Number of interleaved shots")->capture_default_str()->check(CLI::PositiveNumber);
  bench_cmd->add_option("--degree", degree, "Degree of motion")->capture_default_str();
  add_map_flags(bench_cmd, o);
  add_cg_flags(bench_cmd, o);
  bench_cmd->add_option("--workers", o.workers, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (CLI::CallForHelp const &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (CLI::CallForAllHelp const &e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (CLI::ParseError const &e) {
    app.exit(e, err, err);
    err << app.help();
    return kExitUsage;
  }

  auto const log = [&](std::string const &msg) { err << "[mocosim] " << msg << '\n'; };

  try {
    if (*phantom) {
      RealImage img;
      if (!in_path.empty()) {
        img = ingest_png(in_path);
      } else {
        auto const [h, w] = parse_size(o.size);
        img = o.seed == 0 ? shepp_logan(h, w) : shepp_logan_variant(h, w, o.seed);
      }
      save_tensor(out_path, img);
      nlohmann::ordered_json j{{"out", out_path}, {"height", img.height()}, {"width", img.width()}};
      if (o.png) {
        auto const png = png_sibling(out_path);
        export_png(img, png);
        j["png"] = png.string();
      }
      log("wrote phantom " + out_path);
      out << j.dump() << '\n';
    } else if (*maps_cmd) {
      auto const [h, w] = parse_size(o.size);
      auto const maps = gen_gaussian_maps(o.coils, h, w, o.sigma, o.seed);
      save_tensor(out_path, maps.tensor());
      if (o.png) {
        for (std::size_t c = 0; c < maps.num_coils(); ++c) {
          auto const coil = maps.coil(c);
          export_png(
            ComplexImage(h, w, std::vector<cx>(coil.begin(), coil.end())),
            png_sibling(out_path, "_coil" + std::to_string(c)));
        }
      }
      out << nlohmann::ordered_json{
               {"out", out_path}, {"coils", o.coils}, {"height", h}, {"width", w}, {"sos_deviation", maps.sos_deviation()}}
               .dump()
          << '\n';
    } else if (*corrupt_cmd) {
      RealImage const x = load_image_any(in_path);
      auto const maps = maps_for(maps_path, o, x.height(), x.width());
      auto const pattern = interleaved_pattern(o.shots, x.height());
      auto const traj = make_trajectory(o.shots, degree);
      Tensor<cx> const y = corrupt(x, maps, pattern, traj);
      save_tensor(out_path, y);
      if (!multishot_path.empty()) {
        save_tensor(multishot_path, forward(to_complex(x), maps, pattern, traj).tensor());
      }
      if (o.png) {
        export_png(SenseOperator(maps, pattern).adjoint(y), png_sibling(out_path));
      }
      nlohmann::ordered_json states = nlohmann::ordered_json::array();
      for (auto const &s : traj.states()) {
        states.push_back(s.rotation_deg);
      }
      log("simulated " + std::to_string(o.shots) + "-shot acquisition at " + std::to_string(degree) + " deg");
      out << nlohmann::ordered_json{
               {"out", out_path}, {"shots", o.shots}, {"coils", maps.num_coils()}, {"degree", degree}, {"rotations_deg", states}}
               .dump()
          << '\n';
    } else if (*recon_cmd) {
      Tensor<cx> const y = load_complex_tensor(kspace_path);
      if (y.rank() != 3) {
        throw InvalidArgument("k-space must be rank 3 (C x H x W), got " + dims_string(y.dims()));
      }
      auto const maps = maps_for(maps_path, o, y.dim(1), y.dim(2));
      auto const pattern = interleaved_pattern(o.shots, y.dim(1));
      auto const result = cg_sense(y, maps, pattern, o.cg());
      save_tensor(out_path, result.image);
      if (o.png) {
        export_png(result.image, png_sibling(out_path));
      }
      auto const report = to_json(result.report);
      if (!report_path.empty()) {
        std::ofstream f(report_path);
        f << report.dump(2) << '\n';
        if (!f) {
          throw IoError(report_path, "cannot write report");
        }
      }
      log("CG finished after " + std::to_string(result.report.iterations) + " iterations");
      out << report.dump() << '\n';
    } else if (*dataset_cmd) {
      std::vector<SourceImage> sources;
      if (!inputs.empty()) {
        for (auto const &p : inputs) {
          sources.push_back({p, load_image_any(p)});
        }
      } else {
        auto const [h, w] = parse_size(o.size);
        auto imgs = phantom_set(count, h, w, o.seed);
        for (std::size_t i = 0; i < imgs.size(); ++i) {
          sources.push_back({"phantom-" + std::to_string(i), std::move(imgs[i])});
        }
      }
      PairOptions opt;
      opt.shots = o.shots;
      opt.coils = o.coils;
      opt.sigma_fraction = o.sigma;
      opt.cg = o.cg();
      opt.seed = o.seed;
      opt.workers = o.workers;
      opt.png = o.png;
      log("generating " + std::to_string(sources.size() * degrees.size()) + " pairs into " + out_dir);
      auto const manifest = generate_pairs(sources, degrees, opt, out_dir);
      nlohmann::ordered_json per_degree = nlohmann::ordered_json::array();
      for (double d : degrees) {
        std::size_t train = 0, test = 0;
        for (auto const &r : manifest.records) {
          if (r.degree == d) {
            (r.split == "train" ? train : test)++;
          }
        }
        per_degree.push_back({{"degree", d}, {"train", train}, {"test", test}});
      }
      out << nlohmann::ordered_json{
               {"manifest", (std::filesystem::path(out_dir) / "manifest.jsonl").string()},
               {"pairs", manifest.records.size()},
               {"degrees", per_degree}}
               .dump()
          << '\n';
    } else if (*metrics_cmd) {
      if (!manifest_path.empty()) {
        if (!ref_path.empty() || !test_path.empty()) {
          throw UsageError("metrics: use either --manifest or --ref/--test");
        }
        auto const reports = evaluate_manifest(read_manifest(manifest_path), split);
        nlohmann::json arr = nlohmann::json::array();
        for (auto const &r : reports) {
          arr.push_back(to_json(r));
        }
        out << arr.dump() << '\n';
      } else {
        if (ref_path.empty() || test_path.empty()) {
          throw UsageError("metrics: --ref and --test are required without --manifest");
        }
        RealImage const ref = load_image_any(ref_path);
        RealImage const test = load_image_any(test_path);
        double const p = psnr(ref, test);
        nlohmann::ordered_json j{{"psnr_db", nullptr}, {"ssim", ssim(ref, test)}};
        if (std::isfinite(p)) {
          j["psnr_db"] = p;
        }
        out << j.dump() << '\n';
      }
    } else if (*bench_cmd) {
      auto const [h, w] = parse_size(o.size);
      auto const cg = o.cg();
      auto const maps = gen_gaussian_maps(o.coils, h, w, o.sigma, o.seed);
      auto const pattern = interleaved_pattern(o.shots, h);
      auto const traj = make_trajectory(o.shots, degree);
      SenseOperator const op(maps, pattern);
      auto const images = phantom_set(count, h, w, o.seed);
      std::vector<Tensor<cx>> kspaces;
      for (auto const &img : images) {
        kspaces.push_back(corrupt(img, maps, pattern, traj));
      }
      // Warm the FFT plan cache so the first image does not pay for planning.
      (void)cg_sense(kspaces.front(), op, cg);
      std::vector<double> seconds(count);
      std::vector<std::size_t> iterations(count);
      detail::parallel_for(count, o.workers, [&](std::size_t i) {
        auto const t0 = std::chrono::steady_clock::now();
        auto const r = cg_sense(kspaces[i], op, cg);
        seconds[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        iterations[i] = r.report.iterations;
      });
      out << nlohmann::ordered_json{
               {"task", "cg_sense_reconstruction"},
               {"height", h},
               {"width", w},
               {"shots", o.shots},
               {"coils", o.coils},
               {"degree", degree},
               {"count", count},
               {"workers", o.workers},
               {"mean_seconds", mean_of(seconds)},
               {"std_seconds", stddev_of(seconds)},
               {"min_seconds", *std::min_element(seconds.begin(), seconds.end())},
               {"max_seconds", *std::max_element(seconds.begin(), seconds.end())},
               {"mean_iterations", mean_of(std::vector<double>(iterations.begin(), iterations.end()))}}
               .dump()
          << '\n';
    }
  } catch (UsageError const &e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (std::exception const &e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

inline int run(int argc, char **argv, std::ostream &out = std::cout, std::ostream &err = std::cerr)
{
  return run(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

} // namespace mocosim::cli
