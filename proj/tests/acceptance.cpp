// Acceptance checks: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "dense_oracle.hpp"
#include "mocosim_cli.hpp"
#include "ssim_reference.hpp"
#include "test_support.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace mocosim;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

struct Criterion
{
  std::string name;
  double time_limit_seconds;
  std::function<Outcome()> body;
};

std::string fmt(double v)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

Outcome adjoint_identity()
{
  double worst = 0.0;
  std::size_t trials = 0;
  for (std::size_t n : {16u, 32u, 64u}) {
    for (std::size_t coils : {1u, 2u, 4u}) {
      for (std::size_t shots : {1u, 2u, 4u}) {
        auto const maps = gen_gaussian_maps(coils, n, n, 0.5, n * 100 + coils * 10 + shots);
        auto const pattern = interleaved_pattern(shots, n);
        auto const still = MotionTrajectory::still(shots);
        for (std::uint64_t t = 0; t < 100; ++t) {
          std::uint64_t const seed = derive_seed(n * 1000 + coils * 100 + shots * 10, t);
          ComplexImage const x = test::random_complex(n, n, seed);
          MultishotKSpace const y = test::random_multishot(pattern, coils, n, seed + 1);
          cx const lhs = dot(y.tensor().data(), forward(x, maps, pattern, still).tensor().data());
          cx const rhs = dot(adjoint(y, maps, pattern, still).data(), x.data());
          worst = std::max(worst, std::abs(lhs - rhs) / (norm(x.data()) * norm(y.tensor().data())));
          ++trials;
        }
      }
    }
  }
  return {worst < 1e-10, "trials=" + std::to_string(trials) + " max_rel_gap=" + fmt(worst) + " tol=1e-10"};
}

Outcome identity_normal()
{
  double worst_normal = 0.0, worst_residual = 0.0;
  std::size_t worst_iters = 0;
  bool converged = true;
  for (std::size_t coils : {1u, 4u}) {
    for (std::size_t shots : {1u, 2u, 4u}) {
      std::size_t const n = 64;
      auto const maps = gen_gaussian_maps(coils, n, n, 0.5, coils + shots);
      auto const pattern = interleaved_pattern(shots, n);
      auto const still = MotionTrajectory::still(shots);
      ComplexImage const x = test::random_complex(n, n, 31 + coils * shots);
      worst_normal = std::max(worst_normal, relative_error(adjoint(forward(x, maps, pattern, still), maps, pattern, still), x));
      auto const recon = cg_sense(forward(x, maps, pattern, still).combine_shots(), maps, pattern, CGConfig{});
      converged = converged && recon.report.converged;
      worst_iters = std::max(worst_iters, recon.report.iterations);
      worst_residual = std::max(worst_residual, recon.report.residuals.back());
    }
  }
  bool const pass = worst_normal < 1e-10 && converged && worst_iters <= 2 && worst_residual < 1e-8;
  return {pass, "max_rel_err=" + fmt(worst_normal) + " (tol 1e-10) cg_iters=" + std::to_string(worst_iters) +
                  " final_residual=" + fmt(worst_residual) + " (tol 1e-8)"};
}

Outcome dense_equivalence()
{
  std::size_t const n = 8;
  auto const maps = gen_gaussian_maps(2, n, n, 0.5, 3);
  auto const pattern = interleaved_pattern(2, n);
  std::vector<bool> const full(n, true);
  double worst = 0.0;
  for (double lambda : {0.0, 1e-3}) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      // Motion-corrupted data is inconsistent with the static model, so the solve is non-trivial
      // even though the normal matrix is well conditioned.
      Tensor<cx> const y =
        corrupt(test::random_real(n, n, seed), maps, pattern, make_trajectory(2, 10.0 * static_cast<double>(seed)));
      auto const cg = cg_sense(y, maps, pattern, CGConfig{100, 1e-12, lambda});
      worst = std::max(worst, relative_error(cg.image, test::dense_normal_solve(maps, full, y, lambda)));
    }
  }
  std::vector<bool> partial(n, true);
  partial[1] = partial[6] = false;
  double worst_partial = 0.0;
  for (double lambda : {0.0, 1e-3}) {
    SenseOperator const op(maps, partial);
    Tensor<cx> const y = op.forward(test::random_complex(n, n, 9));
    auto const cg = cg_sense(y, op, CGConfig{200, 1e-13, lambda});
    worst_partial = std::max(worst_partial, relative_error(cg.image, test::dense_normal_solve(maps, partial, y, lambda)));
  }
  bool const pass = worst < 1e-6 && worst_partial < 1e-6;
  return {pass, "max_rel_err=" + fmt(worst) + " undersampled_max_rel_err=" + fmt(worst_partial) + " tol=1e-6"};
}

/// Rotated k-space sampled from a 4x finer grid: zero-pad the image, transform, rotate the
/// fine grid, then read back the native frequencies (scaled to the native normalization).
ComplexImage rotated_kspace_oversampled(RealImage const &x, double theta)
{
  std::size_t const f = 4, h = x.height(), w = x.width();
  std::size_t const fh = f * h, fw = f * w;
  std::size_t const r0 = fh / 2 - h / 2, c0 = fw / 2 - w / 2;
  ComplexImage padded(fh, fw);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      padded(r0 + r, c0 + c) = x(r, c);
    }
  }
  ComplexImage const fine = rotate_image(fft2c(padded), theta);
  ComplexImage out(h, w);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      out(r, c) = static_cast<double>(f) * fine(fh / 2 + (r - h / 2) * f, fw / 2 + (c - w / 2) * f);
    }
  }
  return out;
}

Outcome fourier_rotation()
{
  RealImage const x = shepp_logan(128, 128);
  double worst = 0.0;
  std::string detail;
  for (double theta : {5.0, 10.0, 14.0}) {
    ComplexImage const direct = fft2c(to_complex(rotate_image(x, theta)));
    double const err = relative_error(direct, rotated_kspace_oversampled(x, theta));
    double const native = relative_error(direct, rotate_image(fft2c(to_complex(x)), theta));
    worst = std::max(worst, err);
    detail += "theta=" + fmt(theta) + ":" + fmt(err) + "(native grid " + fmt(native) + ") ";
  }
  return {worst < 0.05, detail + "tol=0.05"};
}

std::vector<RealImage> phantoms(std::size_t count, std::size_t n)
{
  std::vector<RealImage> out;
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(shepp_logan_variant(n, n, derive_seed(7, i)));
  }
  return out;
}

Outcome zero_motion_fidelity()
{
  std::size_t const n = 128;
  auto const maps = gen_gaussian_maps(4, n, n, 0.5, 1);
  auto const pattern = interleaved_pattern(2, n);
  double min_psnr = std::numeric_limits<double>::infinity(), min_ssim = 1.0;
  for (auto const &x : phantoms(10, n)) {
    RealImage const recon = magnitude(cg_sense(corrupt(x, maps, pattern, make_trajectory(2, 0.0)), maps, pattern, CGConfig{}).image);
    min_psnr = std::min(min_psnr, psnr(x, recon));
    min_ssim = std::min(min_ssim, ssim(x, recon));
  }
  return {min_psnr >= 60.0 && min_ssim >= 0.999,
          "phantoms=10 min_psnr=" + fmt(min_psnr) + " (>=60) min_ssim=" + fmt(min_ssim) + " (>=0.999)"};
}

Outcome degradation_monotonic()
{
  std::size_t const n = 128;
  auto const maps = gen_gaussian_maps(4, n, n, 0.5, 1);
  auto const pattern = interleaved_pattern(2, n);
  auto const images = phantoms(10, n);
  std::string detail = "phantoms=10 mean_psnr:";
  double previous = std::numeric_limits<double>::infinity();
  bool pass = true;
  for (double d : {0.0, 5.0, 8.0, 10.0, 12.0, 14.0}) {
    double acc = 0.0;
    for (auto const &x : images) {
      acc += psnr(x, magnitude(cg_sense(corrupt(x, maps, pattern, make_trajectory(2, d)), maps, pattern, CGConfig{}).image));
    }
    double const mean = acc / static_cast<double>(images.size());
    pass = pass && mean <= previous;
    previous = mean;
    detail += " " + fmt(d) + "deg=" + fmt(mean);
  }
  return {pass, detail};
}

Outcome metric_oracles()
{
  RealImage const ones(8, 8, std::vector<double>(64, 1.0));
  RealImage const halves(8, 8, std::vector<double>(64, 0.5));
  double const psnr_gap = std::abs(psnr(ones, halves) - 20.0 * std::log10(2.0));
  RealImage const x = shepp_logan(64, 64);
  double const self_gap = std::abs(ssim(x, x) - 1.0);
  double ref_gap = 0.0;
  for (int k = 0; k < 5; ++k) {
    auto const [a, b] = test::ssim_reference_pair(k);
    ref_gap = std::max(ref_gap, std::abs(ssim(a, b) - test::kReferenceSsim[k]));
  }
  bool const pass = psnr_gap < 1e-6 && self_gap < 1e-12 && ref_gap < 1e-4;
  return {pass, "psnr_gap=" + fmt(psnr_gap) + " (1e-6) ssim_self_gap=" + fmt(self_gap) + " (1e-12) ssim_reference_gap=" +
                  fmt(ref_gap) + " (1e-4)"};
}

std::map<std::string, std::string> snapshot(std::filesystem::path const &root)
{
  std::map<std::string, std::string> files;
  for (auto const &entry : std::filesystem::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      std::ifstream f(entry.path(), std::ios::binary);
      files[std::filesystem::relative(entry.path(), root).string()] =
        std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
    }
  }
  return files;
}

Outcome format_determinism()
{
  test::TempDir a("accept-a"), b("accept-b");
  std::ostringstream sink;
  for (auto const *dir : {&a, &b}) {
    int const code = cli::run(
      {"dataset", "--size", "64", "--count", "10", "--seed", "1234", "--out-dir", dir->path().string()}, sink, sink);
    if (code != 0) {
      return {false, "dataset command failed: " + sink.str()};
    }
  }
  auto const sa = snapshot(a.path()), sb = snapshot(b.path());
  bool const identical = sa == sb;
  auto const manifest = read_manifest(a / "manifest.jsonl");
  std::map<double, std::pair<std::size_t, std::size_t>> per_degree;
  for (auto const &r : manifest.records) {
    (r.split == "train" ? per_degree[r.degree].first : per_degree[r.degree].second)++;
  }
  bool split_ok = per_degree.size() == 5;
  for (auto const &[d, counts] : per_degree) {
    split_ok = split_ok && counts.first == 7 && counts.second == 3;
  }
  return {identical && split_ok, "files=" + std::to_string(sa.size()) + " identical=" + (identical ? "yes" : "no") +
                                   " degrees=" + std::to_string(per_degree.size()) + " split_7_3=" + (split_ok ? "yes" : "no")};
}

} // namespace

int main()
{
  std::vector<Criterion> const criteria{
    {"adjoint-dot-product", 10.0, adjoint_identity},
    {"identity-normal-operator", 5.0, identity_normal},
    {"dense-solve-equivalence", 5.0, dense_equivalence},
    {"fourier-rotation-cross-check", 10.0, fourier_rotation},
    {"zero-motion-fidelity", 30.0, zero_motion_fidelity},
    {"degradation-monotonicity", 120.0, degradation_monotonic},
    {"metric-oracles", 5.0, metric_oracles},
    {"format-determinism", 120.0, format_determinism},
  };
  int failures = 0;
  for (auto const &c : criteria) {
    auto const t0 = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.body();
    } catch (std::exception const &e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    double const seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool const in_time = seconds < c.time_limit_seconds;
    bool const pass = outcome.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS " : "FAIL ") << c.name << ": " << outcome.detail << " time=" << fmt(seconds) << "s (limit "
              << fmt(c.time_limit_seconds) << "s)" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
