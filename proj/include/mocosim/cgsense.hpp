#pragma once

// Conjugate-gradient SENSE reconstruction, static-object model.

#include "encoding.hpp"

#include <nlohmann/json.hpp>

#include <chrono>

namespace mocosim {

struct CGConfig
{
  std::size_t max_iters = 20;
  double tol = 1e-8;
  double lambda = 0.0;

  void validate() const
  {
    if (max_iters < 1) {
      throw InvalidArgument("CG max_iters must be >= 1");
    }
    if (!(tol > 0.0) || !std::isfinite(tol)) {
      throw InvalidArgument("CG tol must be positive");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      throw InvalidArgument("CG lambda must be >= 0");
    }
  }
};

struct CGReport
{
  std::size_t iterations = 0;
  /// ||r_k|| / ||r_0|| after each iteration k = 1..iterations.
  std::vector<double> residuals;
  double wall_time_seconds = 0.0;
  bool converged = false;
};

inline nlohmann::json to_json(CGReport const &r)
{
  return {
    {"iterations", r.iterations},
    {"residuals", r.residuals},
    {"wall_time_seconds", r.wall_time_seconds},
    {"converged", r.converged},
  };
}

struct CGResult
{
  ComplexImage image;
  CGReport report;
};

/// Plain CG on A x = b for a Hermitian positive-definite A given as a callable, starting at x = 0.
/// Stops once ||r_k|| / ||b|| < tol, after max_iters, or on breakdown (<p, Ap> <= 0).
template <typename NormalOp>
CGResult conjugate_gradient(NormalOp const &apply, ComplexImage const &rhs, std::size_t max_iters, double tol)
{
  auto const start = std::chrono::steady_clock::now();
  CGResult result{ComplexImage(rhs.height(), rhs.width()), {}};
  auto &x = result.image;
  auto &report = result.report;

  ComplexImage r = rhs;
  ComplexImage p = rhs;
  double rr = squared_norm(r.data());
  double const r0 = std::sqrt(rr);
  if (r0 == 0.0) {
    report.converged = true;
  } else {
    for (std::size_t k = 0; k < max_iters; ++k) {
      ComplexImage const ap = apply(p);
      double const pap = dot(p.data(), ap.data()).real();
      if (!(pap > 0.0)) {
        break;
      }
      double const alpha = rr / pap;
      for (std::size_t i = 0; i < x.size(); ++i) {
        x[i] += alpha * p[i];
        r[i] -= alpha * ap[i];
      }
      double const rr_new = squared_norm(r.data());
      report.iterations = k + 1;
      report.residuals.push_back(std::sqrt(rr_new) / r0);
      if (report.residuals.back() < tol) {
        report.converged = true;
        break;
      }
      double const beta = rr_new / rr;
      for (std::size_t i = 0; i < p.size(); ++i) {
        p[i] = r[i] + beta * p[i];
      }
      rr = rr_new;
    }
  }
  report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

/// Solves (E^H E + lambda I) x = E^H y with E the static SENSE operator.
inline CGResult cg_sense(Tensor<cx> const &y, SenseOperator const &op, CGConfig const &config)
{
  config.validate();
  op.check_kspace(y);
  if (!all_finite<cx>(y.data())) {
    throw InvalidArgument("k-space contains non-finite values");
  }
  auto const start = std::chrono::steady_clock::now();
  ComplexImage const rhs = op.adjoint(y);
  double const lambda = config.lambda;
  auto const normal = [&](ComplexImage const &v) {
    ComplexImage out = op.normal(v);
    if (lambda != 0.0) {
      for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] += lambda * v[i];
      }
    }
    return out;
  };
  CGResult result = conjugate_gradient(normal, rhs, config.max_iters, config.tol);
  result.report.wall_time_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

inline CGResult cg_sense(
  Tensor<cx> const &y, SensitivityMaps const &maps, SamplingPattern const &pattern, CGConfig const &config)
{
  return cg_sense(y, SenseOperator(maps, pattern), config);
}

} // namespace mocosim
