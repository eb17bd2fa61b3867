#include "sdid/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

namespace sdid::fit {

namespace {

constexpr double kXtol = 1e-10;
constexpr int kMaxEvaluations = 200;

// y = x0 * exp(-x1 * s) + x2 with s = t / t_scale, or y = x2 + x0 * x1^m.
// With a fixed offset only x0 and x1 are free.
struct Residuals {
  using Scalar = double;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;

  FitModel model;
  std::vector<double> x;
  std::vector<double> y;
  std::optional<double> fixed_offset;

  [[nodiscard]] int inputs() const { return fixed_offset ? 2 : 3; }
  [[nodiscard]] double offset(const Eigen::VectorXd& p) const { return fixed_offset ? *fixed_offset : p[2]; }
  [[nodiscard]] int values() const { return static_cast<int>(x.size()); }

  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& f) const {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const double shape = model == FitModel::kExponential ? std::exp(-p[1] * x[k]) : std::pow(p[1], x[k]);
      f[static_cast<Eigen::Index>(k)] = p[0] * shape + offset(p) - y[k];
    }
    return 0;
  }

  int df(const Eigen::VectorXd& p, Eigen::MatrixXd& j) const {
    for (std::size_t k = 0; k < x.size(); ++k) {
      const auto r = static_cast<Eigen::Index>(k);
      if (model == FitModel::kExponential) {
        const double e = std::exp(-p[1] * x[k]);
        j(r, 0) = e;
        j(r, 1) = -p[0] * x[k] * e;
      } else {
        const double e = std::pow(p[1], x[k]);
        j(r, 0) = e;
        j(r, 1) = x[k] == 0.0 ? 0.0 : p[0] * x[k] * std::pow(p[1], x[k] - 1.0);
      }
      if (!fixed_offset) j(r, 2) = 1.0;
    }
    return 0;
  }
};

// Ordinary least squares of v against u; returns {intercept, slope}.
std::pair<double, double> line_fit(const std::vector<double>& u, const std::vector<double>& v) {
  const double n = static_cast<double>(u.size());
  double su = 0, sv = 0, suu = 0, suv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    su += u[k];
    sv += v[k];
    suu += u[k] * u[k];
    suv += u[k] * v[k];
  }
  const double den = n * suu - su * su;
  const double slope = den != 0.0 ? (n * suv - su * sv) / den : 0.0;
  return {(sv - slope * su) / n, slope};
}

FitResult solve(Residuals residuals, Eigen::VectorXd start) {
  Eigen::LevenbergMarquardt<Residuals> lm(residuals);
  lm.parameters.xtol = kXtol;
  lm.parameters.maxfev = kMaxEvaluations;
  const auto info = lm.minimize(start);

  FitResult out;
  out.model = residuals.model;
  out.amplitude = start[0];
  out.decay = start[1];
  out.offset = residuals.offset(start);
  out.evaluations = static_cast<int>(lm.nfev);

  Eigen::VectorXd f(residuals.values());
  residuals(start, f);
  out.residual_norm = f.norm();
  using namespace Eigen::LevenbergMarquardtSpace;
  out.converged = info == RelativeReductionTooSmall || info == RelativeErrorTooSmall ||
                  info == RelativeErrorAndReductionTooSmall || info == CosinusTooSmall ||
                  info == XtolTooSmall || info == FtolTooSmall || info == GtolTooSmall;
  if (!out.converged) {
    out.status = info == TooManyFunctionEvaluation ? "max-iterations" : "no-convergence";
  } else {
    out.status = "ok";
  }

  const int n = residuals.inputs();
  Eigen::MatrixXd jac(residuals.values(), n);
  residuals.df(start, jac);
  const Eigen::Index dof = residuals.values() - n;
  const Eigen::MatrixXd jtj = jac.transpose() * jac;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  if (dof > 0 && lu.isInvertible()) {
    const double s2 = f.squaredNorm() / static_cast<double>(dof);
    const Eigen::MatrixXd cov = lu.inverse() * s2;
    for (int k = 0; k < n; ++k) out.stderr_params[k] = std::sqrt(std::max(0.0, cov(k, k)));
  }
  return out;
}

}  // namespace

FitResult fit_exponential(std::span<const double> times, std::span<const double> magnitudes) {
  if (times.size() != magnitudes.size()) {
    throw std::invalid_argument("fit_exponential: times and magnitudes differ in length");
  }
  if (times.size() < 4) throw std::invalid_argument("fit_exponential: need at least 4 points");
  for (double m : magnitudes) {
    if (!(m > 0.0)) throw std::invalid_argument("fit_exponential: magnitudes must be positive");
  }
  const double t_scale = *std::max_element(times.begin(), times.end());
  if (!(t_scale > 0.0)) throw std::invalid_argument("fit_exponential: need a positive time");

  Residuals r{FitModel::kExponential, {}, {}};
  for (std::size_t k = 0; k < times.size(); ++k) {
    r.x.push_back(times[k] / t_scale);
    r.y.push_back(magnitudes[k]);
  }

  const auto [lo, hi] = std::minmax_element(r.y.begin(), r.y.end());
  const double floor = *lo;
  const double range = *hi - *lo;
  std::vector<double> u, v;
  for (std::size_t k = 0; k < r.x.size(); ++k) {
    if (r.y[k] - floor > 1e-6 * range) {
      u.push_back(r.x[k]);
      v.push_back(std::log(r.y[k] - floor));
    }
  }
  Eigen::VectorXd start(3);
  if (u.size() >= 2) {
    const auto [icpt, slope] = line_fit(u, v);
    start << std::exp(icpt), std::max(-slope, 1e-3), floor;
  } else {
    start << range, 3.0, floor;
  }

  FitResult out = solve(std::move(r), start);
  out.decay /= t_scale;
  out.stderr_params[1] /= t_scale;
  if (!(out.decay > 0.0) && out.status == "ok") out.status = "non-positive-rate";
  return out;
}

FitResult fit_rb(std::span<const int> lengths, std::span<const double> survival) {
  if (lengths.size() != survival.size()) {
    throw std::invalid_argument("fit_rb: lengths and survival differ in length");
  }
  if (std::set<int>(lengths.begin(), lengths.end()).size() < 3) {
    throw std::invalid_argument("fit_rb: need at least 3 distinct lengths");
  }

  const auto [lo, hi] = std::minmax_element(survival.begin(), survival.end());
  if (*hi - *lo <= 1e-12 * std::max(1.0, std::abs(*hi))) {
    // No decay at all: p = 1 and only A + B is identified.
    FitResult flat;
    flat.model = FitModel::kRbDecay;
    flat.decay = 1.0;
    flat.offset = 0.5;
    flat.amplitude = *hi - 0.5;
    flat.converged = true;
    flat.status = "ok";
    return flat;
  }

  Residuals r{FitModel::kRbDecay, {}, {}};
  for (std::size_t k = 0; k < lengths.size(); ++k) {
    r.x.push_back(static_cast<double>(lengths[k]));
    r.y.push_back(survival[k]);
  }
  const double base = *lo > 0.5 ? 0.5 : 0.5 * *lo;
  std::vector<double> u, v;
  for (std::size_t k = 0; k < r.x.size(); ++k) {
    if (r.y[k] > base) {
      u.push_back(r.x[k]);
      v.push_back(std::log(r.y[k] - base));
    }
  }
  Eigen::VectorXd start(3);
  if (u.size() >= 2) {
    const auto [icpt, slope] = line_fit(u, v);
    start << std::exp(icpt), std::clamp(std::exp(slope), 1e-6, 1.0), base;
  } else {
    start << *hi - base, 0.99, base;
  }

  FitResult out = solve(r, start);
  // A shallow curve leaves B and A nearly degenerate and the free fit can run
  // off to a huge A with a compensating negative B. Fall back to the
  // single-qubit asymptote B = 1/2.
  const bool physical = out.converged && out.offset >= 0.0 && out.offset <= 1.0 && out.amplitude >= 0.0 &&
                        out.amplitude <= 1.0;
  if (!physical) {
    r.fixed_offset = 0.5;
    Eigen::VectorXd start2(2);
    start2 << std::clamp(*hi - 0.5, 1e-3, 0.5), std::clamp(start[1], 1e-6, 1.0);
    FitResult fixed = solve(r, start2);
    if (fixed.converged || !out.converged) {
      out = fixed;
      if (out.converged) out.status = "ok-offset-fixed";
    }
  }
  if (!(out.decay > 0.0 && out.decay <= 1.0 + 1e-12) && out.converged) {
    out.status = "p-outside-unit-interval";
  }
  return out;
}

}  // namespace sdid::fit
