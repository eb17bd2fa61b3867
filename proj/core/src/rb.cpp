#include "sdid/rb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sdid/model.hpp"
#include "sdid/parallel.hpp"
#include "sdid/trajectory.hpp"

namespace sdid {

SpectatorPrep parse_prep(std::string_view name) {
  if (name == "zero" || name == "0") return SpectatorPrep::kZero;
  if (name == "one" || name == "1") return SpectatorPrep::kOne;
  if (name == "plus" || name == "+") return SpectatorPrep::kPlus;
  throw std::invalid_argument("unknown spectator preparation '" + std::string(name) +
                              "' (expected zero, one or plus)");
}

RbFrame parse_frame(std::string_view name) {
  if (name == "bare") return RbFrame::kBare;
  if (name == "experimental") return RbFrame::kExperimental;
  throw std::invalid_argument("unknown frame '" + std::string(name) +
                              "' (expected bare or experimental)");
}

const char* to_string(SpectatorPrep prep) {
  switch (prep) {
    case SpectatorPrep::kZero: return "zero";
    case SpectatorPrep::kOne: return "one";
    case SpectatorPrep::kPlus: return "plus";
  }
  return "?";
}

const char* to_string(RbFrame frame) {
  return frame == RbFrame::kBare ? "bare" : "experimental";
}

namespace rb {

namespace {

constexpr double kForbiddenNorm = 1e-14;

// Removes the global phase: the largest-modulus entry (first on ties) becomes
// real and positive.
Eigen::Matrix2cd canonical(const Eigen::Matrix2cd& u) {
  Eigen::Index best = 0;
  double best_abs = -1.0;
  for (Eigen::Index k = 0; k < 4; ++k) {
    const double a = std::abs(u(k));
    if (a > best_abs + 1e-9) {
      best = k;
      best_abs = a;
    }
  }
  const Complex phase = u(best) / best_abs;
  return u / phase;
}

int find_element(const std::vector<Eigen::Matrix2cd>& elements, const Eigen::Matrix2cd& u) {
  const Eigen::Matrix2cd c = canonical(u);
  for (std::size_t k = 0; k < elements.size(); ++k) {
    if ((elements[k] - c).cwiseAbs().maxCoeff() < 1e-9) return static_cast<int>(k);
  }
  return -1;
}

CliffordGroup make_clifford_group() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd h;
  h << r, r, r, -r;
  Eigen::Matrix2cd s;
  s << 1, 0, 0, kI;

  CliffordGroup g;
  g.elements.push_back(Eigen::Matrix2cd::Identity());
  for (std::size_t k = 0; k < g.elements.size(); ++k) {
    for (const auto& gen : {h, s}) {
      const Eigen::Matrix2cd next = gen * g.elements[k];
      if (find_element(g.elements, next) < 0) g.elements.push_back(canonical(next));
    }
  }
  const std::size_t n = g.elements.size();
  g.product.assign(n, std::vector<int>(n, -1));
  g.inverse.assign(n, -1);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      const int c = find_element(g.elements, g.elements[a] * g.elements[b]);
      if (c < 0) throw std::logic_error("Clifford table is not closed");
      g.product[a][b] = c;
      if (c == 0) g.inverse[a] = static_cast<int>(b);
    }
  }
  return g;
}

// Per-gate lambda of one spectator, by what it does during the gate.
struct SpectatorLambdas {
  Complex stay_excited;
  Complex decay;
  Complex ground;
  double gamma = 0.0;
};

}  // namespace

ConditionalChannel conditional_channel(int i, int j, double nu, double gamma1, double t_gate) {
  if ((i != 0 && i != 1) || (j != 0 && j != 1)) {
    throw std::invalid_argument("conditional_channel: bits must be 0 or 1");
  }
  if (!(t_gate > 0.0)) throw std::invalid_argument("conditional_channel: t_gate must be positive");
  if (gamma1 < 0.0) throw std::invalid_argument("conditional_channel: gamma1 must be >= 0");

  DeviceModel device;
  device.spectators.push_back(Spectator{QubitParams{"spectator", gamma1, 0.0}, nu});
  const LiouvillianBundle bundle = model::build_liouvillian(device);
  const Superoperator channel = ops::expm(bundle.superop * t_gate);

  ConditionalChannel out;
  out.i = i;
  out.j = j;
  out.superop.setZero();
  const ComplexMatrix spec_in = ops::ket_bra(i, i);
  for (int b = 0; b < 2; ++b) {
    for (int a = 0; a < 2; ++a) {
      const ComplexMatrix rho = ops::kron(ops::ket_bra(a, b), spec_in);
      const ComplexMatrix out_rho = ops::unvectorize(channel * ops::vectorize(rho));
      for (int d = 0; d < 2; ++d) {
        for (int c = 0; c < 2; ++c) {
          out.superop(c + 2 * d, a + 2 * b) = out_rho(2 * c + j, 2 * d + j);
        }
      }
    }
  }
  // N_ij from the |0><0| control input; the |1><1| input gives the same value
  // because the control populations are conserved.
  const double norm = out.superop(0, 0).real() + out.superop(3, 0).real();
  if (std::abs(norm) < kForbiddenNorm) {
    throw ForbiddenTransition("spectator transition " + std::to_string(i) + " -> " +
                              std::to_string(j) + " is forbidden at zero temperature");
  }
  out.norm = norm;
  out.superop /= norm;
  return out;
}

Complex lambda_analytic(int i, int j, double nu, double gamma1, double t) {
  if (i == 0 && j == 1) throw ForbiddenTransition("spectator transition 0 -> 1 is forbidden");
  if (i == 0 && j == 0) return std::exp(2.0 * kI * nu * t);
  if (i == 1 && j == 1) return std::exp(-2.0 * kI * nu * t);
  if (i == 1 && j == 0) {
    if (!(gamma1 > 0.0)) {
      throw std::invalid_argument("lambda_10 is undefined without spectator relaxation");
    }
    if (t <= 0.0) throw std::invalid_argument("lambda_10 needs t > 0");
    const Complex num = gamma1 * (std::exp(2.0 * kI * nu * t) - std::exp(-(gamma1 + 2.0 * kI * nu) * t));
    const Complex den = (gamma1 + 4.0 * kI * nu) * (-std::expm1(-gamma1 * t));
    return num / den;
  }
  throw std::invalid_argument("lambda_analytic: bits must be 0 or 1");
}

double rb_decay_constant(const Eigen::Matrix4cd& superop) {
  return (superop.trace().real() - 1.0) / 3.0;
}

double rb_decay_constant(const ConditionalChannel& channel) {
  return rb_decay_constant(channel.superop);
}

double p_experimental(int i, double nu, double t) {
  if (i == 0) return 1.0;
  if (i == 1) return (1.0 + 2.0 * std::cos(4.0 * nu * t)) / 3.0;
  throw std::invalid_argument("p_experimental: i must be 0 or 1");
}

const CliffordGroup& clifford_group() {
  static const CliffordGroup group = make_clifford_group();
  return group;
}

RBCurve simulate_rb(const DeviceModel& device, SpectatorPrep prep, const RbOptions& options) {
  if (options.lengths.empty()) throw std::invalid_argument("simulate_rb: no sequence lengths");
  for (int m : options.lengths) {
    if (m < 1) throw std::invalid_argument("simulate_rb: lengths must be >= 1");
  }
  if (options.n_seq == 0) throw std::invalid_argument("simulate_rb: n_seq must be >= 1");
  if (options.n_shots == 0) throw std::invalid_argument("simulate_rb: n_shots must be >= 1");
  if (!(options.t_gate > 0.0)) throw std::invalid_argument("simulate_rb: t_gate must be positive");

  const double t = options.t_gate;
  std::vector<SpectatorLambdas> spec;
  for (const auto& s : device.spectators) {
    SpectatorLambdas l;
    l.gamma = s.qubit.gamma;
    l.ground = lambda_analytic(0, 0, s.nu, l.gamma, t);
    l.stay_excited = lambda_analytic(1, 1, s.nu, l.gamma, t);
    l.decay = l.gamma > 0.0 ? lambda_analytic(1, 0, s.nu, l.gamma, t) : l.stay_excited;
    if (options.frame == RbFrame::kExperimental) {
      const Complex ref = std::exp(-2.0 * kI * s.nu * t);
      l.ground *= ref;
      l.stay_excited *= ref;
      l.decay *= ref;
    }
    spec.push_back(l);
  }

  const CliffordGroup& group = clifford_group();
  const std::size_t n_len = options.lengths.size();
  const std::size_t n_jobs = n_len * options.n_seq;
  std::vector<double> per_sequence(n_jobs, 0.0);
  constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

  parallel_blocks(n_jobs, [&](std::size_t job) {
    const std::size_t len_idx = job / options.n_seq;
    const auto m = static_cast<std::size_t>(options.lengths[len_idx]);
    trajectory::TrajectoryRng rng(options.seed, job);

    std::vector<int> gates(m + 1);
    int net = 0;
    for (std::size_t g = 0; g < m; ++g) {
      gates[g] = std::min(23, static_cast<int>(rng.uniform() * 24.0));
      net = group.product[gates[g]][net];
    }
    gates[m] = group.inverse[net];

    std::vector<std::uint64_t> decay_gate(spec.size());
    std::vector<bool> excited(spec.size());
    double total = 0.0;
    for (std::size_t shot = 0; shot < options.n_shots; ++shot) {
      for (std::size_t j = 0; j < spec.size(); ++j) {
        excited[j] = prep == SpectatorPrep::kOne ||
                     (prep == SpectatorPrep::kPlus && rng.uniform() < 0.5);
        decay_gate[j] = kNever;
        if (excited[j] && spec[j].gamma > 0.0) {
          const double td = rng.exponential(spec[j].gamma) / t;
          if (td < static_cast<double>(m + 1)) decay_gate[j] = static_cast<std::uint64_t>(td);
        }
      }
      Eigen::Matrix2cd rho = Eigen::Matrix2cd::Zero();
      rho(0, 0) = 1.0;
      for (std::size_t g = 0; g <= m; ++g) {
        const Eigen::Matrix2cd& u = group.elements[gates[g]];
        rho = u * rho * u.adjoint();
        Complex lambda{1.0, 0.0};
        for (std::size_t j = 0; j < spec.size(); ++j) {
          if (!excited[j] || g > decay_gate[j]) {
            lambda *= spec[j].ground;
          } else if (g == decay_gate[j]) {
            lambda *= spec[j].decay;
          } else {
            lambda *= spec[j].stay_excited;
          }
        }
        rho(1, 0) *= lambda;
        rho(0, 1) *= std::conj(lambda);
      }
      total += rho(0, 0).real();
    }
    per_sequence[job] = total / static_cast<double>(options.n_shots);
  });

  RBCurve curve;
  curve.lengths = options.lengths;
  curve.n_seq = options.n_seq;
  curve.survival.resize(n_len);
  curve.stderr_survival.resize(n_len);
  const double n = static_cast<double>(options.n_seq);
  for (std::size_t l = 0; l < n_len; ++l) {
    double sum = 0.0;
    for (std::size_t s = 0; s < options.n_seq; ++s) sum += per_sequence[l * options.n_seq + s];
    const double mean = sum / n;
    double ss = 0.0;
    for (std::size_t s = 0; s < options.n_seq; ++s) {
      const double d = per_sequence[l * options.n_seq + s] - mean;
      ss += d * d;
    }
    curve.survival[l] = std::clamp(mean, 0.0, 1.0);
    curve.stderr_survival[l] = options.n_seq > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  }
  return curve;
}

}  // namespace rb
}  // namespace sdid
