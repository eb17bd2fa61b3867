#include "sdid/derivations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace sdid {

namespace {

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

ComplexMatrix zhat() { return -ops::pauli_z(); }

// Superoperator of rho -> {m, rho}.
Superoperator anticommutator(const ComplexMatrix& m) {
  const ComplexMatrix id = ops::identity(m.rows());
  return ops::sandwich(m, id) + ops::sandwich(id, m);
}

}  // namespace

BathSpectrum BathSpectrum::flat(double gamma0) {
  if (gamma0 < 0.0) throw std::invalid_argument("flat bath: rate must be >= 0");
  return {BathModel::kFlat, [gamma0](double) { return gamma0; }, nullptr};
}

BathSpectrum BathSpectrum::zero() {
  return {BathModel::kZero, [](double) { return 0.0; }, nullptr};
}

BathSpectrum BathSpectrum::ohmic(double eta, double cutoff) {
  if (eta < 0.0 || !(cutoff > 0.0)) {
    throw std::invalid_argument("ohmic bath: need eta >= 0 and cutoff > 0");
  }
  return {BathModel::kOhmic, [eta, cutoff](double w) { return eta * w * std::exp(-w / cutoff); },
          nullptr};
}

BathSpectrum BathSpectrum::tabulated(std::vector<double> omegas, std::vector<double> gammas) {
  if (omegas.size() != gammas.size() || omegas.size() < 2) {
    throw std::invalid_argument("tabulated bath: need >= 2 matching samples");
  }
  if (!std::is_sorted(omegas.begin(), omegas.end())) {
    throw std::invalid_argument("tabulated bath: frequencies must be sorted");
  }
  for (double g : gammas) {
    if (g < 0.0) throw std::invalid_argument("tabulated bath: rates must be >= 0");
  }
  auto f = [w = std::move(omegas), g = std::move(gammas)](double x) {
    if (x < w.front() || x > w.back()) return 0.0;
    const auto it = std::upper_bound(w.begin(), w.end(), x);
    if (it == w.end()) return g.back();
    const auto k = static_cast<std::size_t>(it - w.begin());
    const double frac = (x - w[k - 1]) / (w[k] - w[k - 1]);
    return g[k - 1] + frac * (g[k] - g[k - 1]);
  };
  return {BathModel::kTabulated, std::move(f), nullptr};
}

ComplexMatrix Cluster::summed_op() const {
  if (members.empty()) throw std::logic_error("empty Bohr cluster");
  ComplexMatrix sum = ComplexMatrix::Zero(members.front().op.rows(), members.front().op.cols());
  for (const auto& m : members) sum += m.op;
  return sum;
}

namespace derive {

LogicalSystem logical_system(const std::vector<double>& omegas, const std::vector<double>& nus,
                             const std::vector<double>& a_0j, const std::vector<double>& a_j0) {
  const std::size_t n = omegas.size();
  if (n < 1 || nus.size() + 1 != n) {
    throw std::invalid_argument("logical_system: need N + 1 frequencies and N couplings");
  }
  if ((!a_0j.empty() && a_0j.size() + 1 != n) || (!a_j0.empty() && a_j0.size() + 1 != n)) {
    throw std::invalid_argument("logical_system: hybridization vectors need N entries");
  }
  auto at = [](const std::vector<double>& v, std::size_t k) { return v.empty() ? 0.0 : v[k]; };

  LogicalSystem sys;
  const Eigen::Index dim = Eigen::Index{1} << n;
  sys.hamiltonian = ComplexMatrix::Zero(dim, dim);
  for (std::size_t j = 0; j < n; ++j) sys.hamiltonian += 0.5 * omegas[j] * ops::embed(zhat(), j, n);
  for (std::size_t j = 1; j < n; ++j) {
    sys.hamiltonian += nus[j - 1] * ops::embed(zhat(), 0, n) * ops::embed(zhat(), j, n);
  }

  const ComplexMatrix x = ops::pauli_x();
  ComplexMatrix bath0 = ops::embed(x, 0, n);
  sys.dominant.push_back(bath0);
  for (std::size_t j = 1; j < n; ++j) {
    bath0 += at(a_0j, j - 1) * ops::embed(zhat(), 0, n) * ops::embed(x, j, n);
  }
  sys.couplings.push_back(bath0);
  for (std::size_t j = 1; j < n; ++j) {
    const ComplexMatrix xj = ops::embed(x, j, n);
    sys.dominant.push_back(xj);
    sys.couplings.push_back(xj + at(a_j0, j - 1) * ops::embed(x, 0, n) * ops::embed(zhat(), j, n));
  }
  return sys;
}

LogicalSystem two_qubit_system(double omega0, double omega1, double nu, double a) {
  return logical_system({omega0, omega1}, {nu}, {0.0}, {a});
}

std::vector<BohrTerm> bohr_spectrum(const ComplexMatrix& h_s, const ComplexMatrix& coupling,
                                    double tol) {
  if (h_s.rows() != h_s.cols() || coupling.rows() != h_s.rows() || coupling.cols() != h_s.cols()) {
    throw std::invalid_argument("bohr_spectrum: H_S and X must be square and the same size");
  }
  const double scale = std::max(1.0, h_s.cwiseAbs().maxCoeff());
  if (ops::hermiticity_defect(h_s) > 1e-12 * scale) {
    throw std::invalid_argument("bohr_spectrum: H_S is not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(h_s);
  const Eigen::VectorXd& lambda = eig.eigenvalues();
  const ComplexMatrix& v = eig.eigenvectors();
  const ComplexMatrix x_eig = v.adjoint() * coupling * v;
  const double max_abs = lambda.cwiseAbs().maxCoeff();
  const double ftol = max_abs > 0.0 ? 1e-9 * max_abs : 1e-12;

  struct Entry {
    double omega;
    Eigen::Index j, k;
  };
  std::vector<Entry> entries;
  for (Eigen::Index j = 0; j < lambda.size(); ++j) {
    for (Eigen::Index k = 0; k < lambda.size(); ++k) {
      if (std::abs(x_eig(k, j)) > tol) entries.push_back({lambda[j] - lambda[k], j, k});
    }
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.omega < b.omega; });

  std::vector<BohrTerm> terms;
  std::size_t start = 0;
  while (start < entries.size()) {
    std::size_t end = start;
    double sum = 0.0;
    ComplexMatrix op_eig = ComplexMatrix::Zero(h_s.rows(), h_s.cols());
    while (end < entries.size() && entries[end].omega - entries[start].omega <= ftol) {
      const auto& e = entries[end];
      op_eig(e.k, e.j) = x_eig(e.k, e.j);
      sum += e.omega;
      ++end;
    }
    terms.push_back({sum / static_cast<double>(end - start), v * op_eig * v.adjoint()});
    start = end;
  }
  return terms;
}

std::vector<BohrTerm> drop_order_a2(const std::vector<BohrTerm>& full,
                                    const std::vector<BohrTerm>& dominant) {
  double scale = 0.0;
  for (const auto& t : full) scale = std::max(scale, std::abs(t.frequency));
  const double ftol = scale > 0.0 ? 1e-9 * scale : 1e-12;
  std::vector<BohrTerm> kept;
  for (const auto& t : full) {
    const bool present = std::any_of(dominant.begin(), dominant.end(), [&](const BohrTerm& d) {
      return std::abs(d.frequency - t.frequency) <= ftol;
    });
    if (present) kept.push_back(t);
  }
  return kept;
}

std::vector<Cluster> cluster_bohr(std::vector<BohrTerm> terms, double delta_omega) {
  if (delta_omega < 0.0) throw std::invalid_argument("cluster_bohr: deltaOmega must be >= 0");
  std::stable_sort(terms.begin(), terms.end(),
                   [](const BohrTerm& a, const BohrTerm& b) { return a.frequency < b.frequency; });
  std::vector<Cluster> clusters;
  for (auto& t : terms) {
    if (clusters.empty() || t.frequency - clusters.back().members.front().frequency > delta_omega) {
      clusters.emplace_back();
    }
    clusters.back().members.push_back(std::move(t));
  }
  for (auto& c : clusters) {
    double sum = 0.0;
    for (const auto& m : c.members) sum += m.frequency;
    c.mean = sum / static_cast<double>(c.members.size());
    c.spread = c.members.back().frequency - c.members.front().frequency;
  }
  return clusters;
}

namespace {

LiouvillianBundle diagonal_bundle(Eigen::Index dim, const std::vector<std::pair<double, ComplexMatrix>>& channels,
                                  const BathSpectrum& bath, bool lamb_shift) {
  ComplexMatrix h = ComplexMatrix::Zero(dim, dim);
  std::vector<JumpTerm> terms;
  for (const auto& [omega, op] : channels) {
    const double rate = bath.gamma(omega);
    if (rate > 0.0) terms.push_back({rate, op});
    if (lamb_shift) h += bath.lamb(omega) * op.adjoint() * op;
  }
  return model::make_bundle(std::move(h), std::move(terms));
}

// Jump operators J_k = sum_a u_k[a] ops[a] with rates from the eigenvalues of
// the Hermitian coefficient matrix k (non-positive eigenvalues dropped).
void append_jumps(const ComplexMatrix& k, const std::vector<ComplexMatrix>& ops,
                  std::vector<JumpTerm>& out) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(k);
  for (Eigen::Index e = 0; e < k.rows(); ++e) {
    if (eig.eigenvalues()[e] <= 0.0) continue;
    ComplexMatrix jump = ComplexMatrix::Zero(ops.front().rows(), ops.front().cols());
    for (Eigen::Index a = 0; a < k.rows(); ++a) jump += eig.eigenvectors()(a, e) * ops[a];
    out.push_back({eig.eigenvalues()[e], jump});
  }
}

Eigen::Index common_dim(const std::vector<Cluster>& clusters) {
  for (const auto& c : clusters) {
    if (!c.members.empty()) return c.members.front().op.rows();
  }
  throw std::invalid_argument("no Bohr terms to build a generator from");
}

}  // namespace

LiouvillianBundle build_bmrwa(const std::vector<BohrTerm>& terms, const BathSpectrum& bath,
                              bool lamb_shift) {
  if (terms.empty()) throw std::invalid_argument("build_bmrwa: no Bohr terms");
  std::vector<std::pair<double, ComplexMatrix>> channels;
  for (const auto& t : terms) channels.emplace_back(t.frequency, t.op);
  return diagonal_bundle(terms.front().op.rows(), channels, bath, lamb_shift);
}

LiouvillianBundle build_bmpsa(const std::vector<Cluster>& clusters, const BathSpectrum& bath,
                              bool lamb_shift) {
  const Eigen::Index dim = common_dim(clusters);
  std::vector<std::pair<double, ComplexMatrix>> channels;
  for (const auto& c : clusters) channels.emplace_back(c.mean, c.summed_op());
  return diagonal_bundle(dim, channels, bath, lamb_shift);
}

Complex cetcg_rate(double omega, double omega_p, double tau_c, double gamma_bar) {
  if (!(tau_c > 0.0)) throw std::invalid_argument("cetcg_rate: tau_C must be positive");
  if (omega == omega_p) return gamma_bar;
  const double half = 0.5 * (omega_p - omega) * tau_c;
  return gamma_bar * std::exp(kI * half) * sinc(half);
}

RateMatrix rate_matrix(const Cluster& cluster, double tau_c, double gamma_bar) {
  RateMatrix r;
  r.tau_c = tau_c;
  const auto n = static_cast<Eigen::Index>(cluster.members.size());
  r.gamma = ComplexMatrix::Zero(n, n);
  for (Eigen::Index a = 0; a < n; ++a) {
    r.frequencies.push_back(cluster.members[a].frequency);
    for (Eigen::Index b = 0; b < n; ++b) {
      r.gamma(a, b) =
          cetcg_rate(cluster.members[a].frequency, cluster.members[b].frequency, tau_c, gamma_bar);
    }
  }
  return r;
}

LiouvillianBundle build_cetcg(const std::vector<Cluster>& clusters, const BathSpectrum& bath,
                              double tau_c) {
  if (!(tau_c > 0.0)) throw std::invalid_argument("build_cetcg: tau_C must be positive");
  const Eigen::Index dim = common_dim(clusters);
  LiouvillianBundle bundle;
  bundle.hamiltonian = ComplexMatrix::Zero(dim, dim);
  bundle.superop = Superoperator::Zero(dim * dim, dim * dim);

  for (const auto& c : clusters) {
    const double gamma_bar = bath.gamma(c.mean);
    if (gamma_bar <= 0.0) continue;
    const RateMatrix r = rate_matrix(c, tau_c, gamma_bar);
    const auto n = r.gamma.rows();
    for (Eigen::Index a = 0; a < n; ++a) {
      const ComplexMatrix& la = c.members[a].op;
      for (Eigen::Index b = 0; b < n; ++b) {
        const ComplexMatrix lb_dag = c.members[b].op.adjoint();
        bundle.superop += r.gamma(a, b) * (ops::sandwich(la, lb_dag) - 0.5 * anticommutator(lb_dag * la));
      }
    }
    std::vector<ComplexMatrix> ops_in_cluster;
    for (const auto& m : c.members) ops_in_cluster.push_back(m.op);
    append_jumps(r.gamma, ops_in_cluster, bundle.jump_terms);
  }
  return bundle;
}

namespace {

struct Ceme1Basis {
  Superoperator uncorrelated, correlated, cross;
};

Ceme1Basis ceme1_basis() {
  const ComplexMatrix a = ops::kron(ops::identity(2), ops::sigma_minus());
  const ComplexMatrix b = ops::kron(zhat(), ops::sigma_minus());
  return {model::dissipator(a), model::dissipator(b),
          kI * ops::sandwich(a, b.adjoint()) - kI * ops::sandwich(b, a.adjoint())};
}

}  // namespace

Ceme1Coefficients ceme1_closed_form(double nu_tau_c) {
  const double s4 = sinc(4.0 * nu_tau_c);
  return {0.5 * (1.0 + s4), 0.5 * (1.0 - s4),
          0.5 * std::sin(2.0 * nu_tau_c) * sinc(2.0 * nu_tau_c), 0.0};
}

LiouvillianBundle two_qubit_cetcg_reference(double nu, double tau_c, double gamma) {
  if (!(tau_c > 0.0)) throw std::invalid_argument("two_qubit_cetcg_reference: tau_C must be positive");
  const Ceme1Coefficients c = ceme1_closed_form(nu * tau_c);
  const Ceme1Basis basis = ceme1_basis();
  LiouvillianBundle bundle;
  bundle.hamiltonian = ComplexMatrix::Zero(4, 4);
  bundle.superop =
      gamma * (c.uncorrelated * basis.uncorrelated + c.correlated * basis.correlated + c.cross * basis.cross);
  // Kossakowski matrix on {A, B}; its off-diagonal anticommutator terms
  // cancel because A^dagger B = B^dagger A.
  Eigen::Matrix2cd k;
  k << c.uncorrelated, kI * c.cross, -kI * c.cross, c.correlated;
  append_jumps(gamma * k,
               {ops::kron(ops::identity(2), ops::sigma_minus()), ops::kron(zhat(), ops::sigma_minus())},
               bundle.jump_terms);
  return bundle;
}

Ceme1Coefficients ceme1_coefficients(const Superoperator& generator, double gamma) {
  if (generator.rows() != 16 || generator.cols() != 16) {
    throw std::invalid_argument("ceme1_coefficients: expected a two-qubit generator");
  }
  if (!(gamma > 0.0)) throw std::invalid_argument("ceme1_coefficients: gamma must be positive");
  const Ceme1Basis basis = ceme1_basis();
  Eigen::MatrixXcd m(256, 3);
  m.col(0) = basis.uncorrelated.reshaped();
  m.col(1) = basis.correlated.reshaped();
  m.col(2) = basis.cross.reshaped();
  const Eigen::VectorXcd g = generator.reshaped() / gamma;
  const Eigen::Matrix3d normal = (m.adjoint() * m).real();
  const Eigen::Vector3d rhs = (m.adjoint() * g).real();
  const Eigen::Vector3d c = normal.ldlt().solve(rhs);
  Ceme1Coefficients out{c[0], c[1], c[2], 0.0};
  out.residual = (g - m * c.cast<Complex>()).cwiseAbs().maxCoeff();
  return out;
}

Complex cetcg_rate_quadrature(double omega, double omega_p, double tau_c, double tau_b,
                              double gamma0, double omega_b) {
  if (!(tau_c > 0.0) || !(tau_b > 0.0)) {
    throw std::invalid_argument("cetcg_rate_quadrature: tau_C and tau_B must be positive");
  }
  using boost::math::quadrature::gauss_kronrod;
  constexpr unsigned kDepth = 8;
  constexpr double kTol = 1e-10;
  auto corr = [&](double u) {
    return gamma0 / (2.0 * tau_b) * std::exp(-std::abs(u) / tau_b) * std::exp(-kI * omega_b * u);
  };
  auto integrate = [&](auto&& f, double lo, double hi) -> Complex {
    if (hi <= lo) return {0.0, 0.0};
    return gauss_kronrod<double, 31>::integrate(f, lo, hi, kDepth, kTol);
  };
  // The inner integrand has a kink at s' = s, so its range is split there.
  auto inner = [&](double s) {
    auto f = [&](double sp) { return std::exp(kI * (omega_p * s - omega * sp)) * corr(s - sp); };
    return integrate(f, 0.0, s) + integrate(f, s, tau_c);
  };
  // The outer integrand has boundary layers of width ~tau_B at both ends.
  const double edge = std::min(10.0 * tau_b, 0.5 * tau_c);
  return (integrate(inner, 0.0, edge) + integrate(inner, edge, tau_c - edge) + integrate(inner, tau_c - edge, tau_c)) /
         tau_c;
}

LiouvillianBundle sum_bundles(const std::vector<LiouvillianBundle>& parts) {
  if (parts.empty()) throw std::invalid_argument("sum_bundles: nothing to sum");
  LiouvillianBundle out = parts.front();
  for (std::size_t k = 1; k < parts.size(); ++k) {
    if (parts[k].superop.rows() != out.superop.rows()) {
      throw std::invalid_argument("sum_bundles: generators act on different spaces");
    }
    out.superop += parts[k].superop;
    out.hamiltonian += parts[k].hamiltonian;
    out.jump_terms.insert(out.jump_terms.end(), parts[k].jump_terms.begin(), parts[k].jump_terms.end());
  }
  return out;
}

}  // namespace derive
}  // namespace sdid
