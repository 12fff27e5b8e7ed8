// SPDX-License-Identifier: Apache-2.0

#include "qmcev/lattice.hpp"

#include "qmcev/numerics.hpp"
#include "qmcev/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qmcev
{

namespace
{

constexpr int max_pod_order = 40;

void require_prime(std::uint64_t N)
{
  if (!is_prime(N)) {
    const auto [below, above] = neighbouring_primes(N);
    std::ostringstream os;
    os << "N = " << N << " is not prime; nearest primes are ";
    if (below != 0) os << below << " and ";
    os << above;
    throw std::invalid_argument(os.str());
  }
}

// B2(i / N) for i = 0..N-1, evaluated at min(i, N - i) so that the table is
// exactly symmetric.
Eigen::VectorXd kernel_table(std::uint64_t N)
{
  Eigen::VectorXd omega(static_cast<Eigen::Index>(N));
  for (std::uint64_t i = 0; i < N; ++i) {
    const std::uint64_t r = std::min(i, N - i);
    omega[Eigen::Index(i)] = bernoulli_b2(double(r) / double(N));
  }
  return omega;
}

// Kernel values along the lattice coordinate with generator z: omega[k z mod N].
Eigen::VectorXd kernel_column(const Eigen::VectorXd& omega, std::uint64_t N, std::uint64_t z)
{
  Eigen::VectorXd col(omega.size());
  std::uint64_t idx = 0;
  for (std::uint64_t k = 0; k < N; ++k) {
    col[Eigen::Index(k)] = omega[Eigen::Index(idx)];
    idx += z;
    if (idx >= N) idx -= N;
  }
  return col;
}

// Order-dependent state q(k, l) = sum over |u| = l of prod_{j in u} beta_j omega(k z_j).
class OrderState
{
public:
  OrderState(std::uint64_t N, int max_order) : q_(Eigen::MatrixXd::Zero(Eigen::Index(N), max_order + 1))
  {
    q_.col(0).setOnes();
  }

  int max_order() const { return int(q_.cols()) - 1; }
  const Eigen::MatrixXd& values() const { return q_; }

  /// Adds coordinate number d (1-based) with product weight beta.
  void add(int d, double beta, const Eigen::VectorXd& kernel)
  {
    if (beta == 0.0) return;
    const Eigen::VectorXd scaled = beta * kernel;
    for (int l = std::min(d, max_order()); l >= 1; --l) q_.col(l) += scaled.cwiseProduct(q_.col(l - 1));
  }

  double error_sq(const PODWeights& w) const
  {
    double e2 = 0.0;
    for (int l = 1; l <= max_order(); ++l) e2 += w.order[l - 1] * q_.col(l).mean();
    return e2;
  }

private:
  Eigen::MatrixXd q_;
};

void check_weights(const PODWeights& w, int s)
{
  if (w.dimension() < s) throw std::invalid_argument("weights cover fewer dimensions than the lattice");
  for (double b : w.product)
    if (!(b >= 0.0) || !std::isfinite(b)) throw std::invalid_argument("product weights must be finite and >= 0");
  for (double g : w.order)
    if (!(g >= 0.0) || !std::isfinite(g)) throw std::invalid_argument("order weights must be finite and >= 0");
}

}  // namespace

GeneratingVector GeneratingVector::truncated(int s) const
{
  if (s < 1 || s > dimension()) throw std::invalid_argument("cannot truncate generating vector to s = " + std::to_string(s));
  return {N, std::vector<std::uint64_t>(z.begin(), z.begin() + s)};
}

void GeneratingVector::validate() const
{
  require_prime(N);
  if (z.empty()) throw std::invalid_argument("generating vector is empty");
  for (std::uint64_t zj : z)
    if (zj < 1 || zj >= N) throw std::invalid_argument("generating vector component outside 1..N-1");
}

void write_generating_vector(std::ostream& os, const GeneratingVector& gen)
{
  os << gen.N << ' ' << gen.z.size() << '\n';
  for (std::size_t j = 0; j < gen.z.size(); ++j) os << (j ? " " : "") << gen.z[j];
  os << '\n';
}

GeneratingVector read_generating_vector(std::istream& is)
{
  std::string line;
  std::ostringstream body;
  while (std::getline(is, line))
    if (line.empty() || line[0] != '#') body << line << '\n';

  std::istringstream in(body.str());
  GeneratingVector gen;
  std::size_t s = 0;
  if (!(in >> gen.N >> s) || s == 0) throw std::runtime_error("malformed generating vector header");
  gen.z.resize(s);
  for (auto& zj : gen.z)
    if (!(in >> zj)) throw std::runtime_error("generating vector has fewer components than declared");
  gen.validate();
  return gen;
}

double PODWeights::gamma(std::span<const int> u) const
{
  if (u.empty()) return 1.0;
  if (int(u.size()) > max_order()) return 0.0;
  double g = order[u.size() - 1];
  for (int j : u) g *= product.at(std::size_t(j - 1));
  return g;
}

PODWeights PODWeights::pod(std::vector<double> product)
{
  PODWeights w;
  const int cap = std::min<int>(int(product.size()), max_pod_order);
  double factorial = 1.0;
  for (int l = 1; l <= cap; ++l) {
    factorial *= l;
    w.order.push_back(factorial);
  }
  w.product = std::move(product);
  return w;
}

PODWeights PODWeights::product_weights(std::vector<double> product)
{
  PODWeights w;
  w.order.assign(product.size(), 1.0);
  w.product = std::move(product);
  return w;
}

double weight_exponent(double q)
{
  if (!(q > 1.0)) throw std::invalid_argument("decay exponent must exceed 1");
  const double p = 1.0 / q;
  return p <= 2.0 / 3.0 ? 4.0 / 3.0 : 2.0 - p;
}

PODWeights pod_weights_from_field(const CoefficientField& field, int s)
{
  if (s < 1) throw std::invalid_argument("dimension must be >= 1");
  std::vector<double> beta(std::size_t(s), 0.0);
  if (field.family() != Family::ConstantLaplace) {
    const double eta = weight_exponent(field.min_decay());
    for (int j = 1; j <= s; ++j)
      beta[j - 1] = std::pow(std::max(field.basis_norm(Which::a, j), field.basis_norm(Which::b, j)), eta);
  }
  return PODWeights::pod(std::move(beta));
}

double worst_case_error_sq(const GeneratingVector& gen, const PODWeights& w)
{
  gen.validate();
  const int s = gen.dimension();
  check_weights(w, s);

  const Eigen::VectorXd omega = kernel_table(gen.N);
  OrderState state(gen.N, std::min(s, w.max_order()));
  for (int d = 1; d <= s; ++d)
    state.add(d, w.product[d - 1], kernel_column(omega, gen.N, gen.z[d - 1]));
  const double e2 = state.error_sq(w);
  if (!std::isfinite(e2)) throw std::overflow_error("worst-case error overflowed: weights too large");
  return e2;
}

CbcResult cbc_construct(std::uint64_t N, int s, const PODWeights& w)
{
  require_prime(N);
  if (s < 1) throw std::invalid_argument("dimension must be >= 1");
  check_weights(w, s);

  const Eigen::VectorXd omega = kernel_table(N);
  const auto n = Eigen::Index(N);
  OrderState state(N, std::min(s, w.max_order()));
  // z and N - z give the same score; scan the lower half only
  const std::uint64_t last = std::max<std::uint64_t>(1, (N - 1) / 2);

  CbcResult result;
  result.gen.N = N;
  for (int d = 1; d <= s; ++d) {
    const double beta = w.product[d - 1];
    std::uint64_t best = 1;
    if (beta != 0.0) {
      // weight of each point in the e^2 increment: sum_l Gamma_l q_{l-1}(k)
      Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
      for (int l = 1; l <= std::min(d, state.max_order()); ++l) v += w.order[l - 1] * state.values().col(l - 1);

      // scores within rounding of each other count as ties
      const double slack = 1e-13 * v.cwiseAbs().sum() * omega.cwiseAbs().maxCoeff();
      double best_score = std::numeric_limits<double>::infinity();
      for (std::uint64_t z = 1; z <= last; ++z) {
        double score = 0.0;
        std::uint64_t idx = 0;
        for (Eigen::Index k = 0; k < n; ++k) {
          score += omega[Eigen::Index(idx)] * v[k];
          idx += z;
          if (idx >= N) idx -= N;
        }
        if (score < best_score - slack) {
          best_score = score;
          best = z;
        }
      }
    }
    result.gen.z.push_back(best);
    state.add(d, beta, kernel_column(omega, N, best));
    result.error_sq.push_back(state.error_sq(w));
  }
  if (!std::isfinite(result.error_sq.back())) throw std::overflow_error("worst-case error overflowed: weights too large");
  return result;
}

Eigen::VectorXd ShiftedLattice::shift(int r) const
{
  if (r < 0 || r >= R) throw std::out_of_range("shift index " + std::to_string(r) + " outside 0..R-1");
  Eigen::VectorXd delta(gen.dimension());
  for (int j = 0; j < gen.dimension(); ++j) delta[j] = uniform01(master_seed, std::uint64_t(r), std::uint64_t(j));
  return delta;
}

Eigen::MatrixXd generate_points(const GeneratingVector& gen, const Eigen::VectorXd& shift)
{
  const int s = gen.dimension();
  if (shift.size() != s) throw std::invalid_argument("shift dimension does not match the generating vector");
  Eigen::MatrixXd points(s, Eigen::Index(gen.N));
  for (std::uint64_t k = 0; k < gen.N; ++k)
    for (int j = 0; j < s; ++j) {
      double v = double(k * gen.z[j] % gen.N) / double(gen.N) + shift[j];
      v -= std::floor(v);
      points(j, Eigen::Index(k)) = v - 0.5;
    }
  return points;
}

Eigen::MatrixXd generate_points(const ShiftedLattice& lat, int r) { return generate_points(lat.gen, lat.shift(r)); }

double rms_error_bound(const PODWeights& w, std::uint64_t N, double eta)
{
  if (!(eta > 0.5 && eta <= 1.0)) throw std::invalid_argument("eta must lie in (1/2, 1]");
  if (N < 2) throw std::invalid_argument("N must be >= 2");
  const double kappa = 2.0 * zeta(2.0 * eta) / std::pow(two_pi_squared, eta);
  const int L = std::min(w.dimension(), w.max_order());

  // elementary symmetric sums of beta_j^eta kappa, by order
  std::vector<double> e(std::size_t(L) + 1, 0.0);
  e[0] = 1.0;
  for (int j = 1; j <= w.dimension(); ++j) {
    const double x = std::pow(w.product[j - 1], eta) * kappa;
    for (int l = std::min(j, L); l >= 1; --l) e[l] += x * e[l - 1];
  }
  double sum = 0.0;
  for (int l = 1; l <= L; ++l) sum += std::pow(w.order[l - 1], eta) * e[l];
  return std::pow(sum / double(euler_phi(N)), 1.0 / (2.0 * eta));
}

std::uint64_t euler_phi(std::uint64_t n)
{
  std::uint64_t result = n;
  for (std::uint64_t p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  if (n > 1) result -= result / n;
  return result;
}

}  // namespace qmcev
