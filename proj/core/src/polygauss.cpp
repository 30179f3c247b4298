#include "cvfid/polygauss.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "cvfid/errors.hpp"

namespace cvfid {

namespace {

constexpr double kPruneTolerance = 1e-14;
constexpr int kMaxFockOrder = 16;

// Typical size of each variable under the envelope: sqrt((M^-1)_ii) when M is
// positive definite, 1 otherwise.
// weights[i][e] bounds E|v_i|^e under the envelope: with mean mu and standard
// deviation sigma from the Gaussian part, E(|mu| + sigma |z|)^e. Directions
// that are not confined fall back to unit scale.
std::vector<std::vector<double>> power_weights(const Polynomial& poly, const Eigen::MatrixXd& quad,
                                               const Eigen::VectorXd& lin) {
  const auto n = poly.num_variables();
  std::vector<double> mu(n, 0.0), sigma(n, 1.0);
  if (n > 0) {
    const Eigen::LLT<Eigen::MatrixXd> llt(quad);
    if (llt.info() == Eigen::Success) {
      const Eigen::MatrixXd cov = 0.5 * llt.solve(Eigen::MatrixXd::Identity(quad.rows(), quad.cols()));
      const Eigen::VectorXd mean = cov * lin;
      for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        mu[i] = std::abs(mean(ii));
        sigma[i] = std::sqrt(std::max(cov(ii, ii), 0.0));
      }
    }
  }
  std::vector<std::vector<double>> weights(n);
  for (std::size_t i = 0; i < n; ++i) {
    const unsigned top = poly.degree_in(i);
    // E|z|^j for a standard normal.
    std::vector<double> abs_z(top + 1);
    for (unsigned j = 0; j <= top; ++j) {
      abs_z[j] = std::exp(0.5 * j * std::log(2.0) + std::lgamma(0.5 * (j + 1.0)) - 0.5 * std::log(std::numbers::pi));
    }
    auto& w = weights[i];
    w.resize(top + 1);
    for (unsigned e = 0; e <= top; ++e) {
      double sum = 0.0, binom = 1.0;
      for (unsigned j = 0; j <= e; ++j) {
        sum += binom * std::pow(mu[i], e - j) * std::pow(sigma[i], j) * abs_z[j];
        binom = binom * (e - j) / (j + 1.0);
      }
      w[e] = sum;
    }
  }
  return weights;
}

PolyGauss finish(std::vector<std::string> labels, Polynomial poly, Eigen::MatrixXd quad,
                 Eigen::VectorXd lin, double constant) {
  quad = (0.5 * (quad + quad.transpose())).eval();
  poly.prune_weighted(kPruneTolerance, power_weights(poly, quad, lin));
  PolyGauss out(std::move(labels), std::move(poly), std::move(quad), std::move(lin), constant);
  out.check_invariants();
  return out;
}

std::vector<std::size_t> others(std::size_t n, std::size_t skip) {
  std::vector<std::size_t> r;
  for (std::size_t j = 0; j < n; ++j) {
    if (j != skip) r.push_back(j);
  }
  return r;
}

double binomial(unsigned n, unsigned k) {
  double b = 1.0;
  for (unsigned j = 1; j <= k; ++j) b = b * static_cast<double>(n - k + j) / static_cast<double>(j);
  return b;
}

// Integrates variable i out of w exactly by completing the square.
PolyGauss integrate_variable(const PolyGauss& w, std::size_t i) {
  const auto n = w.size();
  const auto ii = static_cast<Eigen::Index>(i);
  const double a = w.quad()(ii, ii);
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw NumericalError("integrate_out: non-integrable direction '" + w.labels()[i] + "'");
  }
  const auto rest = others(n, i);
  const auto nr = static_cast<Eigen::Index>(rest.size());

  Eigen::VectorXd m(nr);
  Eigen::MatrixXd quad_rest(nr, nr);
  Eigen::VectorXd lin_rest(nr);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const auto rr = static_cast<Eigen::Index>(rest[static_cast<std::size_t>(r)]);
    m(r) = w.quad()(rr, ii);
    lin_rest(r) = w.lin()(rr);
    for (Eigen::Index s = 0; s < nr; ++s) {
      quad_rest(r, s) = w.quad()(rr, static_cast<Eigen::Index>(rest[static_cast<std::size_t>(s)]));
    }
  }
  const double bi = w.lin()(ii);

  // x = u + shift(y), shift(y) = b_i/(2a) - sum_j M_ij y_j / a.
  std::vector<double> shift_coeffs(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    if (j != i) shift_coeffs[j] = -w.quad()(static_cast<Eigen::Index>(j), ii) / a;
  }
  const Polynomial shift = Polynomial::affine(bi / (2.0 * a), shift_coeffs);

  // q_e = sum_{k even} C(e, k) mu_k shift^(e-k), with mu_k = Int u^k e^{-a u^2} / sqrt(pi/a).
  std::vector<Polynomial> shift_powers{Polynomial::constant(n, 1.0)};
  std::vector<Polynomial> q;
  auto q_of = [&](unsigned e) -> const Polynomial& {
    while (shift_powers.size() <= e) shift_powers.push_back(shift_powers.back() * shift);
    while (q.size() <= e) {
      const auto ee = static_cast<unsigned>(q.size());
      Polynomial acc(n);
      double mu = 1.0;
      for (unsigned k = 0; k <= ee; k += 2) {
        if (k > 0) mu *= static_cast<double>(k - 1) / (2.0 * a);
        Polynomial t = shift_powers[ee - k];
        t *= binomial(ee, k) * mu;
        acc += t;
      }
      q.push_back(std::move(acc));
    }
    return q[e];
  };

  Polynomial poly(n);
  for (const auto& [e, c] : w.poly().terms()) {
    Exponents rest_e = e;
    rest_e[i] = 0;
    poly.add_scaled_product(rest_e, c, q_of(e[i]));
  }

  std::vector<std::string> labels;
  for (auto j : rest) labels.push_back(w.labels()[j]);
  const double constant = w.constant() + bi * bi / (4.0 * a) + 0.5 * std::log(std::numbers::pi / a);
  return finish(std::move(labels), poly.drop_variable(i), quad_rest - m * m.transpose() / a,
                lin_rest - (bi / a) * m, constant);
}

}  // namespace

PolyGauss::PolyGauss(std::vector<std::string> labels, Polynomial poly, Eigen::MatrixXd quad,
                     Eigen::VectorXd lin, double constant)
    : labels_(std::move(labels)),
      poly_(std::move(poly)),
      quad_(std::move(quad)),
      lin_(std::move(lin)),
      constant_(constant) {
  const auto n = static_cast<Eigen::Index>(labels_.size());
  if (poly_.num_variables() != labels_.size() || quad_.rows() != n || quad_.cols() != n ||
      lin_.size() != n) {
    throw ValidationError("PolyGauss: dimension mismatch");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    for (std::size_t j = i + 1; j < labels_.size(); ++j) {
      if (labels_[i] == labels_[j]) throw ValidationError("PolyGauss: duplicate label '" + labels_[i] + "'");
    }
  }
  if (!quad_.allFinite() || !lin_.allFinite() || !std::isfinite(constant_)) {
    throw NumericalError("PolyGauss: non-finite exponent");
  }
}

PolyGauss PolyGauss::scalar(double value) {
  return PolyGauss({}, Polynomial::constant(0, value), Eigen::MatrixXd(0, 0), Eigen::VectorXd(0), 0.0);
}

std::size_t PolyGauss::index_of(std::string_view name) const {
  const auto it = std::find(labels_.begin(), labels_.end(), name);
  if (it == labels_.end()) throw ValidationError("PolyGauss: unknown variable '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - labels_.begin());
}

double PolyGauss::value_at(std::span<const double> point) const {
  if (point.size() != labels_.size()) throw ValidationError("PolyGauss: point dimension mismatch");
  const Eigen::Map<const Eigen::VectorXd> v(point.data(), static_cast<Eigen::Index>(point.size()));
  return poly_.evaluate(point) * std::exp(-v.dot(quad_ * v) + lin_.dot(v) + constant_);
}

double PolyGauss::scalar_value() const {
  if (!labels_.empty()) throw ValidationError("PolyGauss: function still has free variables");
  return poly_.constant_term() * std::exp(constant_);
}

void PolyGauss::check_invariants() const {
  if (quad_.size() > 0) {
    const double scale = std::max(1.0, quad_.cwiseAbs().maxCoeff());
    if ((quad_ - quad_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw NumericalError("PolyGauss: quadratic form lost symmetry");
    }
  }
  for (const auto& [e, c] : poly_.terms()) {
    if (c == 0.0 || !std::isfinite(c)) throw NumericalError("PolyGauss: zero or non-finite coefficient");
  }
}

// ---------------------------------------------------------------------------

PolyGauss from_gaussian(const GaussianState& state) {
  const auto n = static_cast<Eigen::Index>(state.size());
  Eigen::LLT<Eigen::MatrixXd> llt(state.cov());
  if (llt.info() != Eigen::Success) {
    throw ValidationError("from_gaussian: covariance must be positive definite");
  }
  const Eigen::MatrixXd inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  const Eigen::VectorXd& mu = state.mean();
  double log_det = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) log_det += 2.0 * std::log(llt.matrixL()(i, i));
  const double constant = -mu.dot(inv * mu) - 0.5 * static_cast<double>(n) * std::log(std::numbers::pi) -
                          0.5 * log_det;
  return finish(names_of(state.labels()), Polynomial::constant(state.size(), 1.0), inv,
                2.0 * inv * mu, constant);
}

PolyGauss fock_wigner(int n_photons, std::string x, std::string p) {
  if (n_photons < 0) throw ValidationError("fock_wigner: photon number must be >= 0");
  if (n_photons > kMaxFockOrder) {
    throw ValidationError("fock_wigner: photon number above supported limit " + std::to_string(kMaxFockOrder));
  }
  const auto big_n = static_cast<unsigned>(n_photons);
  Polynomial poly(2);
  // L_N(t) = sum_j C(N, j) (-t)^j / j!, with t^j = 2^j sum_i C(j, i) x^2i p^2(j-i).
  double factorial = 1.0;
  for (unsigned j = 0; j <= big_n; ++j) {
    if (j > 0) factorial *= j;
    const double sign = ((big_n + j) % 2 == 0) ? 1.0 : -1.0;
    const double outer = sign * binomial(big_n, j) * std::pow(2.0, j) / factorial;
    for (unsigned i = 0; i <= j; ++i) {
      Exponents e{};
      e[0] = static_cast<std::uint8_t>(2 * i);
      e[1] = static_cast<std::uint8_t>(2 * (j - i));
      poly.add_term(e, outer * binomial(j, i));
    }
  }
  return finish({std::move(x), std::move(p)}, std::move(poly), Eigen::Matrix2d::Identity(),
                Eigen::Vector2d::Zero(), -std::log(std::numbers::pi));
}

PolyGauss product(const PolyGauss& a, const PolyGauss& b) {
  std::vector<std::string> labels = a.labels();
  std::vector<std::size_t> pos_b;
  std::size_t last_shared = 0;
  bool any_shared = false;
  for (const auto& name : b.labels()) {
    const auto it = std::find(a.labels().begin(), a.labels().end(), name);
    if (it != a.labels().end()) {
      const auto pos = static_cast<std::size_t>(it - a.labels().begin());
      if (any_shared && pos < last_shared) {
        throw ValidationError("product: shared label '" + name + "' appears in a different order");
      }
      last_shared = pos;
      any_shared = true;
      pos_b.push_back(pos);
    } else {
      pos_b.push_back(labels.size());
      labels.push_back(name);
    }
  }
  const auto n = labels.size();
  const auto ni = static_cast<Eigen::Index>(n);
  std::vector<std::size_t> pos_a(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) pos_a[i] = i;

  Eigen::MatrixXd quad = Eigen::MatrixXd::Zero(ni, ni);
  Eigen::VectorXd lin = Eigen::VectorXd::Zero(ni);
  quad.topLeftCorner(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(a.size())) = a.quad();
  lin.head(static_cast<Eigen::Index>(a.size())) = a.lin();
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto pi = static_cast<Eigen::Index>(pos_b[i]);
    lin(pi) += b.lin()(static_cast<Eigen::Index>(i));
    for (std::size_t j = 0; j < b.size(); ++j) {
      quad(pi, static_cast<Eigen::Index>(pos_b[j])) +=
          b.quad()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  const Polynomial poly = a.poly().embed(n, pos_a) * b.poly().embed(n, pos_b);
  return finish(std::move(labels), poly, std::move(quad), std::move(lin), a.constant() + b.constant());
}

PolyGauss substitute_linear(const PolyGauss& w, const LinearMap& map) {
  const auto inputs = names_of(map.inputs());
  if (inputs != w.labels()) {
    throw ValidationError("substitute_linear: map variables do not match the function's variables");
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(map.matrix());
  if (!lu.isInvertible()) throw ValidationError("substitute_linear: singular map '" + map.description() + "'");
  const Eigen::MatrixXd r = lu.inverse();
  const double log_jacobian = std::log(std::abs(r.determinant()));
  return finish(names_of(map.outputs()), w.poly().compose_linear(r), r.transpose() * w.quad() * r,
                r.transpose() * w.lin(), w.constant() + log_jacobian);
}

PolyGauss integrate_out_in_order(const PolyGauss& w, std::span<const std::string> names) {
  PolyGauss out = w;
  for (const auto& name : names) out = integrate_variable(out, out.index_of(name));
  return out;
}

PolyGauss integrate_out(const PolyGauss& w, std::span<const std::string> names) {
  std::vector<std::string> pending(names.begin(), names.end());
  for (const auto& name : pending) (void)w.index_of(name);
  PolyGauss out = w;
  while (!pending.empty()) {
    auto best = pending.begin();
    double best_diag = -1.0;
    for (auto it = pending.begin(); it != pending.end(); ++it) {
      const auto i = static_cast<Eigen::Index>(out.index_of(*it));
      if (out.quad()(i, i) > best_diag) {
        best_diag = out.quad()(i, i);
        best = it;
      }
    }
    out = integrate_variable(out, out.index_of(*best));
    pending.erase(best);
  }
  return out;
}

PolyGauss integrate_out(const PolyGauss& w, std::initializer_list<std::string> names) {
  return integrate_out(w, std::span<const std::string>(names.begin(), names.size()));
}

double integral(const PolyGauss& w) { return integrate_out(w, w.labels()).scalar_value(); }

PolyGauss evaluate_at(const PolyGauss& w, std::string_view label, double value) {
  const auto i = w.index_of(label);
  const auto ii = static_cast<Eigen::Index>(i);
  const auto rest = others(w.size(), i);
  const auto nr = static_cast<Eigen::Index>(rest.size());
  Eigen::MatrixXd quad(nr, nr);
  Eigen::VectorXd lin(nr);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const auto rr = static_cast<Eigen::Index>(rest[static_cast<std::size_t>(r)]);
    lin(r) = w.lin()(rr) - 2.0 * value * w.quad()(rr, ii);
    for (Eigen::Index s = 0; s < nr; ++s) {
      quad(r, s) = w.quad()(rr, static_cast<Eigen::Index>(rest[static_cast<std::size_t>(s)]));
    }
  }
  std::vector<std::string> labels;
  for (auto j : rest) labels.push_back(w.labels()[j]);
  const double constant = w.constant() - w.quad()(ii, ii) * value * value + w.lin()(ii) * value;
  return finish(std::move(labels), w.poly().evaluate_variable(i, value), std::move(quad), std::move(lin),
                constant);
}

double overlap(const PolyGauss& a, const PolyGauss& b) {
  if (a.size() != 2 || b.size() != 2) throw ValidationError("overlap: expected single-mode functions");
  std::vector<std::string> sa = a.labels(), sb = b.labels();
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  if (sa != sb) throw ValidationError("overlap: functions live on different variables");
  return 2.0 * std::numbers::pi * integral(product(a, b));
}

}  // namespace cvfid
