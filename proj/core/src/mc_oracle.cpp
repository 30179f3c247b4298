#include "cvfid/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <functional>
#include <numbers>
#include <thread>
#include <vector>

#include "cvfid/rng.hpp"

namespace cvfid {

void RunningStats::push(double x) {
  ++count;
  const double delta = x - mean;
  mean += delta / static_cast<double>(count);
  m2 += delta * (x - mean);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.count == 0) return;
  if (count == 0) {
    *this = other;
    return;
  }
  const auto n = static_cast<double>(count + other.count);
  const double delta = other.mean - mean;
  mean += delta * static_cast<double>(other.count) / n;
  m2 += other.m2 + delta * delta * static_cast<double>(count) * static_cast<double>(other.count) / n;
  count += other.count;
}

double RunningStats::sample_variance() const {
  return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
}

double RunningStats::std_error() const {
  return count > 0 ? std::sqrt(sample_variance() / static_cast<double>(count)) : 0.0;
}

namespace {

// One sample drawn from stream-specific randomness; returns its fidelity.
using Sampler = std::function<double(StreamRng&)>;

McEstimate run_batches(const McConfig& config, const Sampler& sample) {
  if (config.samples < 1) throw ValidationError("Monte Carlo needs at least one sample");
  if (config.batch_size < 1) throw ValidationError("batch size must be >= 1");
  const std::size_t batches = (config.samples + config.batch_size - 1) / config.batch_size;
  std::vector<RunningStats> stats(batches);

  unsigned threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : config.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, batches));

  std::vector<std::exception_ptr> errors(threads);
  auto worker = [&](unsigned t) {
    try {
      for (std::size_t b = t; b < batches; b += threads) {
        StreamRng rng(config.seed, b);
        const std::size_t begin = b * config.batch_size;
        const std::size_t end = std::min(config.samples, begin + config.batch_size);
        for (std::size_t s = begin; s < end; ++s) {
          const double f = sample(rng);
          if (!std::isfinite(f)) {
            throw NumericalError("Monte Carlo: non-finite fidelity at sample " + std::to_string(s) +
                                 " (stream " + std::to_string(b) + ")");
          }
          stats[b].push(f);
        }
      }
    } catch (...) {
      errors[t] = std::current_exception();
    }
  };

  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker, t);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunningStats total;
  for (const auto& s : stats) total.merge(s);
  return McEstimate{total.mean, total.std_error(), total.count, std::string(StreamRng::kDescription)};
}

Eigen::Matrix2d cholesky_2x2(const Eigen::Matrix2d& variance) {
  Eigen::LLT<Eigen::Matrix2d> llt(variance);
  if (llt.info() != Eigen::Success) throw NumericalError("Monte Carlo: outcome covariance not positive definite");
  return llt.matrixL();
}

}  // namespace

McEstimate mc_teleport(const McConfig& config) {
  const auto& params = std::get<TeleportationParams>(config.params);
  params.validate();

  const GaussianState mode3(quantum_mode(vars::x3, vars::p3, "3"), Eigen::Vector2d::Zero(),
                            Eigen::Matrix2d::Identity());
  const GaussianState joint = direct_sum(epr_covariance(params.n, params.k), mode3);
  const LinearMap basis = teleport_basis_change(joint.labels());
  const GaussianState rotated = apply_map(joint, basis);
  const MeasurementUpdate update(rotated, MeasurementSpec{{vars::p_plus, vars::x_minus}});

  const auto ip = static_cast<Eigen::Index>(rotated.index_of(vars::p_plus));
  const auto ix = static_cast<Eigen::Index>(rotated.index_of(vars::x_minus));
  Eigen::Matrix2d outcome_variance;
  outcome_variance << rotated.cov()(ip, ip), rotated.cov()(ip, ix), rotated.cov()(ix, ip), rotated.cov()(ix, ix);
  const Eigen::Matrix2d outcome_factor = cholesky_2x2(0.5 * outcome_variance);

  const Eigen::Matrix2d output_cov = update.conditioned_cov();
  const Eigen::MatrixXd to_rotated = basis.matrix();
  const double spread = std::sqrt(0.5 * params.v_c);
  const double gain = params.g * std::numbers::sqrt2;
  const auto i3x = static_cast<Eigen::Index>(joint.index_of(vars::x3));
  const auto i3p = static_cast<Eigen::Index>(joint.index_of(vars::p3));

  return run_batches(config, [&](StreamRng& rng) {
    const double x_cl = spread * rng.normal();
    const double p_cl = spread * rng.normal();
    Eigen::VectorXd prior = Eigen::VectorXd::Zero(6);
    prior(i3x) = x_cl;
    prior(i3p) = p_cl;
    const Eigen::VectorXd mean = to_rotated * prior;

    const Eigen::Vector2d z(rng.normal(), rng.normal());
    const Eigen::Vector2d outcome = Eigen::Vector2d(mean(ip), mean(ix)) + outcome_factor * z;
    const double eta = outcome(0);
    const double xi = outcome(1);

    const Eigen::VectorXd conditioned = update.conditioned_mean(mean, outcome);
    const double x1 = conditioned(0) - gain * xi;
    const double p1 = conditioned(1) + gain * eta;
    return fidelity_vs_coherent(output_cov, Eigen::Vector2d(x1 - x_cl, p1 - p_cl));
  });
}

McEstimate mc_memory(const McConfig& config) {
  const auto& params = std::get<MemoryParams>(config.params);
  params.validate();

  const Labels labels =
      concat(quantum_mode(vars::x_atom, vars::p_atom, "A"), quantum_mode(vars::x_light, vars::p_light, "L"));
  const GaussianState initial(labels, Eigen::VectorXd::Zero(4),
                              Eigen::Vector4d(1.0 / params.r, params.r, 1.0, 1.0).asDiagonal());
  const LinearMap interaction = memory_interaction(labels, params.kappa);
  const GaussianState coupled = apply_map(initial, interaction);
  const MeasurementUpdate update(coupled, MeasurementSpec{{vars::x_light}});

  const auto il = static_cast<Eigen::Index>(coupled.index_of(vars::x_light));
  const double outcome_sd = std::sqrt(0.5 * coupled.cov()(il, il));
  const Eigen::Matrix2d output_cov = update.conditioned_cov();
  const Eigen::MatrixXd interaction_matrix = interaction.matrix();
  const double spread = std::sqrt(0.5 * params.v_c);
  const auto ixl = static_cast<Eigen::Index>(index_of(labels, vars::x_light));
  const auto ipl = static_cast<Eigen::Index>(index_of(labels, vars::p_light));

  return run_batches(config, [&](StreamRng& rng) {
    const double x_cl = spread * rng.normal();
    const double p_cl = spread * rng.normal();
    Eigen::VectorXd prior = Eigen::VectorXd::Zero(4);
    prior(ixl) = x_cl;
    prior(ipl) = p_cl;
    const Eigen::VectorXd mean = interaction_matrix * prior;

    const double xi = mean(il) + outcome_sd * rng.normal();
    const Eigen::VectorXd conditioned = update.conditioned_mean(mean, Eigen::VectorXd::Constant(1, xi));
    const double x_atom = conditioned(0);
    const double p_atom = conditioned(1) - params.g * xi;
    // Target: x_A carries p_cl, p_A carries -x_cl.
    return fidelity_vs_coherent(output_cov, Eigen::Vector2d(x_atom - p_cl, p_atom + x_cl));
  });
}

McEstimate run_mc(const McConfig& config) {
  return config.protocol() == McProtocol::teleport ? mc_teleport(config) : mc_memory(config);
}

}  // namespace cvfid
