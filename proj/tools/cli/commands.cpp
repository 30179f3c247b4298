#include "commands.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <ctime>
#include <cstdlib>
#include <mutex>
#include <ostream>
#include <thread>

#include "cvfid/errors.hpp"
#include "cvfid/fock.hpp"
#include "cvfid/mc_oracle.hpp"
#include "cvfid/optimize.hpp"
#include "cvfid/protocols.hpp"

namespace cvfid::cli {

namespace {

// Ensemble truncation when --nmax is not given.
constexpr double kDefaultEnsembleTail = 1e-12;

void put(Record& r, const FidelityResult& f) {
  switch (f.method) {
    case Method::analytic: r.analytic = f.value; break;
    case Method::covariance_pipeline: r.pipeline = f.value; break;
    case Method::polygauss: r.polygauss = f.value; break;
    case Method::monte_carlo:
      r.mc = f.value;
      r.mc_stderr = f.std_error;
      break;
  }
}

void put(Record& r, const McEstimate& e, std::uint64_t seed) {
  r.mc = e.mean;
  r.mc_stderr = e.std_error;
  r.seed = seed;
  r.rng = e.rng;
}

class Inputs {
 public:
  Inputs(Protocol p, std::map<std::string, double> values) : values_(std::move(values)) {
    const auto& allowed = parameter_names(p);
    for (auto& [name, v] : values_) {
      if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
        throw ValidationError("unknown parameter '" + name + "'");
      }
      v = canonical(v);
    }
  }
  double need(const std::string& name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) throw ValidationError("missing parameter '" + name + "'");
    return it->second;
  }
  std::optional<double> maybe(const std::string& name) const {
    const auto it = values_.find(name);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }
  int need_int(const std::string& name, int lo) const { return as_int(need(name), name, lo); }
  static int as_int(double v, const std::string& name, int lo) {
    if (v != std::floor(v) || v < lo || v > 1e6) {
      throw ValidationError(name + " must be an integer >= " + std::to_string(lo));
    }
    return static_cast<int>(v);
  }

 private:
  std::map<std::string, double> values_;
};

double fixed_gain(const EvalOptions& o) {
  if (!o.gain) throw ValidationError("need --gain or --optimal");
  return *o.gain;
}

// sqrt(n^2 - 1) at 12 digits, stepped down in the last digit if rounding put
// it past the pure-channel bound.
double pure_correlation(double n) {
  double k = canonical(std::sqrt(std::max(n * n - 1.0, 0.0)));
  if (k > 0.0 && n * n - k * k < 1.0 - 1e-12) {
    k = canonical(k - std::pow(10.0, std::floor(std::log10(k)) - 11.0));
  }
  return k;
}

Record teleport(const Inputs& in, const EvalOptions& o) {
  TeleportationParams p{in.need("n"), in.need("k"), in.need("vc"), 0.0};
  p.validate();
  p.g = o.optimal ? optimal_gain_teleport(p.n, p.k, p.v_c) : fixed_gain(o);
  p.validate();
  Record r;
  r.params = {{"k", p.k}, {"n", p.n}, {"vc", p.v_c}};
  r.gain = p.g;
  put(r, teleport_pipeline(p));
  if (o.optimal) r.analytic = teleport_fidelity_analytic(p.n, p.k, p.v_c);
  if (o.mc_samples > 0) {
    McConfig c;
    c.seed = o.seed;
    c.samples = o.mc_samples;
    c.params = p;
    put(r, mc_teleport(c), o.seed);
  }
  return r;
}

Record memory(const Inputs& in, const EvalOptions& o) {
  MemoryParams p{in.need("kappa"), in.maybe("squeeze").value_or(1.0), in.need("vc"), 0.0};
  p.validate();
  p.g = o.optimal ? optimal_gain_memory(p.kappa, p.v_c, p.r) : fixed_gain(o);
  p.validate();
  Record r;
  r.params = {{"kappa", p.kappa}, {"squeeze", p.r}, {"vc", p.v_c}};
  r.gain = p.g;
  put(r, memory_pipeline(p));
  if (o.optimal) r.analytic = memory_fidelity_analytic(p.kappa, p.v_c, p.r);
  if (o.mc_samples > 0) {
    McConfig c;
    c.seed = o.seed;
    c.samples = o.mc_samples;
    c.params = p;
    put(r, mc_memory(c), o.seed);
  }
  return r;
}

Record fock(const Inputs& in, const EvalOptions& o) {
  const int big_n = in.need_int("N", 0);
  const double n = in.need("n");
  const double k = in.maybe("k").value_or(pure_correlation(n));
  const double v = in.maybe("vc").value_or(0.0);
  TeleportationParams{n, k, v, 0.0}.validate();
  if (o.mc_samples > 0) throw ValidationError("Monte Carlo is not available for Fock inputs");
  auto f = [&](double g) { return displaced_fock_teleport_fidelity(big_n, n, k, g, v); };
  Record r;
  r.params = {{"N", big_n}, {"k", k}, {"n", n}, {"vc", v}};
  if (o.optimal) {
    const auto best = optimize_gain([&](double g) { return f(g).value; });
    r.gain = best.gain;
  } else {
    r.gain = fixed_gain(o);
  }
  put(r, f(*r.gain));
  if (*r.gain == 1.0) r.analytic = fock_unit_gain_fidelity(big_n, n - k);
  return r;
}

Record ensemble(const Inputs& in, const EvalOptions& o) {
  if (o.mc_samples > 0) throw ValidationError("Monte Carlo is not available for the ensemble");
  FockEnsembleParams p;
  p.lambda = in.need("lambda");
  p.delta = in.need("delta");
  if (!(p.lambda >= 0.0 && p.lambda < 1.0)) throw ValidationError("lambda must lie in [0, 1)");
  const auto nmax = in.maybe("nmax");
  p.n_max = nmax ? Inputs::as_int(*nmax, "nmax", 1) : ensemble_order_for_tail(p.lambda, kDefaultEnsembleTail);
  const auto e = fock_ensemble_fidelity(p);
  Record r;
  r.params = {{"delta", p.delta}, {"lambda", p.lambda}, {"nmax", p.n_max}};
  r.gain = 1.0;
  put(r, e.truncated_sum);
  r.analytic = e.closed_form;
  r.tail_bound = e.tail_bound;
  return r;
}

std::string utc_now() { return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr))); }

struct Failure {
  int code;
  std::string message;
};

// Maps library exceptions to exit codes.
template <class F>
std::optional<Failure> guarded(F&& f) {
  try {
    f();
  } catch (const ValidationError& e) {
    return Failure{2, e.what()};
  } catch (const NumericalError& e) {
    return Failure{3, e.what()};
  } catch (const std::exception& e) {
    return Failure{3, e.what()};
  }
  return std::nullopt;
}

struct Output {
  std::ostream& out;
  bool json = false;
  bool header_done = false;
  void emit(const Record& r) {
    if (json) {
      out << json_line(r) << '\n';
      return;
    }
    if (!header_done) {
      out << csv_header(r) << '\n';
      header_done = true;
    }
    out << csv_row(r) << '\n';
  }
};

std::uint64_t default_seed() {
  const char* env = std::getenv("CVFID_SEED");
  if (env == nullptr || *env == '\0') return 0;
  try {
    std::size_t used = 0;
    const auto s = std::stoull(env, &used);
    if (used == std::string(env).size()) return s;
  } catch (const std::exception&) {
  }
  throw ValidationError(std::string("CVFID_SEED is not an unsigned integer: '") + env + "'");
}

// Grid in row-major order (first axis slowest), evaluated on `jobs` threads
// and written strictly in grid order as soon as each prefix is complete.
int run_sweep(Protocol p, const std::map<std::string, double>& fixed, const std::vector<SweepAxis>& axes,
              const EvalOptions& options, unsigned jobs, Output& output, std::ostream& err) {
  std::vector<std::vector<double>> grids;
  std::size_t total = 1;
  for (const auto& a : axes) {
    grids.push_back(a.points());
    total *= grids.back().size();
  }
  auto point = [&](std::size_t index) {
    auto values = fixed;
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto& g = grids[a];
      values[axes[a].name] = g[index % g.size()];
      index /= g.size();
    }
    return values;
  };

  struct Slot {
    bool ready = false;
    Record record;
    std::optional<Failure> failure;
  };
  std::vector<Slot> slots(total);
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= total || stop.load()) return;
      Slot local;
      local.failure = guarded([&] { local.record = evaluate(p, point(i), options); });
      local.ready = true;
      {
        std::lock_guard lock(mutex);
        slots[i] = std::move(local);
      }
      ready.notify_all();
    }
  };
  const unsigned workers = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(total)));
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < workers; ++t) pool.emplace_back(worker);

  int code = 0;
  for (std::size_t i = 0; i < total; ++i) {
    std::unique_lock lock(mutex);
    ready.wait(lock, [&] { return slots[i].ready; });
    Slot slot = std::move(slots[i]);
    lock.unlock();
    if (slot.failure) {
      err << "error: grid point " << i << ": " << slot.failure->message << '\n';
      code = slot.failure->code;
      stop = true;
      break;
    }
    output.emit(slot.record);
    output.out.flush();
  }
  return code;
}

}  // namespace

Protocol parse_protocol(const std::string& name) {
  if (name == "teleport") return Protocol::teleport;
  if (name == "memory") return Protocol::memory;
  if (name == "fock") return Protocol::fock;
  if (name == "ensemble") return Protocol::ensemble;
  throw ValidationError("unknown protocol '" + name + "'");
}

const std::vector<std::string>& parameter_names(Protocol p) {
  static const std::vector<std::string> teleport{"n", "k", "vc", "gain"};
  static const std::vector<std::string> memory{"kappa", "vc", "squeeze", "gain"};
  static const std::vector<std::string> fock{"N", "n", "k", "vc", "gain"};
  static const std::vector<std::string> ensemble{"lambda", "delta", "nmax"};
  switch (p) {
    case Protocol::teleport: return teleport;
    case Protocol::memory: return memory;
    case Protocol::fock: return fock;
    case Protocol::ensemble: return ensemble;
  }
  return teleport;
}

Record evaluate(Protocol p, std::map<std::string, double> inputs, EvalOptions options) {
  if (const auto it = inputs.find("gain"); it != inputs.end()) {
    options.gain = canonical(it->second);
    options.optimal = false;
    inputs.erase(it);
  } else if (options.gain) {
    options.gain = canonical(*options.gain);
  }
  const Inputs in(p, std::move(inputs));
  Record r;
  switch (p) {
    case Protocol::teleport: r = teleport(in, options); break;
    case Protocol::memory: r = memory(in, options); break;
    case Protocol::fock: r = fock(in, options); break;
    case Protocol::ensemble: r = ensemble(in, options); break;
  }
  if (options.timestamp) r.timestamp = utc_now();
  return r;
}

std::vector<double> SweepAxis::points() const {
  if (start == stop) return {start};
  std::vector<double> out;
  for (int i = 0; i <= steps; ++i) out.push_back(canonical(start + (stop - start) * i / steps));
  return out;
}

SweepAxis parse_sweep(const std::string& spec) {
  std::vector<std::string> parts;
  std::size_t pos = 0;
  for (;;) {
    const auto colon = spec.find(':', pos);
    parts.push_back(spec.substr(pos, colon - pos));
    if (colon == std::string::npos) break;
    pos = colon + 1;
  }
  if (parts.size() != 4 || parts[0].empty()) {
    throw ValidationError("sweep must look like param:start:stop:steps, got '" + spec + "'");
  }
  SweepAxis a;
  a.name = parts[0];
  a.start = parse_number(parts[1], "sweep start");
  a.stop = parse_number(parts[2], "sweep stop");
  const double steps = parse_number(parts[3], "sweep steps");
  a.steps = Inputs::as_int(steps, "sweep steps", 1);
  if (a.stop < a.start) throw ValidationError("sweep stop < start for '" + a.name + "'");
  return a;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fidelity of continuous-variable teleportation and quantum memory"};
  app.name("cvfid");
  app.require_subcommand(1);

  std::string format = "csv";
  bool optimal = false, timestamp = false;
  double gain = 0.0;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::map<std::string, double> values;
  std::vector<std::string> sweeps, sets;
  std::string protocol_name;
  std::vector<CLI::Option*> gain_flags, seed_flags;

  auto value = [&](CLI::App* cmd, const std::string& name, const std::string& help, bool required) {
    auto* opt = cmd->add_option_function<double>("--" + name, [&values, name](double v) { values[name] = v; }, help);
    if (required) opt->required();
    return opt;
  };
  auto common = [&](CLI::App* cmd, bool with_gain, bool with_mc) {
    cmd->add_option("--format", format, "csv or json (JSON lines)")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--timestamp", timestamp, "add a UTC timestamp to each record");
    if (with_gain) {
      auto* g = cmd->add_option("--gain", gain, "feedback gain");
      auto* o = cmd->add_flag("--optimal", optimal, "use the fidelity-maximizing gain");
      g->excludes(o);
      gain_flags.push_back(g);
    }
    if (with_mc) {
      cmd->add_option("--mc-samples", mc_samples, "Monte Carlo samples (0 = skip)");
      seed_flags.push_back(cmd->add_option("--seed", seed, "RNG seed (default: $CVFID_SEED, else 0)"));
    }
  };

  auto* tele = app.add_subcommand("teleport", "coherent-state teleportation");
  value(tele, "n", "channel variance n >= 1", true);
  value(tele, "k", "channel correlation k", true);
  value(tele, "vc", "classical displacement spread v_c", true);
  common(tele, true, true);

  auto* mem = app.add_subcommand("memory", "light-to-atom quantum memory");
  value(mem, "kappa", "interaction strength", true);
  value(mem, "vc", "classical displacement spread v_c", true);
  value(mem, "squeeze", "atomic squeezing r >= 1 (default 1)", false);
  common(mem, true, true);

  auto* fk = app.add_subcommand("fock", "teleportation of a Fock state");
  value(fk, "N", "photon number", true);
  value(fk, "n", "channel variance", true);
  value(fk, "k", "channel correlation (default sqrt(n^2 - 1), a pure channel)", false);
  value(fk, "vc", "classical displacement spread (default 0)", false);
  common(fk, true, false);

  auto* ens = app.add_subcommand("ensemble", "unit-gain teleportation of a thermal-like Fock ensemble");
  value(ens, "lambda", "ensemble ratio in [0, 1)", true);
  value(ens, "delta", "channel EPR variance n - k", true);
  value(ens, "nmax", "truncation order (default: tail below 1e-12)", false);
  common(ens, false, false);

  auto* sw = app.add_subcommand("sweep", "Cartesian parameter sweep");
  sw->add_option("--protocol", protocol_name, "teleport, memory, fock or ensemble")->required();
  sw->add_option("--sweep", sweeps, "param:start:stop:steps (repeatable)")->required();
  sw->add_option("--set", sets, "fixed param=value (repeatable)");
  sw->add_option("--jobs", jobs, "grid points evaluated concurrently")->check(CLI::PositiveNumber);
  common(sw, true, true);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  Output output{out, format == "json"};
  EvalOptions options;
  options.optimal = optimal;
  options.mc_samples = mc_samples;
  options.timestamp = timestamp;
  for (auto* g : gain_flags) {
    if (g->count() > 0) options.gain = gain;
  }

  int code = 0;
  const auto failure = guarded([&] {
    bool seeded = false;
    for (auto* s : seed_flags) seeded |= s->count() > 0;
    options.seed = seeded ? seed : default_seed();

    if (sw->parsed()) {
      const Protocol p = parse_protocol(protocol_name);
      std::map<std::string, double> fixed;
      for (const auto& s : sets) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects param=value, got '" + s + "'");
        fixed[s.substr(0, eq)] = parse_number(s.substr(eq + 1), s.substr(0, eq));
      }
      std::vector<SweepAxis> axes;
      for (const auto& s : sweeps) axes.push_back(parse_sweep(s));
      code = run_sweep(p, fixed, axes, options, jobs, output, err);
      return;
    }
    Protocol p = Protocol::teleport;
    if (mem->parsed()) p = Protocol::memory;
    if (fk->parsed()) p = Protocol::fock;
    if (ens->parsed()) p = Protocol::ensemble;
    output.emit(evaluate(p, values, options));
  });
  if (failure) {
    err << "error: " << failure->message << '\n';
    return failure->code;
  }
  return code;
}

}  // namespace cvfid::cli
