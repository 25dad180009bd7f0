#include "fifd/simharness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace fifd {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(std::string_view text, std::string_view what) {
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw ConfigError("cannot parse " + std::string(what) + " from '" + std::string(text) + "'");
  }
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

double AlgorithmSpec::resolved_lambda(double sigma) const {
  return lambda_per_sigma ? lambda * sigma : lambda;
}

std::string AlgorithmSpec::name() const {
  switch (kind) {
    case Kind::fifd_ols: return "fifd_ols";
    case Kind::fifd_adaptive_ridge: return "fifd_adaptive_ridge";
    case Kind::switching_ridge: return "switching_ridge";
    case Kind::fixed_ridge:
      return "fixed_ridge(" + format_number(lambda) + (lambda_per_sigma ? "*sigma)" : ")");
  }
  return "unknown";
}

AlgorithmSpec AlgorithmSpec::parse(std::string_view text) {
  text = trim(text);
  AlgorithmSpec a;
  if (text == "fifd_ols") {
    a.kind = Kind::fifd_ols;
  } else if (text == "fifd_adaptive_ridge") {
    a.kind = Kind::fifd_adaptive_ridge;
  } else if (text == "switching_ridge") {
    a.kind = Kind::switching_ridge;
  } else if (text.starts_with("fixed_ridge(") && text.ends_with(")")) {
    a.kind = Kind::fixed_ridge;
    std::string_view arg = trim(text.substr(12, text.size() - 13));
    if (arg.ends_with("*sigma")) {
      a.lambda_per_sigma = true;
      arg = trim(arg.substr(0, arg.size() - 6));
    }
    a.lambda = parse_number(arg, "fixed ridge lambda");
    if (!(a.lambda >= 0.0) || !std::isfinite(a.lambda)) {
      throw ConfigError("fixed ridge lambda must be finite and non-negative");
    }
  } else {
    throw ConfigError("unknown algorithm '" + std::string(text) + "'");
  }
  return a;
}

void validate(const SimConfig& c) {
  if (c.d < 1) throw ConfigError("d must be at least 1");
  if (c.s < 2) throw ConfigError("s must be at least 2");
  if (c.t_horizon <= static_cast<long>(c.s)) throw ConfigError("t_horizon must exceed s");
  if (!(c.delta > 0.0 && c.delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(c.sigma >= 0.0) || !std::isfinite(c.sigma)) throw ConfigError("sigma must be non-negative");
  if (!(c.L >= 1.0)) throw ConfigError("contexts have unit norm, so L must be at least 1");
  if (c.noise.kind == NoiseKind::student_t && !(c.noise.df > 2.0)) {
    throw ConfigError("student_t noise needs df > 2");
  }
  if (c.schedule.kind == Schedule::Kind::add_k_delete_1 && c.schedule.k < 1) {
    throw ConfigError("k must be at least 1");
  }
  if (c.algorithms.empty()) throw ConfigError("no algorithms configured");
  if (c.runs < 1) throw ConfigError("runs must be at least 1");
  if (c.theta_inf_norm && !(*c.theta_inf_norm > 0.0)) {
    throw ConfigError("theta_inf_norm must be positive");
  }
  if (c.gram.refresh_interval < 1) throw ConfigError("refresh_interval must be positive");
}

RunStreams RunStreams::for_seed(std::uint64_t seed_run, std::uint64_t truth_seed) {
  auto make = [](std::uint64_t seed, std::uint32_t tag) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), tag};
    return Rng(seq);
  };
  return RunStreams{make(seed_run, 1), make(truth_seed, 2), make(seed_run, 3)};
}

Vector gen_context(Design design, Index d, Rng& rng) {
  if (design == Design::basis_uniform) {
    std::uniform_int_distribution<Index> pick(0, d - 1);
    return Vector::Unit(d, pick(rng));
  }
  std::normal_distribution<double> z;
  Vector x(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Index i = 0; i < d; ++i) x(i) = z(rng);
    norm = x.norm();
  }
  return x / norm;
}

TruthProfile gen_truth(Index d, Rng& rng) {
  std::normal_distribution<double> z;
  Vector t(d);
  double norm = 0.0;
  while (norm == 0.0) {
    for (Index i = 0; i < d; ++i) t(i) = z(rng);
    norm = t.norm();
  }
  return TruthProfile::from(t / norm);
}

double gen_noise(const NoiseModel& noise, double sigma, Rng& rng) {
  if (noise.kind == NoiseKind::student_t) {
    if (!(noise.df > 2.0)) throw ConfigError("student_t noise needs df > 2");
    std::student_t_distribution<double> t(noise.df);
    const double e = t(rng);
    return noise.scale_by_sigma ? sigma * e : e;
  }
  if (sigma == 0.0) return 0.0;
  std::normal_distribution<double> z(0.0, sigma);
  return z(rng);
}

double noise_sd(const NoiseModel& noise, double sigma) {
  if (noise.kind == NoiseKind::gaussian) return sigma;
  const double sd = std::sqrt(noise.df / (noise.df - 2.0));
  return noise.scale_by_sigma ? sigma * sd : sd;
}

std::uint64_t run_seed(const SimConfig& cfg, int run_index) {
  return cfg.base_seed + static_cast<std::uint64_t>(run_index);
}

std::size_t stream_length(const SimConfig& cfg) {
  const auto steps = static_cast<std::size_t>(cfg.t_horizon) - cfg.s;
  const auto k = cfg.schedule.kind == Schedule::Kind::fifd ? 1u
                                                           : static_cast<std::size_t>(cfg.schedule.k);
  return cfg.s + steps * k;
}

Stream make_stream(const SimConfig& cfg, int run_index) {
  const std::uint64_t seed = run_seed(cfg, run_index);
  RunStreams rs = RunStreams::for_seed(seed, cfg.redraw_truth ? seed : cfg.base_seed);
  Stream out;
  out.truth = gen_truth(cfg.d, rs.truth);
  const std::size_t n = stream_length(cfg);
  out.obs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Vector x = gen_context(cfg.design, cfg.d, rs.design);
    const double y = out.truth.theta_star.dot(x) + gen_noise(cfg.noise, cfg.sigma, rs.noise);
    out.obs.push_back(Observation{std::move(x), y});
  }
  return out;
}

namespace {

void check_finite(const StepRecord& r, const RunTrace& trace) {
  const double vals[] = {r.y_hat, r.pseudo_regret, r.l2_error, r.lambda, r.min_eig, r.frt, r.beta};
  for (double v : vals) {
    if (!std::isfinite(v)) {
      throw NumericalError("run " + std::to_string(trace.run_id) + " (" + trace.algorithm +
                           "): non-finite value at t=" + std::to_string(r.t));
    }
  }
}

}  // namespace

RunTrace run_on_stream(const SimConfig& cfg, const AlgorithmSpec& alg, const Stream& stream,
                       int run_id) {
  validate(cfg);
  if (stream.obs.size() < stream_length(cfg)) throw StructuralError("stream shorter than schedule");
  RunTrace trace;
  trace.run_id = run_id;
  trace.algorithm = alg.name();
  trace.seed = run_seed(cfg, run_id);
  trace.truth = stream.truth;

  const bool fifd = cfg.schedule.kind == Schedule::Kind::fifd;
  const std::size_t k = fifd ? 1 : static_cast<std::size_t>(cfg.schedule.k);
  const std::size_t evictions = fifd ? 0 : 1;
  WindowBuffer buf(fifd ? cfg.s : WindowBuffer::kUnbounded);
  GramState gram = GramState::empty(cfg.d, 0.0, cfg.gram);
  const std::span<const Observation> all(stream.obs);
  update_window(buf, gram, all.first(cfg.s), 0);

  const StepParams ols_params{noise_sd(cfg.noise, cfg.sigma), cfg.delta};
  RidgeParams ridge_params;
  ridge_params.sigma = ols_params.sigma;
  ridge_params.delta = cfg.delta;
  ridge_params.theta_inf_norm = cfg.theta_inf_norm.value_or(stream.truth.inf_norm);
  const double fixed_lambda = alg.resolved_lambda(cfg.sigma);

  OlsState ols;
  RidgeState ridge;
  SwitchMode mode = SwitchMode::ridge;
  const long steps = cfg.t_horizon - static_cast<long>(cfg.s);
  trace.steps.reserve(static_cast<std::size_t>(steps));
  double cum = 0.0;
  for (long j = 0; j < steps; ++j) {
    const auto arrivals = all.subspan(cfg.s + static_cast<std::size_t>(j) * k, k);
    StepRecord rec;
    switch (alg.kind) {
      case AlgorithmSpec::Kind::fifd_ols:
        rec = fifd_ols_step(buf, gram, ols, arrivals, evictions, stream.truth.theta_star, ols_params);
        break;
      case AlgorithmSpec::Kind::fifd_adaptive_ridge:
        rec = fifd_ridge_step(buf, gram, ridge, arrivals, evictions, stream.truth, ridge_params);
        break;
      case AlgorithmSpec::Kind::fixed_ridge:
        rec = fixed_ridge_step(buf, gram, ridge, arrivals, evictions, stream.truth, ridge_params,
                               fixed_lambda);
        break;
      case AlgorithmSpec::Kind::switching_ridge: {
        const SwitchMode next = switching_step(mode, buf.size(), cfg.d);
        if (next != mode) trace.switch_t = static_cast<long>(cfg.s) + 1 + j;
        mode = next;
        if (mode == SwitchMode::ridge) {
          rec = fifd_ridge_step(buf, gram, ridge, arrivals, evictions, stream.truth, ridge_params);
        } else {
          rec = fifd_ols_step(buf, gram, ols, arrivals, evictions, stream.truth.theta_star,
                              ols_params);
        }
        break;
      }
    }
    rec.t = static_cast<long>(cfg.s) + 1 + j;
    cum += rec.pseudo_regret;
    rec.cum_regret = cum;
    check_finite(rec, trace);
    trace.steps.push_back(rec);
  }
  return trace;
}

RunTrace run_schedule(const SimConfig& cfg, const AlgorithmSpec& alg, int run_index) {
  return run_on_stream(cfg, alg, make_stream(cfg, run_index), run_index);
}

void run_replications(const SimConfig& cfg, int threads,
                      const std::function<void(int, std::vector<RunTrace>&)>& consume) {
  validate(cfg);
  const int workers = std::clamp(threads, 1, cfg.runs);
  std::vector<std::optional<std::vector<RunTrace>>> slots(static_cast<std::size_t>(cfg.runs));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(cfg.runs));
  std::atomic<int> next{0};
  std::atomic<bool> abort{false};
  std::mutex mu;
  int next_consume = 0;

  auto work = [&] {
    for (int r = next++; r < cfg.runs && !abort; r = next++) {
      std::vector<RunTrace> out;
      try {
        const Stream stream = make_stream(cfg, r);
        for (const auto& alg : cfg.algorithms) out.push_back(run_on_stream(cfg, alg, stream, r));
      } catch (const NumericalError& e) {
        const std::string what = e.what();
        errors[static_cast<std::size_t>(r)] =
            what.starts_with("run ")
                ? std::current_exception()
                : std::make_exception_ptr(NumericalError("run " + std::to_string(r) + ": " + what));
        abort = true;
        return;
      } catch (...) {
        errors[static_cast<std::size_t>(r)] = std::current_exception();
        abort = true;
        return;
      }
      std::lock_guard lock(mu);
      slots[static_cast<std::size_t>(r)] = std::move(out);
      while (next_consume < cfg.runs && slots[static_cast<std::size_t>(next_consume)]) {
        auto& ready = *slots[static_cast<std::size_t>(next_consume)];
        try {
          consume(next_consume, ready);
        } catch (...) {
          errors[static_cast<std::size_t>(next_consume)] = std::current_exception();
          abort = true;
          return;
        }
        slots[static_cast<std::size_t>(next_consume)].reset();
        ++next_consume;
      }
    }
  };

  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::pseudo_regret: return "pseudo_regret";
    case Metric::cum_regret: return "cum_regret";
    case Metric::abs_loss: return "abs_loss";
    case Metric::l2_error: return "l2_error";
    case Metric::lambda: return "lambda";
    case Metric::rank: return "rank";
    case Metric::min_eig: return "min_eig";
    case Metric::frt: return "frt";
    case Metric::beta: return "beta";
  }
  return "unknown";
}

Metric parse_metric(std::string_view name) {
  for (Metric m : {Metric::pseudo_regret, Metric::cum_regret, Metric::abs_loss, Metric::l2_error,
                   Metric::lambda, Metric::rank, Metric::min_eig, Metric::frt, Metric::beta}) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown metric '" + std::string(name) + "'");
}

double metric_value(const StepRecord& r, Metric m) {
  switch (m) {
    case Metric::pseudo_regret: return r.pseudo_regret;
    case Metric::cum_regret: return r.cum_regret;
    case Metric::abs_loss: return r.abs_loss;
    case Metric::l2_error: return r.l2_error;
    case Metric::lambda: return r.lambda;
    case Metric::rank: return r.rank;
    case Metric::min_eig: return r.min_eig;
    case Metric::frt: return r.frt;
    case Metric::beta: return r.beta;
  }
  return 0.0;
}

void CurveAccumulator::add(std::span<const double> values) {
  if (runs_ == 0) {
    mean_.assign(values.size(), 0.0);
    m2_.assign(values.size(), 0.0);
  } else if (values.size() != mean_.size()) {
    throw StructuralError("aggregate: traces have different lengths");
  }
  ++runs_;
  const double n = static_cast<double>(runs_);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double dlt = values[i] - mean_[i];
    mean_[i] += dlt / n;
    m2_[i] += dlt * (values[i] - mean_[i]);
  }
}

AggregateCurve CurveAccumulator::curve() const {
  AggregateCurve c;
  c.runs = runs_;
  c.mean = mean_;
  c.std_error.assign(mean_.size(), 0.0);
  c.stderr_defined = runs_ >= 2;
  if (c.stderr_defined) {
    const double n = static_cast<double>(runs_);
    for (std::size_t i = 0; i < m2_.size(); ++i) {
      c.std_error[i] = std::sqrt(std::max(0.0, m2_[i] / (n - 1.0)) / n);
    }
  }
  return c;
}

AggregateCurve aggregate(std::span<const RunTrace> traces, Metric metric) {
  if (traces.empty()) throw StructuralError("aggregate needs at least one trace");
  CurveAccumulator acc;
  std::vector<double> vals;
  for (const auto& t : traces) {
    vals.clear();
    for (const auto& r : t.steps) vals.push_back(metric_value(r, metric));
    acc.add(vals);
  }
  return acc.curve();
}

SlopeDiagnostics slope_diagnostics(const AggregateCurve& cumulative, std::size_t burn_in) {
  const auto& y = cumulative.mean;
  if (y.size() < burn_in + 100) throw StructuralError("slope_diagnostics needs 100 points after burn-in");
  const std::size_t n = y.size();
  const std::size_t m = n - burn_in;
  const std::size_t dec = std::max<std::size_t>(1, m / 10);
  auto inst = [&](std::size_t i) { return i == 0 ? y[0] : y[i] - y[i - 1]; };
  double early = 0.0;
  double late = 0.0;
  for (std::size_t i = 0; i < dec; ++i) {
    early += inst(burn_in + i);
    late += inst(n - dec + i);
  }
  SlopeDiagnostics out;
  if (late != 0.0) out.late_early_ratio = late / early;

  const std::size_t first = burn_in + m / 2;
  const double cnt = static_cast<double>(n - first);
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    mx += static_cast<double>(i);
    my += y[i];
  }
  mx /= cnt;
  my /= cnt;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double dx = static_cast<double>(i) - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  out.linear_r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return out;
}

}  // namespace fifd
