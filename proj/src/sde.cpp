#include "minorlab/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <ostream>

#include "minorlab/rng.hpp"

namespace minorlab {

void SimConfig::validate(std::size_t d) const {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("eps must lie in (0,1)");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw std::invalid_argument("t_end must be finite and >= 0");
  if (!(dt_phys > 0.0) || !std::isfinite(dt_phys)) throw std::invalid_argument("dt_phys must be positive");
  if (n_traj < 1) throw std::invalid_argument("n_traj must be >= 1");
  if (x0.empty()) throw std::invalid_argument("x0 is empty");
  if (x0.size() != 1 && x0.size() != n_traj) throw std::invalid_argument("x0 needs one state or one per trajectory");
  for (const auto& x : x0) {
    if (x.size() != d) throw std::invalid_argument("x0 dimension mismatch");
    for (double v : x)
      if (!std::isfinite(v)) throw std::invalid_argument("x0 is not finite");
  }
  if (static_cast<double>(steps()) > 1e12) throw std::invalid_argument("physical step count is too large");
}

std::size_t SimConfig::steps() const {
  const double n = std::ceil(t_end / (eps * dt_phys) - 1e-9);
  return n < 1.0 ? (t_end > 0 ? 1 : 0) : static_cast<std::size_t>(n);
}

std::uint64_t SimConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) h = (h ^ b[i]) * 0x100000001b3ULL;
  };
  for (double v : {eps, t_end, dt_phys, escape_level, stability_fraction}) mix(&v, sizeof v);
  mix(&n_traj, sizeof n_traj);
  mix(&seed, sizeof seed);
  const std::uint8_t z = zero_noise;
  mix(&z, 1);
  for (const auto& x : x0)
    for (double v : x) mix(&v, sizeof v);
  return h;
}

std::size_t EndpointSet::n_escaped() const {
  return static_cast<std::size_t>(std::count(escaped.begin(), escaped.end(), 1));
}

double default_dt_phys(const ModelSpec& m) {
  double norm = 0.0;
  for (const auto& [k, v] : m.params) norm = std::max(norm, std::fabs(v.get_d()));
  return 1e-3 * std::min(1.0, norm > 0 ? 1.0 / norm : 1.0);
}

namespace {

struct Kernel {
  std::size_t d = 0;
  bool linear = false;
  std::vector<double> A, b;  // affine drift when linear
  symbolic::CompiledField drift;
  bool additive = true;
  std::vector<std::vector<double>> g_const;  // sqrt(2 eps s_j) w_j
  std::vector<symbolic::CompiledField> g_field;
  std::vector<double> g_scale;
  symbolic::CompiledPoly H;

  void f(const double* x, double* out) const {
    if (linear) {
      for (std::size_t i = 0; i < d; ++i) {
        double acc = b[i];
        const double* row = A.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) acc += row[j] * x[j];
        out[i] = acc;
      }
    } else {
      drift(x, out);
    }
  }
};

Kernel make_kernel(const ModelSpec& m, double eps) {
  Kernel K;
  K.d = m.d;
  const VectorField X = m.drift();
  K.linear = true;
  for (const auto& c : X.components()) K.linear = K.linear && c.degree() <= 1;
  if (K.linear) {
    K.A.assign(m.d * m.d, 0.0);
    K.b.assign(m.d, 0.0);
    for (std::size_t i = 0; i < m.d; ++i)
      for (const auto& [e, c] : X[i].terms()) {
        std::size_t var = m.d;
        for (std::size_t j = 0; j < m.d; ++j)
          if (e[j]) var = j;
        const double v = c.get_d() * std::pow(eps, static_cast<double>(e[m.d]));
        if (var == m.d)
          K.b[i] += v;
        else
          K.A[i * m.d + var] += v;
      }
  } else {
    K.drift = symbolic::CompiledField(X, eps);
  }
  for (const auto& z : m.Zs) {
    if (z.is_zero()) continue;
    const double scale = std::sqrt(2.0 * eps * z.scale_sq.get_d());
    if (z.field.is_x_constant()) {
      std::vector<double> zero(m.d, 0.0), w(m.d);
      symbolic::CompiledField(z.field, eps)(zero.data(), w.data());
      for (auto& v : w) v *= scale;
      K.g_const.push_back(std::move(w));
    } else {
      K.additive = false;
      K.g_field.emplace_back(z.field, eps);
      K.g_scale.push_back(scale);
    }
  }
  K.H = symbolic::CompiledPoly(m.H, eps);
  return K;
}

struct Failure {
  std::atomic<bool> flag{false};
  std::string what;
  std::size_t traj = std::numeric_limits<std::size_t>::max(), step = 0;

  void record(const std::string& w, std::size_t t, std::size_t s) {
#pragma omp critical(minorlab_sim_failure)
    {
      if (t < traj) {
        what = w;
        traj = t;
        step = s;
      }
    }
    flag.store(true, std::memory_order_relaxed);
  }
};

// Stochastic Heun predictor-corrector; the Stratonovich-consistent scheme for
// both additive and multiplicative noise.
void run_trajectory(const Kernel& K, const SimConfig& cfg, std::size_t traj, double T_phys, double* x,
                    std::uint8_t& escaped, Failure& fail) {
  const std::size_t d = K.d;
  std::size_t n = static_cast<std::size_t>(std::ceil(T_phys / cfg.dt_phys - 1e-9));
  if (T_phys > 0 && n == 0) n = 1;
  if (n == 0) return;
  const double h = T_phys / static_cast<double>(n), sh = std::sqrt(h);
  const std::size_t k_const = K.g_const.size(), k_field = K.g_field.size();
  std::vector<double> f0(d), f1(d), xt(d), xn(d), dW(k_const + k_field), g0(d * k_field), g1(d * k_field);
  CounterStream rng(cfg.seed, StreamPurpose::Increments, traj);
  double Hx = K.H(x);
  for (std::size_t step = 0; step < n; ++step) {
    K.f(x, f0.data());
    if (step % 64 == 0) {
      for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] + h * f0[i];
      const double dH = std::fabs(K.H(xt.data()) - Hx);
      if (!(dH <= cfg.stability_fraction * std::max(1.0, std::fabs(Hx)))) {
        fail.record("dt stability violation: one drift step changes H by " + std::to_string(dH), traj, step);
        return;
      }
    }
    for (auto& w : dW) w = cfg.zero_noise ? 0.0 : sh * rng.next_normal();
    for (std::size_t i = 0; i < d; ++i) xt[i] = x[i] + h * f0[i];
    for (std::size_t j = 0; j < k_const; ++j)
      for (std::size_t i = 0; i < d; ++i) xt[i] += K.g_const[j][i] * dW[j];
    for (std::size_t j = 0; j < k_field; ++j) {
      K.g_field[j](x, g0.data() + j * d);
      for (std::size_t i = 0; i < d; ++i) xt[i] += K.g_scale[j] * g0[j * d + i] * dW[k_const + j];
    }
    K.f(xt.data(), f1.data());
    for (std::size_t i = 0; i < d; ++i) xn[i] = x[i] + 0.5 * h * (f0[i] + f1[i]);
    for (std::size_t j = 0; j < k_const; ++j)
      for (std::size_t i = 0; i < d; ++i) xn[i] += K.g_const[j][i] * dW[j];
    for (std::size_t j = 0; j < k_field; ++j) {
      K.g_field[j](xt.data(), g1.data() + j * d);
      for (std::size_t i = 0; i < d; ++i)
        xn[i] += 0.5 * K.g_scale[j] * (g0[j * d + i] + g1[j * d + i]) * dW[k_const + j];
    }
    for (std::size_t i = 0; i < d; ++i)
      if (!std::isfinite(xn[i])) {
        fail.record("non-finite state", traj, step);
        return;
      }
    const double Hn = K.H(xn.data());
    if (Hn > cfg.escape_level) {
      escaped = 1;
      return;
    }
    std::memcpy(x, xn.data(), d * sizeof(double));
    Hx = Hn;
  }
}

EndpointSet simulate_impl(const ModelSpec& m, const SimConfig& cfg, std::span<const double> t_end, Exec exec) {
  cfg.validate(m.d);
  if (t_end.size() != cfg.n_traj) throw std::invalid_argument("t_end list must have n_traj entries");
  const Kernel K = make_kernel(m, cfg.eps);
  EndpointSet out;
  out.model_name = m.name;
  out.config_hash = cfg.hash();
  out.dim = m.d;
  out.points.resize(cfg.n_traj * m.d);
  out.escaped.assign(cfg.n_traj, 0);
  Failure fail;
  const std::size_t N = cfg.n_traj;
  auto body = [&](std::size_t i) {
    if (fail.flag.load(std::memory_order_relaxed)) return;
    const auto& start = cfg.x0.size() == 1 ? cfg.x0[0] : cfg.x0[i];
    double* x = out.points.data() + i * m.d;
    std::copy(start.begin(), start.end(), x);
    run_trajectory(K, cfg, i, t_end[i] / cfg.eps, x, out.escaped[i], fail);
  };
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < N; ++i) body(i);
  } else {
    for (std::size_t i = 0; i < N; ++i) body(i);
  }
  if (fail.flag.load()) throw SimulationError(fail.what, fail.traj, fail.step);
  return out;
}

}  // namespace

EndpointSet simulate_ensemble(const ModelSpec& m, const SimConfig& cfg, Exec exec) {
  std::vector<double> t(cfg.n_traj, cfg.t_end);
  return simulate_impl(m, cfg, t, exec);
}

EndpointSet simulate_to_times(const ModelSpec& m, const SimConfig& cfg, std::span<const double> t_end, Exec exec) {
  for (double t : t_end)
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("per-trajectory horizon must be finite and >= 0");
  return simulate_impl(m, cfg, t_end, exec);
}

void write_endpoints_csv(const EndpointSet& e, std::ostream& out) {
  out << "traj_id";
  for (std::size_t j = 0; j < e.dim; ++j) out << ",x" << j + 1;
  out << ",escaped\n";
  char buf[40];
  for (std::size_t i = 0; i < e.n_traj(); ++i) {
    out << i;
    for (double v : e.point(i)) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << ',' << int(e.escaped[i]) << '\n';
  }
}

}  // namespace minorlab
