#include "energy/asymptotics.hpp"

#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include "energy/errors.hpp"
#include "energy/parallel.hpp"

namespace energy {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) acc += a[k] * b[k];
  return acc;
}

} // namespace

CharacteristicFunction normal_cf(SquareMatrix cov, std::vector<double> mean) {
  if (mean.empty()) mean.assign(cov.size(), 0.0);
  if (mean.size() != cov.size()) throw ShapeError("normal_cf: mean and covariance sizes differ");
  return [cov = std::move(cov), mean = std::move(mean)](std::span<const double> t) {
    if (t.size() != mean.size()) throw ShapeError("normal_cf: argument has wrong dimension");
    double quad = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t j = 0; j < t.size(); ++j) quad += t[i] * cov(i, j) * t[j];
    }
    return std::polar(std::exp(-0.5 * quad), dot(t, mean));
  };
}

std::complex<double> ecf(const DataMatrix& sample, std::span<const double> t) {
  if (t.size() != sample.cols()) throw ShapeError("ecf: argument has wrong dimension");
  if (sample.rows() == 0) throw EmptyInputError("ecf: empty sample");
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < sample.rows(); ++i) {
    const double a = dot(t, sample.row(i));
    re += std::cos(a);
    im += std::sin(a);
  }
  const double n = static_cast<double>(sample.rows());
  return {re / n, im / n};
}

namespace {

// 15-point Kronrod nodes on [-1, 1] (non-negative half) with weights; the
// embedded 7-point Gauss rule uses the odd-indexed nodes.
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

class EcfGap {
public:
  EcfGap(std::span<const double> x, std::span<const double> y) {
    double center = 0.0;
    for (double v : x) center += v;
    for (double v : y) center += v;
    center /= static_cast<double>(x.size() + y.size());
    // Shifting both samples changes each ECF by the same unit factor, which
    // leaves |phi_x - phi_y| unchanged and reduces cancellation near 0.
    for (double v : x) x_.push_back(v - center);
    for (double v : y) y_.push_back(v - center);
    double mx = 0.0;
    double my = 0.0;
    for (double v : x_) mx += v;
    for (double v : y_) my += v;
    mx /= static_cast<double>(x_.size());
    my /= static_cast<double>(y_.size());
    limit_at_zero_ = (mx - my) * (mx - my) / std::numbers::pi;
  }

  double operator()(double t) const {
    if (std::abs(t) < 1e-9) return limit_at_zero_;
    double re = 0.0;
    double im = 0.0;
    const double wn = 1.0 / static_cast<double>(x_.size());
    const double wm = 1.0 / static_cast<double>(y_.size());
    for (double v : x_) {
      re += wn * std::cos(t * v);
      im += wn * std::sin(t * v);
    }
    for (double v : y_) {
      re -= wm * std::cos(t * v);
      im -= wm * std::sin(t * v);
    }
    return (re * re + im * im) / (std::numbers::pi * t * t);
  }

private:
  std::vector<double> x_;
  std::vector<double> y_;
  double limit_at_zero_ = 0.0;
};

struct Gk15 {
  double kronrod;
  double error;
};

template <typename F>
Gk15 gk15(const F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWgk[7];
  double g = fc * kWg[3];
  for (std::size_t j = 0; j < 7; ++j) {
    const double dx = h * kXgk[j];
    const double s = f(c - dx) + f(c + dx);
    k += kWgk[j] * s;
    if (j % 2 == 1) g += kWg[j / 2] * s;
  }
  return {k * h, std::abs((k - g) * h)};
}

template <typename F>
double adaptive(const F& f, double a, double b, const QuadratureSpec& spec, int depth) {
  const Gk15 r = gk15(f, a, b);
  const double tol = std::max(spec.abs_tol * (b - a), spec.rel_tol * std::abs(r.kronrod));
  if (r.error <= tol) return r.kronrod;
  if (depth >= spec.max_depth) {
    std::ostringstream msg;
    msg << "integral_oracle_1d: no convergence on [" << a << ", " << b
        << "], error estimate " << r.error << " vs tolerance " << tol;
    throw OracleError(msg.str());
  }
  const double mid = 0.5 * (a + b);
  return adaptive(f, a, mid, spec, depth + 1) + adaptive(f, mid, b, spec, depth + 1);
}

std::vector<double> column_of(const DataMatrix& m, const char* name) {
  if (m.cols() != 1) {
    throw ShapeError(std::string("integral_oracle_1d: ") + name + " must be one-dimensional");
  }
  return {m.values().begin(), m.values().end()};
}

} // namespace

double integral_oracle_1d(std::span<const double> x, std::span<const double> y,
                          const QuadratureSpec& spec) {
  if (x.empty() || y.empty()) throw EmptyInputError("integral_oracle_1d: empty sample");
  if (!(spec.initial_cutoff > 0.0) || !(spec.panel_width > 0.0) ||
      spec.max_cutoff < spec.initial_cutoff) {
    throw ParameterError("integral_oracle_1d: invalid quadrature spec");
  }
  const double n = static_cast<double>(x.size());
  const double m = static_cast<double>(y.size());

  // |phi_x - phi_y|^2 = c0 + sum_k a_k cos(t d_k) with distinct d_k > 0. The
  // constant integrates to c0 / (pi T) beyond T; each cosine term to at most
  // 2 |a_k| / (pi d_k T^2). Coefficients are merged per distance first so
  // that cancelling pairs do not inflate the bound.
  std::map<double, double> coefficient;
  const auto add_pairs = [&](std::span<const double> u, std::span<const double> v, double w) {
    for (double a : u) {
      for (double b : v) coefficient[std::abs(a - b)] += w;
    }
  };
  add_pairs(x, x, 1.0 / (n * n));
  add_pairs(y, y, 1.0 / (m * m));
  add_pairs(x, y, -2.0 / (n * m));
  double c0 = 0.0;
  double osc = 0.0;
  for (const auto& [d, w] : coefficient) {
    if (d == 0.0) {
      c0 += w;
    } else {
      osc += std::abs(w) / d;
    }
  }

  const EcfGap f(x, y);
  double lo = 0.0;
  double cutoff = spec.initial_cutoff;
  double body = 0.0;
  for (;;) {
    for (double a = lo; a < cutoff; a += spec.panel_width) {
      body += adaptive(f, a, std::min(a + spec.panel_width, cutoff), spec, 0);
    }
    lo = cutoff;
    const double total = 2.0 * (body + c0 / (std::numbers::pi * cutoff));
    const double remainder = 2.0 * 2.0 * osc / (std::numbers::pi * cutoff * cutoff);
    if (remainder <= std::max(spec.abs_tol, spec.tail_rel_tol * std::abs(total))) return total;
    if (cutoff * 2.0 > spec.max_cutoff) {
      std::ostringstream msg;
      msg << "integral_oracle_1d: tail bound " << remainder << " still above tolerance at T = "
          << cutoff << " (estimate " << total << ")";
      throw OracleError(msg.str());
    }
    cutoff *= 2.0;
  }
}

double integral_oracle_1d(const DataMatrix& x, const DataMatrix& y, const QuadratureSpec& spec) {
  const auto xs = column_of(x, "x");
  const auto ys = column_of(y, "y");
  return integral_oracle_1d(std::span<const double>(xs), std::span<const double>(ys), spec);
}

double cov_kernel(const CharacteristicFunction& phi, std::span<const double> s,
                  std::span<const double> t) {
  if (s.size() != t.size()) throw ShapeError("cov_kernel: s and t differ in dimension");
  std::vector<double> diff(s.size());
  std::vector<double> sum(s.size());
  for (std::size_t k = 0; k < s.size(); ++k) {
    diff[k] = s[k] - t[k];
    sum[k] = s[k] + t[k];
  }
  const auto ps = phi(s);
  const auto pt = phi(t);
  return phi(diff).real() + phi(sum).imag() - pt.real() * ps.real() - pt.imag() * ps.real() -
         pt.real() * ps.imag() - pt.imag() * ps.imag();
}

ProcessCheck empirical_process_check(const Dgp& dgp, const CharacteristicFunction& phi, double q,
                                     const std::vector<std::vector<double>>& grid, std::size_t n,
                                     std::size_t replicates, std::uint64_t seed,
                                     std::size_t jobs) {
  if (replicates < 100) throw PreconditionError("empirical_process_check: need >= 100 replicates");
  if (!(q > 0.0 && q <= 1.0)) throw ParameterError("empirical_process_check: q must lie in (0, 1]");
  if (n == 0) throw ParameterError("empirical_process_check: n must be >= 1");
  if (grid.empty()) throw EmptyInputError("empirical_process_check: empty grid");
  dgp.validate();
  for (const auto& t : grid) {
    if (t.size() != dgp.dim()) throw ShapeError("empirical_process_check: grid point dimension");
  }

  const std::size_t G = grid.size();
  std::vector<double> centre(G);
  for (std::size_t g = 0; g < G; ++g) {
    const auto p = phi(grid[g]);
    centre[g] = p.real() + p.imag();
  }

  const DgpSampler sampler(dgp);
  const double scale = 1.0 / (std::sqrt(static_cast<double>(n)) * std::sqrt(q));
  std::vector<double> z(replicates * G);
  std::vector<std::string> errors(replicates);
  parallel_for(replicates, jobs, [&](std::size_t r) {
    try {
      Rng rng = child_rng(seed, r);
      const DataMatrix x = sampler.sample(n, rng);
      std::bernoulli_distribution complete(q);
      double* zr = z.data() + r * G;
      for (std::size_t i = 0; i < n; ++i) {
        if (!complete(rng)) continue;
        for (std::size_t g = 0; g < G; ++g) {
          const double a = dot(grid[g], x.row(i));
          zr[g] += std::cos(a) + std::sin(a) - centre[g];
        }
      }
      for (std::size_t g = 0; g < G; ++g) zr[g] *= scale;
    } catch (const std::exception& e) {
      errors[r] = e.what();
    }
  });
  for (std::size_t r = 0; r < replicates; ++r) {
    if (!errors[r].empty()) {
      throw NumericError("empirical_process_check: replicate " + std::to_string(r) + ": " +
                         errors[r]);
    }
  }

  ProcessCheck out;
  out.empirical.assign(G * G, 0.0);
  out.theoretical.assign(G * G, 0.0);
  // Z is exactly centred for every n, so the raw second moment is unbiased.
  for (std::size_t r = 0; r < replicates; ++r) {
    const double* zr = z.data() + r * G;
    for (std::size_t a = 0; a < G; ++a) {
      for (std::size_t b = 0; b < G; ++b) out.empirical[a * G + b] += zr[a] * zr[b];
    }
  }
  for (std::size_t a = 0; a < G; ++a) {
    for (std::size_t b = 0; b < G; ++b) {
      out.empirical[a * G + b] /= static_cast<double>(replicates);
      out.theoretical[a * G + b] = cov_kernel(phi, grid[a], grid[b]);
      out.max_deviation = std::max(out.max_deviation,
                                   std::abs(out.empirical[a * G + b] - out.theoretical[a * G + b]));
    }
  }
  return out;
}

ProcessCheck empirical_process_check(const Dgp& dgp, double q,
                                     const std::vector<std::vector<double>>& grid, std::size_t n,
                                     std::size_t replicates, std::uint64_t seed, std::size_t jobs) {
  if (dgp.kind != DgpKind::multivariate_normal) {
    throw ParameterError("empirical_process_check: closed-form phi needs a normal law");
  }
  return empirical_process_check(dgp, normal_cf(dgp.covariance, dgp.mean), q, grid, n, replicates,
                                 seed, jobs);
}

} // namespace energy
