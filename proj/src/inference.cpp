#include "gslac/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gslac/errors.hpp"

namespace gslac {

namespace {

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return 0.5 * (hi + v[n / 2 - 1]);
}

double lorentzian_model(double x, double center, double fwhm, double amplitude,
                        double baseline) {
  const double u = 2.0 * (x - center) / fwhm;
  return baseline + amplitude / (1.0 + u * u);
}

Eigen::MatrixXd numeric_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
    const Eigen::VectorXd& p, const Eigen::VectorXd& scale) {
  const Eigen::Index np = p.size();
  const Eigen::VectorXd r0 = residual(p);
  Eigen::MatrixXd jac(r0.size(), np);
  for (Eigen::Index j = 0; j < np; ++j) {
    const double h = 1e-7 * std::max(std::abs(p(j)), scale(j));
    Eigen::VectorXd pp = p, pm = p;
    pp(j) += h;
    pm(j) -= h;
    jac.col(j) = (residual(pp) - residual(pm)) / (2.0 * h);
  }
  return jac;
}

}  // namespace

LeastSquaresOutcome damped_least_squares(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& residual,
    const Eigen::VectorXd& initial, const LeastSquaresOptions& options) {
  Eigen::VectorXd p = initial;
  const Eigen::Index np = p.size();
  Eigen::VectorXd scale(np);
  for (Eigen::Index j = 0; j < np; ++j)
    scale(j) = std::max(std::abs(initial(j)), 1e-12);

  Eigen::VectorXd r = residual(p);
  double ssr = r.squaredNorm();
  double lambda = options.lambda0;

  LeastSquaresOutcome out;
  out.converged = false;
  int iter = 0;
  for (; iter < options.max_iterations; ++iter) {
    const Eigen::MatrixXd jac = numeric_jacobian(residual, p, scale);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;

    bool accepted = false;
    Eigen::VectorXd dp = Eigen::VectorXd::Zero(np);
    const double diag_floor = std::max(jtj.diagonal().maxCoeff(), 1e-300);
    for (int inner = 0; inner < 40; ++inner) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index j = 0; j < np; ++j)
        a(j, j) += lambda * std::max(jtj(j, j), 1e-12 * diag_floor);
      dp = a.ldlt().solve(-g);
      const Eigen::VectorXd pt = p + dp;
      const Eigen::VectorXd rt = residual(pt);
      const double ssrt = rt.squaredNorm();
      if (std::isfinite(ssrt) && ssrt < ssr) {
        p = pt;
        r = rt;
        ssr = ssrt;
        lambda = std::max(lambda * 0.1, 1e-14);
        accepted = true;
        break;
      }
      lambda *= 10.0;
      if (lambda > 1e14) break;
    }
    if (!accepted) break;

    double step = 0.0;
    for (Eigen::Index j = 0; j < np; ++j)
      step = std::max(step, std::abs(dp(j)) / std::max(std::abs(p(j)), scale(j)));
    if (step < options.step_tolerance) {
      out.converged = true;
      break;
    }
  }

  out.params = p;
  out.n_iterations = iter + 1;
  const Eigen::Index n = r.size();
  out.residual_rms = n > 0 ? std::sqrt(ssr / n) : 0.0;

  // Parameter uncertainties from the Jacobian-based covariance, scaled by
  // the residual variance.
  out.param_stderr = Eigen::VectorXd::Zero(np);
  if (n > np) {
    const Eigen::MatrixXd jac = numeric_jacobian(residual, p, scale);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const double sigma2 = ssr / static_cast<double>(n - np);
    const Eigen::MatrixXd cov =
        sigma2 * jtj.ldlt().solve(Eigen::MatrixXd::Identity(np, np));
    for (Eigen::Index j = 0; j < np; ++j)
      out.param_stderr(j) = std::sqrt(std::max(0.0, cov(j, j)));
  }
  return out;
}

FitResult fit_lorentzian(const std::vector<double>& b_T,
                         const std::vector<double>& signal,
                         std::optional<LorentzianParams> guess) {
  const std::size_t n = b_T.size();
  if (n != signal.size()) throw config_error("trace arrays differ in length");
  if (n < 8) throw numeric_error("lineshape fit needs at least 8 points");

  const double ymax = *std::max_element(signal.begin(), signal.end());
  const double ymin = *std::min_element(signal.begin(), signal.end());
  const double med = median_of(signal);
  if (ymax - ymin <= 1e-12 * std::max(1.0, std::abs(med)))
    throw no_feature_error("trace is flat: no feature to fit");

  LorentzianParams init;
  if (guess) {
    init = *guess;
  } else {
    std::size_t ext = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = std::abs(signal[i] - med);
      if (d > best) {
        best = d;
        ext = i;
      }
    }
    init.center_T = b_T[ext];
    init.baseline = med;
    init.amplitude = signal[ext] - med;

    // Half-extremum crossings, linearly interpolated.
    const double half = med + 0.5 * init.amplitude;
    auto crossing = [&](int dir) -> double {
      for (std::size_t k = ext; k + 1 > 0 && k < n;) {
        const std::size_t next = (dir > 0) ? k + 1 : k - 1;
        if (next >= n) break;
        const double a = signal[k] - half;
        const double b = signal[next] - half;
        if (a == 0.0) return b_T[k];
        if ((a < 0.0) != (b < 0.0)) {
          const double t = a / (a - b);
          return b_T[k] + t * (b_T[next] - b_T[k]);
        }
        if (next == 0) break;
        k = next;
      }
      return std::numeric_limits<double>::quiet_NaN();
    };
    const double left = crossing(-1);
    const double right = crossing(+1);
    const double span = std::abs(b_T.back() - b_T.front());
    if (std::isfinite(left) && std::isfinite(right) && right > left)
      init.fwhm_T = right - left;
    else if (std::isfinite(left))
      init.fwhm_T = 2.0 * std::abs(init.center_T - left);
    else if (std::isfinite(right))
      init.fwhm_T = 2.0 * std::abs(right - init.center_T);
    else
      init.fwhm_T = span / 6.0;
    if (!(init.fwhm_T > 0.0)) init.fwhm_T = span / 6.0;
  }

  auto residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i)
      r(i) = lorentzian_model(b_T[i], p(0), p(1), p(2), p(3)) - signal[i];
    return r;
  };

  Eigen::VectorXd p0(4);
  p0 << init.center_T, init.fwhm_T, init.amplitude, init.baseline;
  const LeastSquaresOutcome ls = damped_least_squares(residual, p0);

  FitResult out;
  out.params.center_T = ls.params(0);
  out.params.fwhm_T = std::abs(ls.params(1));  // model is even in fwhm
  out.params.amplitude = ls.params(2);
  out.params.baseline = ls.params(3);
  out.param_stderr = ls.param_stderr;
  out.residual_rms = ls.residual_rms;
  out.n_iterations = ls.n_iterations;
  out.converged = ls.converged;
  return out;
}

FitResult fit_lorentzian(const ScanTrace& trace,
                         std::optional<LorentzianParams> guess) {
  return fit_lorentzian(trace.b_T, trace.signal, guess);
}

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw config_error("x and y differ in length");
  if (n < 2) throw numeric_error("line fit needs at least 2 points");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw numeric_error("line fit needs distinct x values");

  LinearFit out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (out.intercept + out.slope * x[i]);
      ssr += r * r;
    }
    out.stderr_slope = std::sqrt(ssr / ((n - 2) * sxx));
  }
  return out;
}

SaturationFit fit_saturation(const std::vector<double>& powers_mW,
                             const std::vector<double>& contrasts) {
  const std::size_t n = powers_mW.size();
  if (n != contrasts.size()) throw config_error("arrays differ in length");
  std::vector<double> distinct = powers_mW;
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() < 3)
    throw numeric_error("saturation fit needs >= 3 distinct powers");

  // Reciprocal linearization seeds the nonlinear fit.
  std::vector<double> ip, ic;
  for (std::size_t i = 0; i < n; ++i) {
    if (powers_mW[i] > 0.0 && contrasts[i] > 0.0) {
      ip.push_back(1.0 / powers_mW[i]);
      ic.push_back(1.0 / contrasts[i]);
    }
  }
  double c0 = 0.0, ps0 = 0.0;
  if (ip.size() >= 2) {
    const LinearFit lin = fit_line(ip, ic);
    if (lin.intercept > 0.0 && lin.slope > 0.0) {
      c0 = 1.0 / lin.intercept;
      ps0 = lin.slope / lin.intercept;
    }
  }
  if (!(c0 > 0.0) || !(ps0 > 0.0)) {
    c0 = 1.2 * *std::max_element(contrasts.begin(), contrasts.end());
    ps0 = median_of(powers_mW);
    if (!(ps0 > 0.0)) ps0 = 1.0;
  }

  auto residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double ps = std::abs(p(1));
      r(i) = p(0) * powers_mW[i] / (powers_mW[i] + ps) - contrasts[i];
    }
    return r;
  };
  Eigen::VectorXd p0(2);
  p0 << c0, ps0;
  const LeastSquaresOutcome ls = damped_least_squares(residual, p0);

  SaturationFit out;
  out.c_max = ls.params(0);
  out.p_sat_mW = std::abs(ls.params(1));
  out.stderr_c_max = ls.param_stderr.size() > 0 ? ls.param_stderr(0) : 0.0;
  out.stderr_p_sat = ls.param_stderr.size() > 1 ? ls.param_stderr(1) : 0.0;
  out.residual_rms = ls.residual_rms;
  out.n_iterations = ls.n_iterations;
  out.converged = ls.converged;
  const double pmax = *std::max_element(powers_mW.begin(), powers_mW.end());
  out.identifiable = out.p_sat_mW <= pmax;
  return out;
}

namespace {

// Linewidth law fit: wmin + slope * max(0, |beta| - elbow), linear in
// (wmin, slope) once the elbow is fixed, so the elbow is profiled.
struct ElbowFit {
  double wmin = 0.0, slope = 0.0, elbow = 0.0, ssr = 0.0;
};

ElbowFit fit_linewidth_law(const std::vector<double>& beta,
                           const std::vector<double>& fwhm, double elbow) {
  const std::size_t n = beta.size();
  double s11 = 0, s1r = 0, srr = 0, s1y = 0, sry = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ramp = std::max(0.0, std::abs(beta[i]) - elbow);
    s11 += 1.0;
    s1r += ramp;
    srr += ramp * ramp;
    s1y += fwhm[i];
    sry += ramp * fwhm[i];
  }
  const double det = s11 * srr - s1r * s1r;
  ElbowFit out;
  out.elbow = elbow;
  if (std::abs(det) < 1e-300) {
    out.wmin = s1y / s11;
    out.slope = 0.0;
  } else {
    out.wmin = (s1y * srr - sry * s1r) / det;
    out.slope = (s11 * sry - s1r * s1y) / det;
  }
  out.ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double ramp = std::max(0.0, std::abs(beta[i]) - elbow);
    const double r = out.wmin + out.slope * ramp - fwhm[i];
    out.ssr += r * r;
  }
  return out;
}

}  // namespace

AngleDependenceSummary extract_angle_dependence(
    const std::vector<std::pair<double, FitResult>>& fits) {
  if (fits.size() < 7)
    throw numeric_error("angle summary needs at least 7 angles");
  std::vector<double> beta, fwhm, contrast;
  double bmin = 0.0, bmax = 0.0;
  for (const auto& [b, fr] : fits) {
    beta.push_back(b);
    fwhm.push_back(fr.params.fwhm_T);
    contrast.push_back(std::abs(fr.params.amplitude) /
                       std::max(fr.params.baseline, 1e-300));
    bmin = std::min(bmin, b);
    bmax = std::max(bmax, b);
  }
  if (bmin > -0.1 || bmax < 0.1)
    throw numeric_error("angle summary needs angles spanning +-0.1 degrees");

  // Profile the elbow on a grid, then refine by golden section.
  const double abmax = std::max(std::abs(bmin), std::abs(bmax));
  ElbowFit best;
  best.ssr = std::numeric_limits<double>::infinity();
  constexpr int kGrid = 241;
  for (int k = 0; k < kGrid; ++k) {
    const double e = 0.8 * abmax * k / (kGrid - 1);
    const ElbowFit f = fit_linewidth_law(beta, fwhm, e);
    if (f.ssr < best.ssr) best = f;
  }
  {
    const double step = 0.8 * abmax / (kGrid - 1);
    double a = std::max(0.0, best.elbow - step);
    double b = best.elbow + step;
    constexpr double kInvPhi = 0.6180339887498949;
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = fit_linewidth_law(beta, fwhm, x1).ssr;
    double f2 = fit_linewidth_law(beta, fwhm, x2).ssr;
    for (int it = 0; it < 80; ++it) {
      if (f1 < f2) {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - kInvPhi * (b - a);
        f1 = fit_linewidth_law(beta, fwhm, x1).ssr;
      } else {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + kInvPhi * (b - a);
        f2 = fit_linewidth_law(beta, fwhm, x2).ssr;
      }
    }
    best = fit_linewidth_law(beta, fwhm, 0.5 * (a + b));
  }

  // Contrast dip: c_far * (1 - depth / (1 + (2 beta / width)^2)).
  const double cmax = *std::max_element(contrast.begin(), contrast.end());
  const double cmin = *std::min_element(contrast.begin(), contrast.end());
  double d0 = std::clamp(1.0 - cmin / std::max(cmax, 1e-300), 0.01, 0.99);
  double w0 = 0.05;
  {
    // Half-depth crossing estimate for the dip width.
    const double chalf = cmax * (1.0 - 0.5 * d0);
    double bestb = 0.0;
    for (std::size_t i = 0; i < beta.size(); ++i)
      if (contrast[i] <= chalf) bestb = std::max(bestb, std::abs(beta[i]));
    if (bestb > 0.0) w0 = 2.0 * bestb;
  }
  const std::size_t n = beta.size();
  auto residual = [&](const Eigen::VectorXd& p) {
    Eigen::VectorXd r(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = 2.0 * beta[i] / p(2);
      r(i) = p(0) * (1.0 - p(1) / (1.0 + u * u)) - contrast[i];
    }
    return r;
  };
  Eigen::VectorXd p0(3);
  p0 << cmax, d0, w0;
  const LeastSquaresOutcome ls = damped_least_squares(residual, p0);

  AngleDependenceSummary out;
  out.fwhm_min_T = best.wmin;
  out.linewidth_slope_T_per_deg = best.slope;
  out.beta_elbow_deg = best.elbow;
  out.fwhm_residual_rms = std::sqrt(best.ssr / n);
  out.c_far = ls.params(0);
  out.dip_depth = ls.params(1);
  out.contrast_dip_fwhm_deg = std::abs(ls.params(2));
  out.contrast_residual_rms = ls.residual_rms;
  return out;
}

}  // namespace gslac
