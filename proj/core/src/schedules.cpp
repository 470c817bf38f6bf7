#include "accvr/schedules.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "accvr/errors.hpp"

namespace accvr {

StepPair Schedule::gamma_tau(std::size_t k) const {
  if (mode == ScheduleMode::StronglyConvex) return {gamma_const, tau_const};
  const double kk = static_cast<double>(k) + nu + 4.0;
  const double gamma = step_scale * kk / (2.0 * c * L);
  const double tau = std::min(1.0, tau_scale * 2.0 / kk);
  return {gamma, tau};
}

double theta1(const MsebParams& p) {
  return 1.0 + 8.0 * (1.0 - p.rho_B) / (p.rho_B * p.rho_B * p.rho_M);
}

double theta2(const MsebParams& p) {
  return (p.M1 * p.rho_F + 2.0 * p.M2) / (p.rho_M * p.rho_F);
}

double c_min(const MsebParams& p) {
  const double t12 = theta1(p) * theta2(p);
  const double q = 2.0 - p.rho_M + p.rho_B * p.rho_M;
  const double root = 2.0 * (1.0 + std::sqrt(1.0 + 8.0 * t12 * q)) / q;
  return std::max(root, 16.0 * t12);
}

double nu_min(double rho) { return std::max(0.0, (2.0 - 6.0 * rho) / rho); }

Schedule make_strongly_convex(Schedule s, double mu) {
  if (!(mu > 0.0)) throw ConfigError("strongly convex schedule needs mu > 0");
  s.mode = ScheduleMode::StronglyConvex;
  s.mu = mu;
  s.gamma_const = std::min(1.0 / std::sqrt(mu * s.c * s.L), s.rho / (2.0 * mu));
  s.tau_const = mu * s.gamma_const;
  return s;
}

Schedule general_schedule(const MsebParams& mseb, double L, double mu) {
  mseb.validate();
  if (!(L > 0.0)) throw ConfigError("schedule needs L > 0");
  if (!(mu >= 0.0)) throw ConfigError("schedule needs mu >= 0");
  Schedule s;
  s.theta1 = theta1(mseb);
  s.theta2 = theta2(mseb);
  s.rho = mseb.rho();
  s.c = c_min(mseb);
  s.nu = nu_min(s.rho);
  s.L = L;
  s.mu = mu;
  if (mu > 0.0) s = make_strongly_convex(s, mu);
  return s;
}

Schedule preset_schedule(EstimatorKind kind, std::size_t n, std::size_t b,
                         double p, double L, double mu) {
  if (n == 0) throw ConfigError("preset needs n >= 1");
  if (b < 1 || b > n) {
    throw ConfigError("preset needs 1 <= b <= n (b=" + std::to_string(b) +
                      ", n=" + std::to_string(n) + ")");
  }
  if (!(L > 0.0)) throw ConfigError("preset needs L > 0");
  if (!(mu >= 0.0)) throw ConfigError("preset needs mu >= 0");
  const double nd = static_cast<double>(n);
  const double bd = static_cast<double>(b);

  if (kind == EstimatorKind::Full) {
    return general_schedule(mseb_params(kind, n, b, p), L, mu);
  }

  Schedule s;
  s.L = L;
  s.mu = mu;
  switch (kind) {
    case EstimatorKind::Saga:
      if (bd > 4.0 * std::sqrt(2.0) * std::pow(nd, 2.0 / 3.0)) {
        throw ConfigError("SAGA preset requires b <= 4 sqrt(2) n^(2/3)");
      }
      s.c = 96.0 * nd * nd / (bd * bd * bd);
      s.nu = 4.0 * nd / bd;
      s.rho = bd / (2.0 * nd);
      break;
    case EstimatorKind::Svrg:
      if (!(p >= 1.0)) throw ConfigError("SVRG preset requires p >= 1");
      if (bd > 32.0 * p * p) throw ConfigError("SVRG preset requires b <= 32 p^2");
      s.c = 96.0 * p * p / bd;
      s.nu = 4.0 * p;
      s.rho = 1.0 / (2.0 * p);
      break;
    case EstimatorKind::Sarah:
      if (!(p >= 1.0)) throw ConfigError("SARAH preset requires p >= 1");
      s.c = 144.0 * std::pow(p, 4.0);
      s.nu = 2.0 * p;
      s.rho = 1.0 / p;
      break;
    case EstimatorKind::Sarge:
      if (3.0 * bd > nd) throw ConfigError("SARGE preset requires b <= n/3");
      s.c = 86016.0 * std::pow(nd / bd, 4.0);
      s.nu = 4.0 * nd / bd;
      s.rho = bd / (2.0 * nd);
      break;
    case EstimatorKind::Full: break;
  }
  const MsebParams mseb = mseb_params(kind, n, b, p);
  s.theta1 = theta1(mseb);
  s.theta2 = theta2(mseb);
  if (mu > 0.0) s = make_strongly_convex(s, mu);
  return s;
}

Schedule scaled_schedule(Schedule s, double step_scale, double tau0) {
  if (!(step_scale > 0.0)) throw ConfigError("step scale must be > 0");
  if (!(tau0 > 0.0 && tau0 <= 1.0)) throw ConfigError("tau0 must lie in (0, 1]");
  s.step_scale = step_scale;
  // tau_0 = tau_scale * 2 / (nu + 4)
  s.tau_scale = tau0 * (s.nu + 4.0) / 2.0;
  return s;
}

Schedule constant_schedule(double gamma, double tau, double L, double mu) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("tau must lie in (0, 1]");
  Schedule s;
  s.mode = ScheduleMode::StronglyConvex;
  s.gamma_const = gamma;
  s.tau_const = tau;
  s.L = L;
  s.mu = mu;
  return s;
}

bool ScheduleReport::pass() const noexcept {
  return std::all_of(checks.begin(), checks.end(),
                     [](const ScheduleCheck& c) { return c.pass; });
}

std::string ScheduleReport::summary() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    if (c.pass) continue;
    os << c.name << "@k=" << c.k << " normalized=" << c.normalized << "; ";
  }
  return os.str();
}

ScheduleReport validate_schedule(const Schedule& s, const MsebParams& mseb,
                                 double tol) {
  ScheduleReport report;
  const double t12 = theta1(mseb) * theta2(mseb);
  const double L = s.L;

  auto bounds_at = [&](std::size_t k) {
    const auto [gamma, tau] = s.gamma_tau(k);
    const double b1 = mseb.rho_M * (1.0 - mseb.rho_B) / (8.0 * tau * tau) +
                      4.0 * gamma * gamma * L * L * t12 +
                      (gamma / tau) * (L / 2.0 - 1.0 / (4.0 * tau * gamma));
    const double b2 = 8.0 * gamma * gamma * L * t12 - gamma * (1.0 - tau) / tau;
    const double n1 = b1 / (gamma * gamma * L * L);
    const double n2 = b2 / (gamma * gamma * L);
    report.checks.push_back({"bound1", k, b1, n1, n1 <= tol});
    report.checks.push_back({"bound2", k, b2, n2, n2 <= tol});
  };
  auto growth_at = [&](std::size_t k) {
    const double g = s.gamma_tau(k).gamma;
    const double gp = s.gamma_tau(k - 1).gamma;
    const double v = g * g * (1.0 - s.rho) - gp * gp * (1.0 - s.rho / 2.0);
    const double nv = v / (gp * gp);
    report.checks.push_back({"growth", k, v, nv, nv <= tol});
  };

  if (s.mode == ScheduleMode::StronglyConvex) {
    bounds_at(0);
    // Constant steps weighted by (1 + mu gamma)^k: the analogue of the growth
    // condition is (1 + mu gamma)(1 - rho) <= 1 - rho/2.
    const double v = (1.0 + s.tau_const) * (1.0 - s.rho) - (1.0 - s.rho / 2.0);
    report.checks.push_back({"growth", 1, v, v, v <= tol});
    return report;
  }
  for (std::size_t k : {0ul, 1ul, 10ul, 1000ul, 1000000ul}) {
    bounds_at(k);
    if (k >= 1) growth_at(k);
  }
  return report;
}

}  // namespace accvr
