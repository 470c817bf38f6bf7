#pragma once

#include <string>
#include <vector>

#include "accvr/estimators.hpp"

namespace accvr {

enum class ScheduleMode { NonStronglyConvex, StronglyConvex };

struct StepPair {
  double gamma = 0.0;
  double tau = 0.0;
};

/// Step size / momentum rule for the accelerated iteration.
///
/// Non-strongly convex: gamma_k = s (k + nu + 4) / (2 c L) and
/// tau_k = t 2 / (k + nu + 4), where s = step_scale and t = tau_scale are 1
/// for the proven schedule. Strongly convex: the constant pair
/// (gamma_const, tau_const).
struct Schedule {
  ScheduleMode mode = ScheduleMode::NonStronglyConvex;
  double c = 2.0;
  double nu = 0.0;
  double rho = 1.0;
  double L = 1.0;
  double mu = 0.0;
  double gamma_const = 0.0;
  double tau_const = 0.0;
  double theta1 = 1.0;
  double theta2 = 0.0;
  double step_scale = 1.0;
  double tau_scale = 1.0;

  StepPair gamma_tau(std::size_t k) const;
};

double theta1(const MsebParams& p);
double theta2(const MsebParams& p);
/// Smallest c admitted by both lower bounds (quadratic root and 16 Theta1 Theta2).
double c_min(const MsebParams& p);
/// max{0, (2 - 6 rho) / rho}
double nu_min(double rho);

/// Minimal admissible (c, nu) for arbitrary MSEB constants; mode from mu > 0.
Schedule general_schedule(const MsebParams& mseb, double L, double mu);

/// Builds the strongly convex constant pair gamma = min{1/sqrt(mu c L),
/// rho/(2 mu)}, tau = mu gamma for a schedule whose c, rho, L are set.
Schedule make_strongly_convex(Schedule s, double mu);

/// Per-estimator (c, nu, rho):
///   SAGA  (96 n^2/b^3, 4n/b, b/(2n))   requires b <= 4 sqrt(2) n^(2/3)
///   SVRG  (96 p^2/b,   4p,   1/(2p))   requires b <= 32 p^2, p >= 1
///   SARAH (144 p^4,    2p,   1/p)      requires p >= 1
///   SARGE (86016 n^4/b^4, 4n/b, b/(2n)) requires b <= n/3
///   Full  general_schedule of (0, 0, 1, 1, 1)
/// Throws ConfigError naming the violated bound.
Schedule preset_schedule(EstimatorKind kind, std::size_t n, std::size_t b,
                         double p, double L, double mu);

/// Tuned non-strongly-convex variant: multiply gamma_k by `s` and rescale tau
/// so that tau_0 == tau0.
Schedule scaled_schedule(Schedule s, double step_scale, double tau0 = 0.5);
/// Strongly convex schedule with hand-picked constants.
Schedule constant_schedule(double gamma, double tau, double L, double mu);

struct ScheduleCheck {
  std::string name;   // "bound1", "bound2" or "growth"
  std::size_t k = 0;
  double value = 0.0;       // raw expression value
  double normalized = 0.0;  // value / scale (dimensionless)
  bool pass = false;
};

struct ScheduleReport {
  std::vector<ScheduleCheck> checks;
  bool pass() const noexcept;
  std::string summary() const;
};

/// Evaluates the two non-positivity expressions
///   rho_M (1 - rho_B) / (8 tau^2) + 4 gamma^2 L^2 T1 T2 + (gamma/tau)(L/2 - 1/(4 tau gamma))
///   8 gamma^2 L T1 T2 - gamma (1 - tau) / tau
/// and the growth condition gamma_k^2 (1 - rho) <= gamma_{k-1}^2 (1 - rho/2)
/// at k in {0, 1, 10, 1e3, 1e6} (non-SC) or at the constant pair (SC, where
/// growth reads (1 + tau)(1 - rho) <= 1 - rho/2 with tau = mu gamma).
/// Each expression is divided by its natural scale (gamma^2 L^2, gamma^2 L,
/// gamma_{k-1}^2) and passes when the quotient is <= `tol`.
ScheduleReport validate_schedule(const Schedule& s, const MsebParams& mseb,
                                 double tol = 1e-12);

}  // namespace accvr
