#pragma once

#include <vector>

#include "binpack/tensor.hpp"

namespace binpack {

inline constexpr int kDefaultDiffusionSteps = 100;
// Endpoints chosen so that with T=100 the terminal signal level
// alpha_bar_T is ~2e-5: the chain ends at (numerically) pure noise, which
// the forward-marginal statistics and the near-total-noising bound require.
inline constexpr double kDefaultBeta1 = 1e-3;
inline constexpr double kDefaultBetaT = 0.2;

/// Linear-variance noising schedule with the fixed reverse covariance
/// sigma_t^2 = beta_t. Index 0 is the identity point: alpha_bar[0] = 1.
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> beta;       // beta[0] = 0, rest per the ramp
  std::vector<double> alpha;      // 1 - beta
  std::vector<double> alpha_bar;  // running product of alpha
  std::vector<double> sigma;      // sqrt(beta)

  double terminal_signal() const { return alpha_bar[static_cast<std::size_t>(steps)]; }
};

/// Throws BadSchedule unless T >= 1 and 0 < beta_1 <= beta_T < 1.
NoiseSchedule build_schedule(int steps, double beta_1, double beta_t);

inline NoiseSchedule default_schedule() {
  return build_schedule(kDefaultDiffusionSteps, kDefaultBeta1, kDefaultBetaT);
}

/// Forward marginal x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) noise.
TensorND forward_diffuse(const TensorND& x0, int t, const TensorND& noise,
                         const NoiseSchedule& sched);

/// Inverts the forward marginal given the exact noise that produced x_t.
TensorND reconstruct_x0(const TensorND& x_t, int t, const TensorND& noise,
                        const NoiseSchedule& sched);

}  // namespace binpack
