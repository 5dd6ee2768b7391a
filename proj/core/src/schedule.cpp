#include "binpack/schedule.hpp"

#include <cmath>

#include "binpack/errors.hpp"

namespace binpack {

NoiseSchedule build_schedule(int steps, double beta_1, double beta_t) {
  if (steps < 1) throw BadSchedule("need at least one step");
  if (!(beta_1 > 0.0) || !(beta_1 <= beta_t) || !(beta_t < 1.0)) {
    throw BadSchedule("need 0 < beta_1 <= beta_T < 1");
  }
  NoiseSchedule s;
  s.steps = steps;
  s.beta.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  s.alpha.assign(static_cast<std::size_t>(steps) + 1, 1.0);
  s.alpha_bar.assign(static_cast<std::size_t>(steps) + 1, 1.0);
  s.sigma.assign(static_cast<std::size_t>(steps) + 1, 0.0);
  for (int t = 1; t <= steps; ++t) {
    const double frac = steps == 1 ? 0.0 : static_cast<double>(t - 1) / (steps - 1);
    const std::size_t i = static_cast<std::size_t>(t);
    s.beta[i] = beta_1 + frac * (beta_t - beta_1);
    s.alpha[i] = 1.0 - s.beta[i];
    s.alpha_bar[i] = s.alpha_bar[i - 1] * s.alpha[i];
    s.sigma[i] = std::sqrt(s.beta[i]);
  }
  return s;
}

namespace {

void check_t(int t, const NoiseSchedule& sched) {
  if (t < 1 || t > sched.steps) throw BadSchedule("timestep outside [1, T]");
}

}  // namespace

TensorND forward_diffuse(const TensorND& x0, int t, const TensorND& noise,
                         const NoiseSchedule& sched) {
  check_t(t, sched);
  if (x0.shape() != noise.shape()) throw ShapeMismatch("forward_diffuse: noise shape");
  const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
  const double cs = std::sqrt(ab), cn = std::sqrt(1.0 - ab);
  TensorND x_t(x0.shape());
  for (std::size_t i = 0; i < x0.size(); ++i) x_t[i] = cs * x0[i] + cn * noise[i];
  return x_t;
}

TensorND reconstruct_x0(const TensorND& x_t, int t, const TensorND& noise,
                        const NoiseSchedule& sched) {
  check_t(t, sched);
  if (x_t.shape() != noise.shape()) throw ShapeMismatch("reconstruct_x0: noise shape");
  const double ab = sched.alpha_bar[static_cast<std::size_t>(t)];
  const double cs = std::sqrt(ab), cn = std::sqrt(1.0 - ab);
  TensorND x0(x_t.shape());
  for (std::size_t i = 0; i < x_t.size(); ++i) x0[i] = (x_t[i] - cn * noise[i]) / cs;
  return x0;
}

}  // namespace binpack
