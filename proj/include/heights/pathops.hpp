#pragma once

#include <stdexcept>

#include "heights/reflected_bm.hpp"
#include "heights/rng.hpp"

// Projection pi_{a,b} (deleting all time spent above b), the clock behind it,
// and the local-time stopping rule T_x = inf{t : L_0(t) > x}.
namespace heights::pathops {

// dt * #{grid points s <= t with value <= b}. The initial point counts.
double time_below(const rbm::GridPath& p, double b, double t);

// Discrete pi_{a,b}: the subsequence of grid samples with value <= b,
// re-laid on the same dt grid. The lower regulator is subsampled (all its
// increments happen at value 0, which is always kept). The upper regulator
// at the new barrier b is re-derived: every splice junction contributes the
// overshoot of the first deleted sample above b, the clip a direct barrier-b
// simulation would have recorded there. It is an O(sqrt(dt)) estimate and is
// not part of the exact composition identity.
rbm::GridPath project(const rbm::GridPath& p, double b);

// Raised when stop_at_local_time exhausts cfg.max_steps. Carries the partial
// path and the local time reached; signals an under-provisioned step budget,
// not a math failure (T_x is a.s. finite for the [0,a]-reflected process).
struct MaxStepsExceeded : std::runtime_error {
  MaxStepsExceeded(rbm::GridPath partial_path, double local_time);
  rbm::GridPath partial;
  double achieved_local_time;
};

// Simulates the reflected kernel until the lower boundary local time 2*reg0
// first exceeds x; returns the stopped path.
rbm::GridPath stop_at_local_time(const rbm::ReflectedBmConfig& cfg, double x,
                                 Rng& rng);

}  // namespace heights::pathops
