#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "heights/reflected_bm.hpp"
#include "heights/rng.hpp"

// Poisson-mark pruning of the tree skeleton coded by a height path. Marks are
// laid at rate 4*gamma per unit of skeleton length: each grid ascent of size
// delta creates Poisson(4*gamma*delta) marks uniform on the new lineage
// segment; descending below a mark's height destroys that lineage segment
// permanently (re-ascents are new, independently marked branches). Deleting
// all time with a marked lineage yields a path distributed as the height
// process with branching parameter theta + gamma.
namespace heights::pruning {

struct Mark {
  double height;  // position on the lineage
  double u;       // independent uniform coordinate, used for coupled thinning
};

struct MarkedPath {
  rbm::GridPath base;
  // Marks created on the ascent into each grid point (empty on descents).
  std::vector<std::vector<Mark>> created;
  // keep[i] is true iff the lineage mark stack is empty at grid point i.
  std::vector<std::uint8_t> keep;
  double gamma = 0.0;
};

// Streaming lineage mark stack; heights on the stack are strictly increasing
// and bounded by the current path value.
class MarkStack {
 public:
  // Processes one step from height `from` to height `to`; new marks (ascent
  // only) are appended to *out when out != nullptr.
  void step(double from, double to, double gamma, Rng& rng,
            std::vector<Mark>* out = nullptr);
  bool empty() const { return heights_.empty(); }
  double first_mark() const { return heights_.front(); }  // lowest mark
  std::size_t size() const { return heights_.size(); }
  const std::vector<double>& heights() const { return heights_; }

 private:
  std::vector<double> heights_;
};

// Replays the mark process along a path.
MarkedPath mark_replay(const rbm::GridPath& path, double gamma, Rng& rng);

// Keep mask the same marked path would have produced at a thinned intensity
// gamma_sub <= gamma (marks with u < gamma_sub/gamma survive). Coupled across
// gamma_sub: smaller intensities keep a superset of grid points.
std::vector<std::uint8_t> thinned_keep(const MarkedPath& m, double gamma_sub);

// Subsequence of the base path at kept indices, re-laid on the dt grid (the
// discrete inverse of the pruned clock A_t). The lower regulator is
// subsampled (the stack is always empty at height 0); upper-regulator
// increments are kept only when the clip happened at a kept index.
rbm::GridPath prune(const MarkedPath& m);

// Couples stop_at_local_time with mark_replay in one pass; returns
// (stopped base path, pruned path). The stopping local time at 0 is
// unchanged by pruning. Propagates MaxStepsExceeded.
std::pair<rbm::GridPath, rbm::GridPath> prune_stopped(
    const rbm::ReflectedBmConfig& cfg, double gamma, double x, Rng& rng);

// Pruned clock A at the end of the path: dt * #kept steps.
double kept_time(const MarkedPath& m);

// Epsilon-band estimator of the exit local time at tip-level 0: (1/eps) times
// the time the height spends within (tau, tau + eps), where tau is the first
// (lowest) mark on the lineage. By the marking identity this matches
// 4*gamma*A in expectation.
double exit_local_time_estimate(const MarkedPath& m, double eps);

}  // namespace heights::pruning
