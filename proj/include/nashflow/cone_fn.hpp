#pragma once

#include <utility>
#include <vector>

#include "nashflow/rational.hpp"

namespace nashflow {

// Direction in the closed positive quadrant of the (entry-label, throughput)
// plane; (c, u) with c, u >= 0, not both zero. Rays are compared angularly
// from (1,0) towards (0,1).
struct Ray {
  Rat c, u;
};

// cross(a, b) > 0  iff  a is angularly before b.
inline Rat ray_cross(const Ray& a, const Ray& b) { return a.c * b.u - a.u * b.c; }

// One-homogeneous, continuous, nondecreasing piecewise-linear function on the
// quadrant: the exit-label derivative of a series-parallel subnetwork as a
// function of its entry-label derivative c and its throughput u. Each sector
// holds the linear formula alpha*c + beta*u valid from its ray up to the next
// sector's ray (the last sector extends to (0,1)).
class ConeFn {
 public:
  struct Sector {
    Ray lo;
    Rat alpha, beta;
  };

  // Single arc: max(c, u/nu) normally, u/nu when the queue resets the label.
  static ConeFn arc(const Rat& capacity, bool reset);

  // Exit label of `second` fed by the exit label of `first`: F(c,u) =
  // second(first(c,u), u).
  static ConeFn series(const ConeFn& first, const ConeFn& second);

  // Exit label of parallel branches sharing entry and exit, splitting u.
  static ConeFn parallel(const std::vector<const ConeFn*>& branches);

  Rat eval(const Rat& c, const Rat& u) const;

  // Throughput bounds at exit level ell: max_uptake is the largest u with
  // eval(c, u) <= ell (0 if none); min_uptake the smallest u with
  // eval(c, u) = ell exactly (only valid when such u exists).
  Rat max_uptake(const Rat& c, const Rat& ell) const;
  Rat min_uptake(const Rat& c, const Rat& ell) const;

  const std::vector<Sector>& sectors() const { return sectors_; }

 private:
  ConeFn() = default;
  void canonicalize();
  void check() const;
  int sector_of(const Ray& d) const;

  std::vector<Sector> sectors_;
};

}  // namespace nashflow
