#pragma once

#include <vector>

#include "hofa/abelian.hpp"
#include "hofa/rng.hpp"

namespace hofa::testutil {

// Uniform phase on the unit circle at every point.
inline GroupFunction random_unimodular(const GroupSpec& g, CounterRng& rng) {
  std::vector<cplx> v(g.order());
  for (auto& z : v) z = unit_phase(rng.next_unit());
  return GroupFunction(g, std::move(v));
}

// Uniform on the closed unit disk (|f| <= 1 everywhere).
inline GroupFunction random_bounded(const GroupSpec& g, CounterRng& rng) {
  std::vector<cplx> v(g.order());
  for (auto& z : v) {
    const double r = std::sqrt(rng.next_unit());
    z = r * unit_phase(rng.next_unit());
  }
  return GroupFunction(g, std::move(v));
}

inline GroupElement random_element(const GroupSpec& g, CounterRng& rng) {
  return g.element_at(rng.next_below(g.order()));
}

}  // namespace hofa::testutil
