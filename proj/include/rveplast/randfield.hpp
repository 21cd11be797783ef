#pragma once

// I.i.d. spring parameters sampled per edge. Every draw is keyed by
// (seed, sample id, absolute tail position, edge type, parameter), so the
// values on a sub-box do not depend on the box size that was sampled.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "rveplast/lattice.hpp"
#include "rveplast/philox.hpp"

namespace rveplast {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Uniform marginals for the elastic modulus a, hardening modulus h and yield
/// weight sy of every spring.
struct MaterialLaw {
  Interval a{1.0e6, 2.0e6};
  Interval h{1.25e6, 2.0e6};
  Interval sy{0.9e3, 1.1e3};

  static MaterialLaw point_mass(double a, double h, double sy) {
    return {{a, a}, {h, h}, {sy, sy}};
  }

  /// Throws std::invalid_argument naming the offending parameter.
  void validate() const {
    auto check = [](const Interval& i, const char* name, bool allow_zero) {
      if (!(i.lo <= i.hi)) throw std::invalid_argument(std::string("material law: ") + name + " has lo > hi");
      if (allow_zero ? !(i.lo >= 0.0) : !(i.lo > 0.0))
        throw std::invalid_argument(std::string("material law: ") + name +
                                    (allow_zero ? " must be >= 0" : " must be > 0"));
    };
    check(a, "a", false);
    check(h, "h", false);
    check(sy, "sy", true);
  }
  friend bool operator==(const MaterialLaw&, const MaterialLaw&) = default;
};

enum class Parameter : std::uint32_t { modulus = 0, hardening = 1, yield = 2 };

/// The uniform variate in [0,1) for one (seed, sample, position, type, parameter) key.
inline double keyed_uniform(std::uint64_t seed, std::uint32_t sample_id, int x, int y, int type,
                            Parameter which) {
  const PhiloxCounter ctr{sample_id, static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y),
                          static_cast<std::uint32_t>(type) * 4u + static_cast<std::uint32_t>(which)};
  const PhiloxKey key{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  const PhiloxCounter out = philox4x32_10(ctr, key);
  return to_unit_double(out[0], out[1]);
}

inline double draw(const Interval& i, double u) { return i.lo == i.hi ? i.lo : i.lo + (i.hi - i.lo) * u; }

/// One quenched realization ω of the coefficients on Λ_L, indexed by edge.
struct Realization {
  MaterialLaw law;
  std::uint64_t seed = 0;
  std::uint32_t sample_id = 0;
  int L = 0;
  std::vector<double> a;
  std::vector<double> h;
  std::vector<double> sy;

  PeriodicLattice lattice() const { return PeriodicLattice(L); }
  friend bool operator==(const Realization&, const Realization&) = default;
};

inline Realization sample(const MaterialLaw& law, std::uint64_t seed, std::uint32_t sample_id, int L) {
  law.validate();
  const PeriodicLattice lat(L);
  Realization r{law, seed, sample_id, L, {}, {}, {}};
  const auto n = static_cast<std::size_t>(lat.edge_count());
  r.a.resize(n);
  r.h.resize(n);
  r.sy.resize(n);
  for (int e = 0; e < lat.edge_count(); ++e) {
    const NodeCoord c = lat.coord(lat.tail(e));
    const int type = lat.edge_type(e);
    r.a[e] = draw(law.a, keyed_uniform(seed, sample_id, c.x, c.y, type, Parameter::modulus));
    r.h[e] = draw(law.h, keyed_uniform(seed, sample_id, c.x, c.y, type, Parameter::hardening));
    r.sy[e] = draw(law.sy, keyed_uniform(seed, sample_id, c.x, c.y, type, Parameter::yield));
  }
  return r;
}

/// Sub-box [0,L)^2 of a larger realization. Edges are kept by tail node, so
/// edges that wrap on the small box inherit the value of the big box's
/// interior edge at that tail.
inline Realization restrict(const Realization& big, int L) {
  if (L < 1 || L > big.L)
    throw std::invalid_argument("restrict: side " + std::to_string(L) + " outside [1, " + std::to_string(big.L) + "]");
  const PeriodicLattice small(L);
  const PeriodicLattice large(big.L);
  Realization r{big.law, big.seed, big.sample_id, L, {}, {}, {}};
  const auto n = static_cast<std::size_t>(small.edge_count());
  r.a.resize(n);
  r.h.resize(n);
  r.sy.resize(n);
  for (int e = 0; e < small.edge_count(); ++e) {
    const NodeCoord c = small.coord(small.tail(e));
    const int src = large.edge(large.node(c.x, c.y), small.edge_type(e));
    r.a[e] = big.a[src];
    r.h[e] = big.h[src];
    r.sy[e] = big.sy[src];
  }
  return r;
}

}  // namespace rveplast
