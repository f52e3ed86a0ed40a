#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <map>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "hofa/abelian.hpp"
#include "hofa/common.hpp"

namespace hofa {

using bigint = boost::multiprecision::cpp_int;

// Vertices of {0,1}^n are bitmasks; coordinate 1 is the least significant
// bit.
using Vertex = std::uint32_t;

inline int vertex_height(Vertex v) { return std::popcount(v); }

// Enumerate the d-dimensional faces of {0,1}^n as (free_mask, base) pairs:
// free_mask has d set bits, base assigns the remaining coordinates.
template <typename Fn>
void for_each_face(int n, int d, Fn&& fn) {
  if (d < 0 || d > n) return;
  const Vertex all = static_cast<Vertex>((1u << n) - 1);
  for (Vertex free_mask = 0;; ++free_mask) {
    if (free_mask > all) break;
    if (std::popcount(free_mask) != d) continue;
    const Vertex fixed = all & ~free_mask;
    // iterate over all assignments of the fixed coordinates
    Vertex base = 0;
    while (true) {
      fn(free_mask, base);
      if (base == fixed) break;
      base = (base - fixed) & fixed;  // next submask
    }
    if (free_mask == all) break;
  }
}

// Enumerate the vertices of a face in increasing submask order.
template <typename Fn>
void for_each_face_vertex(Vertex free_mask, Vertex base, Fn&& fn) {
  Vertex w = 0;
  while (true) {
    fn(static_cast<Vertex>(base | w), vertex_height(w));
    if (w == free_mask) break;
    w = (w - free_mask) & free_mask;
  }
}

// One coordinate of a cube morphism: constant 0/1, a source variable, or a
// negated source variable. Variables are numbered from 1.
struct CoordDescriptor {
  enum class Kind { kConst0, kConst1, kVar, kNegVar };
  Kind kind = Kind::kConst0;
  int var = 0;

  bool operator==(const CoordDescriptor&) const = default;

  static CoordDescriptor const0() { return {Kind::kConst0, 0}; }
  static CoordDescriptor const1() { return {Kind::kConst1, 0}; }
  static CoordDescriptor variable(int i) { return {Kind::kVar, i}; }
  static CoordDescriptor negated(int i) { return {Kind::kNegVar, i}; }

  CoordDescriptor negate() const {
    switch (kind) {
      case Kind::kConst0:
        return const1();
      case Kind::kConst1:
        return const0();
      case Kind::kVar:
        return negated(var);
      case Kind::kNegVar:
        return variable(var);
    }
    return const0();
  }

  int eval(Vertex v) const {
    switch (kind) {
      case Kind::kConst0:
        return 0;
      case Kind::kConst1:
        return 1;
      case Kind::kVar:
        return (v >> (var - 1)) & 1u;
      case Kind::kNegVar:
        return 1 - ((v >> (var - 1)) & 1u);
    }
    return 0;
  }
};

// A morphism {0,1}^a -> {0,1}^b given coordinatewise by descriptors.
class CubeMorphism {
 public:
  CubeMorphism(int source_dim, std::vector<CoordDescriptor> descriptors)
      : source_dim_(source_dim), descriptors_(std::move(descriptors)) {
    if (source_dim_ < 0) throw structural_error("CubeMorphism: negative dim");
    for (const auto& d : descriptors_) {
      if ((d.kind == CoordDescriptor::Kind::kVar ||
           d.kind == CoordDescriptor::Kind::kNegVar) &&
          (d.var < 1 || d.var > source_dim_))
        throw structural_error("CubeMorphism: variable index out of range");
    }
  }

  int source_dim() const { return source_dim_; }
  int target_dim() const { return static_cast<int>(descriptors_.size()); }
  const std::vector<CoordDescriptor>& descriptors() const { return descriptors_; }

  Vertex apply(Vertex v) const {
    Vertex out = 0;
    for (std::size_t j = 0; j < descriptors_.size(); ++j)
      out |= static_cast<Vertex>(descriptors_[j].eval(v)) << j;
    return out;
  }

  // Composition other_after(this(v)): source of *this, target of after.
  CubeMorphism then(const CubeMorphism& after) const {
    if (after.source_dim() != target_dim())
      throw structural_error("CubeMorphism::then: dimension mismatch");
    std::vector<CoordDescriptor> out;
    out.reserve(after.descriptors_.size());
    for (const auto& d : after.descriptors_) {
      switch (d.kind) {
        case CoordDescriptor::Kind::kConst0:
        case CoordDescriptor::Kind::kConst1:
          out.push_back(d);
          break;
        case CoordDescriptor::Kind::kVar:
          out.push_back(descriptors_[d.var - 1]);
          break;
        case CoordDescriptor::Kind::kNegVar:
          out.push_back(descriptors_[d.var - 1].negate());
          break;
      }
    }
    return CubeMorphism(source_dim_, std::move(out));
  }

  static CubeMorphism identity(int n) {
    std::vector<CoordDescriptor> d;
    d.reserve(n);
    for (int i = 1; i <= n; ++i) d.push_back(CoordDescriptor::variable(i));
    return CubeMorphism(n, std::move(d));
  }

  // Inclusion of a d-face: source variables fill the free coordinates in
  // increasing order, fixed coordinates come from base.
  static CubeMorphism face_inclusion(int n, Vertex free_mask, Vertex base) {
    std::vector<CoordDescriptor> d(n);
    int next_var = 1;
    for (int j = 0; j < n; ++j) {
      if ((free_mask >> j) & 1u) {
        d[j] = CoordDescriptor::variable(next_var++);
      } else {
        d[j] = ((base >> j) & 1u) ? CoordDescriptor::const1()
                                  : CoordDescriptor::const0();
      }
    }
    return CubeMorphism(next_var - 1, std::move(d));
  }

 private:
  int source_dim_;
  std::vector<CoordDescriptor> descriptors_;
};

// A labeling of cube vertices by group elements, in bitmask order.
struct CubeMap {
  GroupSpec group;
  int dim = 0;
  std::vector<GroupElement> labels;

  CubeMap() = default;

  CubeMap(GroupSpec g, int n, std::vector<GroupElement> l)
      : group(std::move(g)), dim(n), labels(std::move(l)) {
    if (dim < 0) throw structural_error("CubeMap: negative dimension");
    if (labels.size() != (std::size_t{1} << dim))
      throw structural_error("CubeMap: label count != 2^dim");
    for (const auto& x : labels) group.check_element(x);
  }

  const GroupElement& at(Vertex v) const { return labels[v]; }
  std::size_t vertex_count() const { return labels.size(); }
};

// A labeling of a subset of cube vertices.
struct PartialCubeMap {
  GroupSpec group;
  int dim = 0;
  std::map<Vertex, GroupElement> labels;

  PartialCubeMap() = default;

  PartialCubeMap(GroupSpec g, int n, std::map<Vertex, GroupElement> l)
      : group(std::move(g)), dim(n), labels(std::move(l)) {
    if (labels.empty()) throw structural_error("PartialCubeMap: empty domain");
    for (const auto& [v, x] : labels) {
      if (v >= (Vertex{1} << dim))
        throw structural_error("PartialCubeMap: vertex out of range");
      group.check_element(x);
    }
  }
};

// c(e) = x + sum_i t_i e_i
inline CubeMap cube_from_params(const GroupSpec& g, const GroupElement& x,
                                const std::vector<GroupElement>& t) {
  const int n = static_cast<int>(t.size());
  std::vector<GroupElement> labels(std::size_t{1} << n, x);
  for (Vertex v = 0; v < (Vertex{1} << n); ++v) {
    GroupElement acc = x;
    for (int i = 0; i < n; ++i)
      if ((v >> i) & 1u) acc = g.add(acc, t[i]);
    labels[v] = std::move(acc);
  }
  return CubeMap(g, n, std::move(labels));
}

// True iff every (k+1)-dimensional face has vanishing alternating sum. For
// k <= -1 the only degree-k cube is the constant identity labeling. Faces
// of dimension above the cube's own dimension impose nothing.
inline bool is_degree_cube(const CubeMap& c, int k) {
  if (k <= -1) {
    for (const auto& x : c.labels)
      if (!(x == c.group.identity())) return false;
    return true;
  }
  if (k + 1 > c.dim) return true;
  bool ok = true;
  for_each_face(c.dim, k + 1, [&](Vertex free_mask, Vertex base) {
    if (!ok) return;
    GroupElement sum = c.group.identity();
    for_each_face_vertex(free_mask, base, [&](Vertex v, int h) {
      sum = (h % 2 == 0) ? c.group.add(sum, c.at(v))
                         : c.group.sub(sum, c.at(v));
    });
    if (!(sum == c.group.identity())) ok = false;
  });
  return ok;
}

// The 2-face alternating-sum criterion; equivalent to extendability to an
// affine homomorphism.
inline bool is_cube(const CubeMap& c) { return is_degree_cube(c, 1); }

// Result labels v -> c(phi(v)).
inline CubeMap apply_morphism(const CubeMap& c, const CubeMorphism& phi) {
  if (phi.target_dim() != c.dim)
    throw structural_error("apply_morphism: morphism target != cube dimension");
  const int a = phi.source_dim();
  std::vector<GroupElement> labels;
  labels.reserve(std::size_t{1} << a);
  for (Vertex v = 0; v < (Vertex{1} << a); ++v)
    labels.push_back(c.at(phi.apply(v)));
  return CubeMap(c.group, a, std::move(labels));
}

namespace detail {

// Diagonalization U*A*V = D over the integers with unimodular U, V.
// Divisibility of the diagonal is not needed by the solver below.
struct SmithForm {
  std::vector<std::vector<bigint>> u, v;
  std::vector<bigint> diag;  // length min(p,q)
  std::size_t rows, cols;
};

inline SmithForm smith_diagonalize(std::vector<std::vector<bigint>> a,
                                   std::size_t q) {
  const std::size_t p = a.size();
  SmithForm s;
  s.rows = p;
  s.cols = q;
  s.u.assign(p, std::vector<bigint>(p, 0));
  s.v.assign(q, std::vector<bigint>(q, 0));
  for (std::size_t i = 0; i < p; ++i) s.u[i][i] = 1;
  for (std::size_t j = 0; j < q; ++j) s.v[j][j] = 1;

  auto swap_rows = [&](std::size_t i, std::size_t j) {
    std::swap(a[i], a[j]);
    std::swap(s.u[i], s.u[j]);
  };
  auto swap_cols = [&](std::size_t i, std::size_t j) {
    for (std::size_t r = 0; r < p; ++r) std::swap(a[r][i], a[r][j]);
    for (std::size_t r = 0; r < q; ++r) std::swap(s.v[r][i], s.v[r][j]);
  };
  auto add_row = [&](std::size_t dst, std::size_t src, const bigint& m) {
    for (std::size_t c = 0; c < q; ++c) a[dst][c] += m * a[src][c];
    for (std::size_t c = 0; c < p; ++c) s.u[dst][c] += m * s.u[src][c];
  };
  auto add_col = [&](std::size_t dst, std::size_t src, const bigint& m) {
    for (std::size_t r = 0; r < p; ++r) a[r][dst] += m * a[r][src];
    for (std::size_t r = 0; r < q; ++r) s.v[r][dst] += m * s.v[r][src];
  };

  const std::size_t steps = std::min(p, q);
  for (std::size_t t = 0; t < steps; ++t) {
    // find a nonzero pivot of minimal absolute value
    bool found = false;
    std::size_t pi = t, pj = t;
    bigint best = 0;
    for (std::size_t i = t; i < p; ++i)
      for (std::size_t j = t; j < q; ++j)
        if (a[i][j] != 0 &&
            (!found || boost::multiprecision::abs(a[i][j]) <
                           boost::multiprecision::abs(best))) {
          best = a[i][j];
          pi = i;
          pj = j;
          found = true;
        }
    if (!found) {
      for (std::size_t r = t; r < steps; ++r) s.diag.push_back(0);
      return s;
    }
    swap_rows(t, pi);
    swap_cols(t, pj);

    // clear row and column t
    bool dirty = true;
    while (dirty) {
      dirty = false;
      for (std::size_t i = t + 1; i < p; ++i) {
        if (a[i][t] == 0) continue;
        bigint f = a[i][t] / a[t][t];
        add_row(i, t, -f);
        if (a[i][t] != 0) {
          swap_rows(t, i);
          dirty = true;
        }
      }
      for (std::size_t j = t + 1; j < q; ++j) {
        if (a[t][j] == 0) continue;
        bigint f = a[t][j] / a[t][t];
        add_col(j, t, -f);
        if (a[t][j] != 0) {
          swap_cols(t, j);
          dirty = true;
        }
      }
    }
    s.diag.push_back(a[t][t]);
  }
  return s;
}

inline long long mod_reduce(const bigint& x, long long m) {
  bigint r = x % m;
  if (r < 0) r += m;
  return static_cast<long long>(r);
}

inline long long mod_inverse(long long a, long long m) {
  long long t = 0, newt = 1, r = m, newr = a % m;
  if (newr < 0) newr += m;
  while (newr != 0) {
    long long qt = r / newr;
    std::swap(t -= qt * newt, newt);
    std::swap(r -= qt * newr, newr);
  }
  if (r != 1) throw structural_error("mod_inverse: not invertible");
  return ((t % m) + m) % m;
}

}  // namespace detail

// The solution set of a degree-k completion problem: empty, or an affine
// coset given by one particular solution plus generators of the group of
// completions of the identically-zero partial map.
struct HomSolution {
  bool feasible = false;
  CubeMap particular;
  std::vector<CubeMap> generators;
  std::vector<std::uint64_t> generator_orders;
  // Product of the generator orders; saturates at uint64 max.
  std::uint64_t cardinality = 0;

  // Enumerate all solutions (budget-capped) in a fixed order.
  template <typename Fn>
  void for_each_solution(const Budget& budget, Fn&& fn) const {
    if (!feasible) return;
    budget.require(cardinality, "HomSolution::for_each_solution");
    std::vector<std::uint64_t> coeff(generators.size(), 0);
    const GroupSpec& g = particular.group;
    while (true) {
      CubeMap cur = particular;
      for (std::size_t i = 0; i < generators.size(); ++i)
        for (std::size_t v = 0; v < cur.labels.size(); ++v)
          cur.labels[v] = g.add(
              cur.labels[v],
              g.scale(generators[i].labels[v],
                      static_cast<long long>(coeff[i])));
      fn(cur);
      std::size_t pos = 0;
      while (pos < coeff.size()) {
        if (++coeff[pos] < generator_orders[pos]) break;
        coeff[pos++] = 0;
      }
      if (pos == coeff.size()) break;
    }
  }
};

// All completions of a partial labeling to full degree-k cubes, solved by
// Smith-style elimination over each cyclic factor independently.
inline HomSolution solve_hom(const PartialCubeMap& partial, int k) {
  const GroupSpec& g = partial.group;
  const int n = partial.dim;
  const std::size_t nverts = std::size_t{1} << n;

  HomSolution out;

  // Degenerate degree: only the identically-zero labeling is a cube.
  if (k <= -1) {
    for (const auto& [v, x] : partial.labels)
      if (!(x == g.identity())) return out;
    out.feasible = true;
    out.particular =
        CubeMap(g, n, std::vector<GroupElement>(nverts, g.identity()));
    out.cardinality = 1;
    return out;
  }

  std::vector<int> unknown_of_vertex(nverts, -1);
  std::vector<Vertex> unknowns;
  for (Vertex v = 0; v < nverts; ++v) {
    if (!partial.labels.count(v)) {
      unknown_of_vertex[v] = static_cast<int>(unknowns.size());
      unknowns.push_back(v);
    }
  }
  const std::size_t q = unknowns.size();

  // Constraint rows over the unknowns; per-factor right-hand sides.
  std::vector<std::vector<bigint>> a;
  std::vector<std::vector<long long>> rhs_raw;  // per row, per factor
  if (k + 1 <= n) {
    for_each_face(n, k + 1, [&](Vertex free_mask, Vertex base) {
      std::vector<bigint> row(q, 0);
      std::vector<long long> rhs(g.rank(), 0);
      for_each_face_vertex(free_mask, base, [&](Vertex v, int h) {
        const int sign = (h % 2 == 0) ? 1 : -1;
        auto it = partial.labels.find(v);
        if (it == partial.labels.end()) {
          row[unknown_of_vertex[v]] += sign;
        } else {
          for (std::size_t f = 0; f < g.rank(); ++f)
            rhs[f] -= sign * static_cast<long long>(it->second.residues[f]);
        }
      });
      a.push_back(std::move(row));
      rhs_raw.push_back(std::move(rhs));
    });
  }
  const std::size_t p = a.size();

  detail::SmithForm snf = detail::smith_diagonalize(a, q);

  // Solve per cyclic factor; the integer diagonalization is shared.
  std::vector<std::vector<long long>> particular_residues(
      g.rank(), std::vector<long long>(q, 0));
  // generators: per factor, list of (vector over unknowns, order)
  std::vector<std::pair<std::vector<long long>, std::uint64_t>> gens;
  std::vector<std::size_t> gen_factor;

  for (std::size_t f = 0; f < g.rank(); ++f) {
    const long long m = g.moduli()[f];
    // c = U * rhs
    std::vector<long long> c(p, 0);
    for (std::size_t i = 0; i < p; ++i) {
      bigint acc = 0;
      for (std::size_t j = 0; j < p; ++j) acc += snf.u[i][j] * rhs_raw[j][f];
      c[i] = detail::mod_reduce(acc, m);
    }
    std::vector<long long> z(q, 0);
    const std::size_t r = snf.diag.size();
    for (std::size_t i = 0; i < p; ++i) {
      if (i < r) {
        const long long d = detail::mod_reduce(snf.diag[i], m);
        const long long gg = std::gcd(d == 0 ? m : d, m);
        if (c[i] % gg != 0) return out;  // infeasible
        if (gg != m) {
          // z_i = (c/g) * inv(d/g) mod (m/g)
          const long long mg = m / gg;
          z[i] = (c[i] / gg) % mg * detail::mod_inverse((d / gg) % mg, mg) % mg;
        } else {
          z[i] = 0;  // free coordinate, handled as generator
        }
      } else {
        if (c[i] % m != 0) return out;  // 0 == c_i must hold
      }
    }
    // x = V z mod m
    for (std::size_t xj = 0; xj < q; ++xj) {
      bigint acc = 0;
      for (std::size_t zj = 0; zj < q; ++zj) acc += snf.v[xj][zj] * z[zj];
      particular_residues[f][xj] = detail::mod_reduce(acc, m);
    }
    // homogeneous generators
    for (std::size_t j = 0; j < q; ++j) {
      std::uint64_t order;
      long long mult;
      if (j < r) {
        const long long d = detail::mod_reduce(snf.diag[j], m);
        const long long gg = std::gcd(d == 0 ? m : d, m);
        if (gg <= 1) continue;
        order = static_cast<std::uint64_t>(gg);
        mult = m / gg;
      } else {
        order = static_cast<std::uint64_t>(m);
        mult = 1;
      }
      std::vector<long long> vec(q, 0);
      for (std::size_t xj = 0; xj < q; ++xj)
        vec[xj] = detail::mod_reduce(snf.v[xj][j] * mult, m);
      gens.emplace_back(std::move(vec), order);
      gen_factor.push_back(f);
    }
  }

  // assemble particular solution
  std::vector<GroupElement> labels(nverts, g.identity());
  for (const auto& [v, x] : partial.labels) labels[v] = x;
  for (std::size_t j = 0; j < q; ++j) {
    std::vector<int> res(g.rank());
    for (std::size_t f = 0; f < g.rank(); ++f)
      res[f] = static_cast<int>(particular_residues[f][j]);
    labels[unknowns[j]] = GroupElement{std::move(res)};
  }
  out.particular = CubeMap(g, n, std::move(labels));

  out.cardinality = 1;
  for (std::size_t gi = 0; gi < gens.size(); ++gi) {
    std::vector<GroupElement> gl(nverts, g.identity());
    for (std::size_t j = 0; j < q; ++j) {
      std::vector<int> res(g.rank(), 0);
      res[gen_factor[gi]] = static_cast<int>(gens[gi].first[j]);
      gl[unknowns[j]] = GroupElement{std::move(res)};
    }
    out.generators.emplace_back(g, n, std::move(gl));
    out.generator_orders.push_back(gens[gi].second);
    if (out.cardinality > Budget::kUnbounded / gens[gi].second)
      out.cardinality = Budget::kUnbounded;
    else
      out.cardinality *= gens[gi].second;
  }
  out.feasible = true;
  return out;
}

// Visit every cube of C^n(A) through the (x, t_1..t_n) parametrization, in
// lexicographic order of parameter indices. Labels are element indices.
template <typename Fn>
void for_each_cube_indices(const GroupSpec& g, int n, const Budget& budget,
                           Fn&& fn) {
  const std::uint64_t total =
      Budget::pow_saturating(g.order(), static_cast<unsigned>(n) + 1);
  budget.require(total, "for_each_cube_indices");
  GroupTable tbl(g);
  const std::size_t nverts = std::size_t{1} << n;
  std::vector<std::uint64_t> params(static_cast<std::size_t>(n) + 1, 0);
  std::vector<std::uint64_t> labels(nverts);
  while (true) {
    for (Vertex v = 0; v < nverts; ++v) {
      std::uint64_t acc = params[0];
      for (int i = 0; i < n; ++i)
        if ((v >> i) & 1u) acc = tbl.add(acc, params[i + 1]);
      labels[v] = acc;
    }
    fn(labels);
    int pos = n;
    while (pos >= 0) {
      if (++params[pos] < g.order()) break;
      params[pos--] = 0;
    }
    if (pos < 0) break;
  }
}

}  // namespace hofa
