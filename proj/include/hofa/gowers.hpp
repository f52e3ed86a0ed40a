#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hofa/abelian.hpp"
#include "hofa/common.hpp"
#include "hofa/cubespace.hpp"
#include "hofa/rng.hpp"

namespace hofa {

// Conjugate the factor at v exactly when v has an odd coordinate sum.
inline cplx star(Vertex v, cplx z) {
  return (vertex_height(v) % 2 == 1) ? std::conj(z) : z;
}

// An indexed family of functions over cube vertices, all on one group.
// Full mode indexes {0,1}^n, punctured mode indexes K_n = {0,1}^n \ {0}.
class FunctionSystem {
 public:
  enum class Mode { kFull, kPunctured };

  FunctionSystem(Mode mode, int dim, std::vector<GroupFunction> members)
      : mode_(mode), dim_(dim), members_(std::move(members)) {
    if (dim_ < 1) throw structural_error("FunctionSystem: dim < 1");
    const std::size_t expect = (std::size_t{1} << dim_) - (is_punctured() ? 1 : 0);
    if (members_.size() != expect)
      throw structural_error("FunctionSystem: wrong member count");
    for (const auto& f : members_)
      if (!(f.group == members_[0].group))
        throw structural_error("FunctionSystem: members on different groups");
  }

  static FunctionSystem full(int dim, std::vector<GroupFunction> members) {
    return FunctionSystem(Mode::kFull, dim, std::move(members));
  }

  static FunctionSystem punctured(int dim, std::vector<GroupFunction> members) {
    return FunctionSystem(Mode::kPunctured, dim, std::move(members));
  }

  // Every member equal to f.
  static FunctionSystem constant_full(int dim, const GroupFunction& f) {
    return full(dim, std::vector<GroupFunction>(std::size_t{1} << dim, f));
  }

  static FunctionSystem constant_punctured(int dim, const GroupFunction& f) {
    return punctured(
        dim, std::vector<GroupFunction>((std::size_t{1} << dim) - 1, f));
  }

  Mode mode() const { return mode_; }
  bool is_punctured() const { return mode_ == Mode::kPunctured; }
  int dim() const { return dim_; }
  const GroupSpec& group() const { return members_[0].group; }

  // v = 0 is invalid in punctured mode.
  const GroupFunction& member(Vertex v) const {
    if (is_punctured()) {
      if (v == 0) throw structural_error("FunctionSystem: vertex 0 is punctured");
      return members_[v - 1];
    }
    return members_[v];
  }

  GroupFunction& member(Vertex v) {
    if (is_punctured()) {
      if (v == 0) throw structural_error("FunctionSystem: vertex 0 is punctured");
      return members_[v - 1];
    }
    return members_[v];
  }

  // Drop the 0 member of a full system.
  FunctionSystem puncture() const {
    if (is_punctured()) return *this;
    std::vector<GroupFunction> m(members_.begin() + 1, members_.end());
    return punctured(dim_, std::move(m));
  }

  double max_sup_norm() const {
    double r = 0.0;
    for (const auto& f : members_) r = std::max(r, f.sup_norm());
    return r;
  }

 private:
  Mode mode_;
  int dim_;
  std::vector<GroupFunction> members_;
};

// Delta_t f (x) = f(x) conj f(x+t)
inline GroupFunction delta(const GroupFunction& f, const GroupElement& t) {
  const GroupTable tbl(f.group);
  const std::uint64_t ti = f.group.index_of(t);
  std::vector<cplx> v(f.values.size());
  for (std::uint64_t x = 0; x < v.size(); ++x)
    v[x] = f.values[x] * std::conj(f.values[tbl.add(x, ti)]);
  return GroupFunction(f.group, std::move(v));
}

namespace detail {

inline GroupFunction delta_by_index(const GroupFunction& f, const GroupTable& tbl,
                                    std::uint64_t ti) {
  std::vector<cplx> v(f.values.size());
  for (std::uint64_t x = 0; x < v.size(); ++x)
    v[x] = f.values[x] * std::conj(f.values[tbl.add(x, ti)]);
  return GroupFunction(f.group, std::move(v));
}

// Subset sums S(v) = sum_{i in v} t_i filled incrementally over bitmasks.
inline void fill_subset_sums(const GroupTable& tbl,
                             const std::vector<std::uint64_t>& t,
                             std::vector<std::uint64_t>& sums) {
  const std::size_t nverts = std::size_t{1} << t.size();
  sums[0] = 0;
  for (Vertex v = 1; v < nverts; ++v) {
    const Vertex low = v & (~v + 1u);
    const int bit = std::countr_zero(low);
    sums[v] = tbl.add(sums[v ^ low], t[bit]);
  }
}

}  // namespace detail

// Mean over (x, t_1..t_n) of the starred vertex product; equals
// ||f||_{U_n}^{2^n} when every member is f.
inline cplx gowers_inner(const FunctionSystem& G, const Budget& budget = {}) {
  if (G.is_punctured())
    throw structural_error("gowers_inner: requires a full-mode system");
  const GroupSpec& g = G.group();
  const int n = G.dim();
  budget.require(Budget::pow_saturating(g.order(), static_cast<unsigned>(n) + 1),
                 "gowers_inner");

  const GroupTable tbl(g);
  const std::size_t nverts = std::size_t{1} << n;
  const std::uint64_t order = g.order();

  // Members with the star convention baked in.
  std::vector<std::vector<cplx>> starred(nverts);
  for (Vertex v = 0; v < nverts; ++v) {
    starred[v].resize(order);
    for (std::uint64_t x = 0; x < order; ++x)
      starred[v][x] = star(v, G.member(v).values[x]);
  }

  KahanCSum total;
  std::vector<std::uint64_t> t(static_cast<std::size_t>(n), 0);
  std::vector<std::uint64_t> sums(nverts);
  while (true) {
    detail::fill_subset_sums(tbl, t, sums);
    for (std::uint64_t x = 0; x < order; ++x) {
      cplx prod = starred[0][x];
      for (Vertex v = 1; v < nverts; ++v) prod *= starred[v][tbl.add(x, sums[v])];
      total.add(prod);
    }
    int pos = n - 1;
    while (pos >= 0) {
      if (++t[pos] < order) break;
      t[pos--] = 0;
    }
    if (pos < 0) break;
  }
  const double denom =
      static_cast<double>(Budget::pow_saturating(order, static_cast<unsigned>(n) + 1));
  return total.value() / denom;
}

// [F](x) = mean over (t_1..t_n) of the starred product over K_n at
// x + sum v_i t_i; an everywhere-defined function on the group.
inline GroupFunction corner_convolution(const FunctionSystem& F,
                                        const Budget& budget = {}) {
  if (!F.is_punctured())
    throw structural_error("corner_convolution: requires a punctured system");
  const GroupSpec& g = F.group();
  const int n = F.dim();
  budget.require(Budget::pow_saturating(g.order(), static_cast<unsigned>(n) + 1),
                 "corner_convolution");

  const GroupTable tbl(g);
  const std::size_t nverts = std::size_t{1} << n;
  const std::uint64_t order = g.order();

  std::vector<std::vector<cplx>> starred(nverts);
  for (Vertex v = 1; v < nverts; ++v) {
    starred[v].resize(order);
    for (std::uint64_t x = 0; x < order; ++x)
      starred[v][x] = star(v, F.member(v).values[x]);
  }

  std::vector<KahanCSum> acc(order);
  std::vector<std::uint64_t> t(static_cast<std::size_t>(n), 0);
  std::vector<std::uint64_t> sums(nverts);
  while (true) {
    detail::fill_subset_sums(tbl, t, sums);
    for (std::uint64_t x = 0; x < order; ++x) {
      cplx prod = {1.0, 0.0};
      for (Vertex v = 1; v < nverts; ++v) prod *= starred[v][tbl.add(x, sums[v])];
      acc[x].add(prod);
    }
    int pos = n - 1;
    while (pos >= 0) {
      if (++t[pos] < order) break;
      t[pos--] = 0;
    }
    if (pos < 0) break;
  }
  const double denom =
      static_cast<double>(Budget::pow_saturating(order, static_cast<unsigned>(n)));
  std::vector<cplx> values(order);
  for (std::uint64_t x = 0; x < order; ++x) values[x] = acc[x].value() / denom;
  return GroupFunction(g, std::move(values));
}

// The dimension-reduced system delta_{i,t} F with members
// f_v(x) conj f_{v+e_i}(x+t), indexed by the i = 0 face.
inline FunctionSystem delta_system(const FunctionSystem& F, int i,
                                   const GroupElement& t) {
  const int n = F.dim();
  if (i < 1 || i > n) throw structural_error("delta_system: coordinate out of range");
  if (n < 2) throw structural_error("delta_system: dim must be >= 2");
  const GroupSpec& g = F.group();
  const GroupTable tbl(g);
  const std::uint64_t ti = g.index_of(t);

  const Vertex low_mask = (Vertex{1} << (i - 1)) - 1;
  auto embed = [&](Vertex w) -> Vertex {
    return static_cast<Vertex>(((w & ~low_mask) << 1) | (w & low_mask));
  };
  const Vertex ei = Vertex{1} << (i - 1);

  const std::size_t out_verts = std::size_t{1} << (n - 1);
  std::vector<GroupFunction> members;
  for (Vertex w = F.is_punctured() ? 1 : 0; w < out_verts; ++w) {
    // embed is injective with embed(0) = 0, so v != 0 in punctured mode
    const Vertex v = embed(w);
    const GroupFunction& lo = F.member(v);
    const GroupFunction& hi = F.member(v | ei);
    std::vector<cplx> vals(g.order());
    for (std::uint64_t x = 0; x < g.order(); ++x)
      vals[x] = lo.values[x] * std::conj(hi.values[tbl.add(x, ti)]);
    members.emplace_back(g, std::move(vals));
  }
  return F.is_punctured() ? FunctionSystem::punctured(n - 1, std::move(members))
                          : FunctionSystem::full(n - 1, std::move(members));
}

enum class GowersMethod { kDirect, kRecursive, kFourier2 };

namespace detail {

// P_1 = |E f|^2; P_k = E_t P_{k-1}(Delta_t f). Returns the 2^k-power of
// the norm.
inline double gowers_power_recursive(const GroupFunction& f, int k,
                                     const GroupTable& tbl) {
  if (k == 1) {
    const cplx m = f.mean();
    return std::norm(m);
  }
  KahanSum acc;
  for (std::uint64_t t = 0; t < f.values.size(); ++t)
    acc.add(gowers_power_recursive(delta_by_index(f, tbl, t), k - 1, tbl));
  return acc.value() / static_cast<double>(f.values.size());
}

}  // namespace detail

// ||f||_{U_k} by an exact method. direct and recursive agree within 1e-9,
// and fourier2 (k = 2 only) matches both through the coefficient formula.
inline double gowers_norm(const GroupFunction& f, int k,
                          GowersMethod method = GowersMethod::kRecursive,
                          const Budget& budget = {}) {
  if (k < 1) throw structural_error("gowers_norm: k must be >= 1");
  const double root = std::ldexp(1.0, -k);  // 2^-k
  switch (method) {
    case GowersMethod::kDirect: {
      const cplx p = gowers_inner(FunctionSystem::constant_full(k, f), budget);
      return std::pow(std::max(0.0, p.real()), root);
    }
    case GowersMethod::kRecursive: {
      budget.require(
          Budget::pow_saturating(f.group.order(), static_cast<unsigned>(k)),
          "gowers_norm recursive");
      const GroupTable tbl(f.group);
      return std::pow(std::max(0.0, detail::gowers_power_recursive(f, k, tbl)),
                      root);
    }
    case GowersMethod::kFourier2: {
      if (k != 2)
        throw structural_error("gowers_norm: fourier2 is only valid for k = 2");
      KahanSum s;
      for (const cplx& z : dft(f)) s.add(sqr(std::norm(z)));
      return std::pow(s.value(), 0.25);
    }
  }
  throw structural_error("gowers_norm: unknown method");
}

// Unbiased Monte Carlo estimate of ||f||_{U_k}^{2^k} (the mean, before the
// root). Negative estimates of tiny means clamp to zero with a flag.
struct MonteCarloEstimate {
  double norm = 0.0;        // root applied after clamping
  double power_mean = 0.0;  // unbiased estimate of the 2^k-power
  double std_error = 0.0;   // standard error of power_mean
  std::uint64_t samples = 0;
  bool clamped = false;
};

inline MonteCarloEstimate gowers_norm_monte_carlo(const GroupFunction& f, int k,
                                                  std::uint64_t samples,
                                                  std::uint64_t seed) {
  if (k < 1) throw structural_error("gowers_norm_monte_carlo: k must be >= 1");
  if (samples < 1)
    throw structural_error("gowers_norm_monte_carlo: need at least one sample");
  const GroupTable tbl(f.group);
  const std::uint64_t order = f.group.order();
  const std::size_t nverts = std::size_t{1} << k;

  CounterRng rng(seed);
  std::vector<std::uint64_t> t(static_cast<std::size_t>(k));
  std::vector<std::uint64_t> sums(nverts);
  double mean = 0.0, m2 = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    const std::uint64_t x = rng.next_below(order);
    for (auto& tt : t) tt = rng.next_below(order);
    detail::fill_subset_sums(tbl, t, sums);
    cplx prod = f.values[x];
    for (Vertex v = 1; v < nverts; ++v)
      prod *= star(v, f.values[tbl.add(x, sums[v])]);
    const double val = prod.real();
    const double d = val - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (val - mean);
  }
  MonteCarloEstimate est;
  est.samples = samples;
  est.power_mean = mean;
  est.std_error = samples > 1
                      ? std::sqrt(m2 / (static_cast<double>(samples) *
                                        static_cast<double>(samples - 1)))
                      : 0.0;
  est.clamped = mean < 0.0;
  est.norm = std::pow(std::max(0.0, mean), std::ldexp(1.0, -k));
  return est;
}

// --- identity residuals -----------------------------------------------------
//
// The three identities relating inner products and convolutions:
//   coincon:      (G) = ([G], conj g_0)
//   expectation:  E((G)^x) = (G), the cube-set average against the
//                 parametrized average (the cube set is enumerated by
//                 constraint checking, independently of the (x,t) form)
//   rankcon:      E_{y in C_0^k}[F]^x(z+y) = [F](psi_0(z)) for every z

inline double identity_residual_coincon(const FunctionSystem& G,
                                        const Budget& budget = {}) {
  const cplx lhs = gowers_inner(G, budget);
  const GroupFunction conv = corner_convolution(G.puncture(), budget);
  const cplx rhs = inner_product(conv, G.member(0).conjugate());
  return std::abs(lhs - rhs);
}

inline double identity_residual_expectation(const FunctionSystem& G,
                                            const Budget& budget = {}) {
  const GroupSpec& g = G.group();
  const int n = G.dim();
  const std::size_t nverts = std::size_t{1} << n;
  budget.require(
      Budget::pow_saturating(g.order(), static_cast<unsigned>(nverts)),
      "identity_residual_expectation");

  const GroupTable tbl(g);
  // Enumerate the cube set by checking 2-face alternating sums on raw
  // labelings; no use of the (x, t) parametrization on this route.
  struct Face2 {
    Vertex base, bi, bj;
  };
  std::vector<Face2> faces;
  for_each_face(n, 2, [&](Vertex free_mask, Vertex base) {
    Vertex bits[2];
    int c = 0;
    for (int b = 0; b < n; ++b)
      if ((free_mask >> b) & 1u) bits[c++] = Vertex{1} << b;
    faces.push_back({base, bits[0], bits[1]});
  });

  std::vector<std::uint64_t> labels(nverts, 0);
  KahanCSum total;
  std::uint64_t count = 0;
  while (true) {
    bool cube = true;
    for (const auto& fc : faces) {
      // c(00) - c(10) - c(01) + c(11) == 0
      const std::uint64_t s1 = tbl.add(labels[fc.base], labels[fc.base | fc.bi | fc.bj]);
      const std::uint64_t s2 = tbl.add(labels[fc.base | fc.bi], labels[fc.base | fc.bj]);
      if (s1 != s2) {
        cube = false;
        break;
      }
    }
    if (cube) {
      cplx prod = {1.0, 0.0};
      for (Vertex v = 0; v < nverts; ++v)
        prod *= star(v, G.member(v).values[labels[v]]);
      total.add(prod);
      ++count;
    }
    std::size_t pos = 0;
    while (pos < nverts) {
      if (++labels[pos] < g.order()) break;
      labels[pos++] = 0;
    }
    if (pos == nverts) break;
  }
  const cplx lhs = total.value() / static_cast<double>(count);
  const cplx rhs = gowers_inner(G, budget);
  return std::abs(lhs - rhs);
}

inline double identity_residual_rankcon(const FunctionSystem& F,
                                        const Budget& budget = {}) {
  if (!F.is_punctured())
    throw structural_error("identity_residual_rankcon: punctured system required");
  const GroupSpec& g = F.group();
  const int k = F.dim();
  const std::uint64_t order = g.order();
  budget.require(
      Budget::pow_saturating(order, 2 * static_cast<unsigned>(k) + 1),
      "identity_residual_rankcon");

  const GroupTable tbl(g);
  const std::size_t nverts = std::size_t{1} << k;
  const GroupFunction conv = corner_convolution(F, budget);

  std::vector<std::vector<cplx>> starred(nverts);
  for (Vertex v = 1; v < nverts; ++v) {
    starred[v].resize(order);
    for (std::uint64_t x = 0; x < order; ++x)
      starred[v][x] = star(v, F.member(v).values[x]);
  }

  double worst = 0.0;
  // z = (x, t), y = (0, s)
  std::vector<std::uint64_t> t(static_cast<std::size_t>(k), 0);
  std::vector<std::uint64_t> s(static_cast<std::size_t>(k), 0);
  std::vector<std::uint64_t> sums(nverts);
  while (true) {
    for (std::uint64_t x = 0; x < order; ++x) {
      KahanCSum acc;
      // average over y in C_0^k
      std::fill(s.begin(), s.end(), 0);
      while (true) {
        std::vector<std::uint64_t> ts(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) ts[i] = tbl.add(t[i], s[i]);
        detail::fill_subset_sums(tbl, ts, sums);
        cplx prod = {1.0, 0.0};
        for (Vertex v = 1; v < nverts; ++v)
          prod *= starred[v][tbl.add(x, sums[v])];
        acc.add(prod);
        int pos = k - 1;
        while (pos >= 0) {
          if (++s[pos] < order) break;
          s[pos--] = 0;
        }
        if (pos < 0) break;
      }
      const double denom = static_cast<double>(
          Budget::pow_saturating(order, static_cast<unsigned>(k)));
      const cplx avg = acc.value() / denom;
      worst = std::max(worst, std::abs(avg - conv.values[x]));
    }
    int pos = k - 1;
    while (pos >= 0) {
      if (++t[pos] < order) break;
      t[pos--] = 0;
    }
    if (pos < 0) break;
  }
  return worst;
}

struct IdentityReport {
  std::string which;
  double residual = 0.0;
};

// which: "coincon" | "expectation" | "rankcon". Full systems for the first
// two, punctured for the third.
inline IdentityReport check_identities(const FunctionSystem& system,
                                       const std::string& which,
                                       const Budget& budget = {}) {
  IdentityReport r;
  r.which = which;
  if (which == "coincon") {
    r.residual = identity_residual_coincon(system, budget);
  } else if (which == "expectation") {
    r.residual = identity_residual_expectation(system, budget);
  } else if (which == "rankcon") {
    r.residual = identity_residual_rankcon(system, budget);
  } else {
    throw structural_error("check_identities: unknown identity " + which);
  }
  return r;
}

}  // namespace hofa
