#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <vector>

#include "hofa/abelian.hpp"
#include "hofa/common.hpp"
#include "hofa/gowers.hpp"
#include "hofa/rng.hpp"

namespace hofa {

// A subgroup of a finite abelian group, kept as an enumerated closure of
// its generators.
class Subgroup {
 public:
  Subgroup(GroupSpec parent, std::vector<GroupElement> generators)
      : parent_(std::move(parent)), generators_(std::move(generators)) {
    const GroupTable tbl(parent_);
    std::set<std::uint64_t> seen{0};
    std::vector<std::uint64_t> queue{0};
    std::vector<std::uint64_t> gens;
    for (const auto& g : generators_) {
      gens.push_back(parent_.index_of(g));
      gens.push_back(tbl.neg(gens.back()));
    }
    while (!queue.empty()) {
      const std::uint64_t cur = queue.back();
      queue.pop_back();
      for (std::uint64_t g : gens) {
        const std::uint64_t nxt = tbl.add(cur, g);
        if (seen.insert(nxt).second) queue.push_back(nxt);
      }
    }
    elements_.assign(seen.begin(), seen.end());
  }

  static Subgroup whole(const GroupSpec& g) {
    std::vector<GroupElement> gens;
    for (std::size_t i = 0; i < g.rank(); ++i) {
      std::vector<int> r(g.rank(), 0);
      r[i] = 1;
      gens.push_back(GroupElement{std::move(r)});
    }
    return Subgroup(g, std::move(gens));
  }

  static Subgroup trivial(const GroupSpec& g) {
    return Subgroup(g, {g.identity()});
  }

  // Validates closure of an externally supplied element list.
  static Subgroup from_elements(const GroupSpec& g,
                                const std::vector<GroupElement>& elements) {
    Subgroup s(g, elements);
    if (s.size() != elements.size())
      throw structural_error("Subgroup: element list is not closed");
    return s;
  }

  const GroupSpec& parent() const { return parent_; }
  const std::vector<std::uint64_t>& element_indices() const { return elements_; }
  std::uint64_t size() const { return elements_.size(); }

  bool contains_index(std::uint64_t idx) const {
    return std::binary_search(elements_.begin(), elements_.end(), idx);
  }

 private:
  GroupSpec parent_;
  std::vector<GroupElement> generators_;
  std::vector<std::uint64_t> elements_;  // sorted
};

// f_B(z) = E_{y in B} f(z+y), the exact coset average.
inline GroupFunction shift_average(const GroupFunction& f, const Subgroup& B) {
  if (!(B.parent() == f.group))
    throw structural_error("shift_average: subgroup of a different group");
  const GroupTable tbl(f.group);
  std::vector<cplx> out(f.values.size());
  for (std::uint64_t z = 0; z < out.size(); ++z) {
    KahanCSum acc;
    for (std::uint64_t y : B.element_indices()) acc.add(f.values[tbl.add(z, y)]);
    out[z] = acc.value() / static_cast<double>(B.size());
  }
  return GroupFunction(f.group, std::move(out));
}

namespace detail {

// Shared sample-count rule: floor(1 + 4/eps^2) keeps the hard cap
// n <= 1 + 4/eps^2 while still forcing 4/n <= eps^2. When the bound
// reaches |B| the whole subgroup is used once, which makes the average
// exact.
inline std::uint64_t shift_sample_count(double eps, std::uint64_t subgroup_size,
                                        bool* exact_mode) {
  const double bound = 1.0 + 4.0 / (eps * eps);
  if (bound >= static_cast<double>(subgroup_size)) {
    *exact_mode = true;
    return subgroup_size;
  }
  *exact_mode = false;
  return static_cast<std::uint64_t>(bound);
}

}  // namespace detail

struct ShiftSampleResult {
  std::vector<GroupElement> shifts;
  GroupFunction approx;
  double error = 0.0;  // ||f_B - g||_2, exact
  int retries = 0;     // draws rejected before success
  bool exact_mode = false;
};

// Randomized realization of the shift-averaging lemma: n i.i.d. shifts
// from B, redrawn until the exact L^2 distance to f_B is at most eps.
inline ShiftSampleResult shift_sample_approx(const GroupFunction& f,
                                             const Subgroup& B, double eps,
                                             std::uint64_t seed,
                                             int max_retries = 32) {
  if (eps <= 0.0) throw structural_error("shift_sample_approx: eps must be > 0");
  if (f.sup_norm() > 1.0 + 1e-12)
    throw structural_error("shift_sample_approx: requires ||f||_inf <= 1");
  if (!(B.parent() == f.group))
    throw structural_error("shift_sample_approx: subgroup of a different group");

  const GroupTable tbl(f.group);
  const GroupFunction fb = shift_average(f, B);

  ShiftSampleResult res{{}, GroupFunction::constant(f.group, 0.0), 0.0, 0, false};
  const std::uint64_t n =
      detail::shift_sample_count(eps, B.size(), &res.exact_mode);

  CounterRng rng(seed);
  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    std::vector<std::uint64_t> draw(n);
    if (res.exact_mode) {
      draw.assign(B.element_indices().begin(), B.element_indices().end());
    } else {
      for (auto& d : draw)
        d = B.element_indices()[rng.next_below(B.size())];
    }
    std::vector<cplx> g(f.values.size());
    for (std::uint64_t z = 0; z < g.size(); ++z) {
      KahanCSum acc;
      for (std::uint64_t a : draw) acc.add(f.values[tbl.add(z, a)]);
      g[z] = acc.value() / static_cast<double>(n);
    }
    KahanSum err2;
    for (std::uint64_t z = 0; z < g.size(); ++z)
      err2.add(std::norm(g[z] - fb.values[z]));
    const double err = std::sqrt(err2.value() / static_cast<double>(g.size()));
    if (err <= eps || res.exact_mode) {
      if (err > eps)
        throw invariant_error("shift_sample_approx: exact average missed eps");
      res.shifts.clear();
      for (std::uint64_t a : draw) res.shifts.push_back(f.group.element_at(a));
      res.approx = GroupFunction(f.group, std::move(g));
      res.error = err;
      res.retries = attempt;
      return res;
    }
  }
  throw invariant_error("shift_sample_approx: retry limit exhausted");
}

// --- rank one approximation on the cube group -------------------------------

// C^k(A) is identified with A^{k+1} through (x, t_1..t_k); C^k_0(A) is the
// subgroup with x = 0.
inline GroupSpec cube_group(const GroupSpec& g, int k) {
  return GroupSpec::power(g, k + 1);
}

// z -> [F]^x(z + y) for a fixed y in C_0^k, i.e. the starred vertex
// product of members shifted by the t-part of y.
struct RankOneTerm {
  FunctionSystem base;               // punctured, dim k
  std::vector<GroupElement> shift;   // k group elements, the t-part of y

  RankOneTerm(FunctionSystem b, std::vector<GroupElement> s)
      : base(std::move(b)), shift(std::move(s)) {
    if (!base.is_punctured())
      throw structural_error("RankOneTerm: punctured system required");
    if (shift.size() != static_cast<std::size_t>(base.dim()))
      throw structural_error("RankOneTerm: shift length != dim");
  }

  // Members f_v(. + sum v_i y_i); the term is the starred vertex product
  // of this shifted system.
  FunctionSystem shifted_system() const {
    const GroupSpec& g = base.group();
    const int k = base.dim();
    std::vector<GroupFunction> members;
    for (Vertex v = 1; v < (Vertex{1} << k); ++v) {
      GroupElement s = g.identity();
      for (int i = 0; i < k; ++i)
        if ((v >> i) & 1u) s = g.add(s, shift[i]);
      members.push_back(base.member(v).shifted(s));
    }
    return FunctionSystem::punctured(k, std::move(members));
  }

  // Dense table over the cube group A^{k+1}.
  GroupFunction to_function() const {
    const GroupSpec& g = base.group();
    const int k = base.dim();
    const GroupSpec big = cube_group(g, k);
    const GroupTable tbl(g);
    const std::size_t nverts = std::size_t{1} << k;

    std::vector<std::uint64_t> yidx(k);
    for (int i = 0; i < k; ++i) yidx[i] = g.index_of(shift[i]);

    std::vector<cplx> out(big.order());
    std::vector<std::uint64_t> params(static_cast<std::size_t>(k) + 1, 0);
    std::vector<std::uint64_t> shifted_t(k);
    std::vector<std::uint64_t> sums(nverts);
    std::uint64_t flat = 0;
    while (true) {
      for (int i = 0; i < k; ++i) shifted_t[i] = tbl.add(params[i + 1], yidx[i]);
      detail::fill_subset_sums(tbl, shifted_t, sums);
      cplx prod = {1.0, 0.0};
      for (Vertex v = 1; v < nverts; ++v)
        prod *= star(v, base.member(v).values[tbl.add(params[0], sums[v])]);
      out[flat] = prod;
      ++flat;
      int pos = k;
      while (pos >= 0) {
        if (++params[pos] < g.order()) break;
        params[pos--] = 0;
      }
      if (pos < 0) break;
    }
    return GroupFunction(big, std::move(out));
  }
};

struct LowRankApprox {
  std::vector<RankOneTerm> terms;
  double certified_error = 0.0;  // exact L^2(C^k(A)) distance
  int retries = 0;
  bool exact_mode = false;

  // Average of the term tables on the cube group.
  GroupFunction average_function() const {
    GroupFunction acc = terms.at(0).to_function();
    for (std::size_t i = 1; i < terms.size(); ++i) {
      GroupFunction t = terms[i].to_function();
      for (std::size_t j = 0; j < acc.values.size(); ++j)
        acc.values[j] += t.values[j];
    }
    for (auto& z : acc.values) z /= static_cast<double>(terms.size());
    return acc;
  }
};

namespace detail {

// Dense table of [F]^x on A^{k+1} plus the lifted convolution [F] o psi_0.
struct CubeLift {
  std::vector<cplx> product;  // [F]^x(z)
  std::vector<cplx> target;   // [F](psi_0(z))
  std::uint64_t order = 0;    // |A|^{k+1}
};

inline CubeLift build_cube_lift(const FunctionSystem& F, const Budget& budget) {
  const GroupSpec& g = F.group();
  const int k = F.dim();
  const std::uint64_t big =
      Budget::pow_saturating(g.order(), static_cast<unsigned>(k) + 1);
  budget.require(big, "lowrank_approx certification");

  const GroupTable tbl(g);
  const std::size_t nverts = std::size_t{1} << k;
  const GroupFunction conv = corner_convolution(F, budget);

  CubeLift lift;
  lift.order = big;
  lift.product.resize(big);
  lift.target.resize(big);
  std::vector<std::uint64_t> params(static_cast<std::size_t>(k) + 1, 0);
  std::vector<std::uint64_t> t(k);
  std::vector<std::uint64_t> sums(nverts);
  std::uint64_t flat = 0;
  while (true) {
    for (int i = 0; i < k; ++i) t[i] = params[i + 1];
    fill_subset_sums(tbl, t, sums);
    cplx prod = {1.0, 0.0};
    for (Vertex v = 1; v < nverts; ++v)
      prod *= star(v, F.member(v).values[tbl.add(params[0], sums[v])]);
    lift.product[flat] = prod;
    lift.target[flat] = conv.values[params[0]];
    ++flat;
    int pos = k;
    while (pos >= 0) {
      if (++params[pos] < g.order()) break;
      params[pos--] = 0;
    }
    if (pos < 0) break;
  }
  return lift;
}

}  // namespace detail

// Approximates the lift [F] o psi_0 by an average of rank one terms
// [F]^x(. + y_i); the L^2 certificate is computed by full enumeration of
// the cube group.
inline LowRankApprox lowrank_approx(const FunctionSystem& F, double eps,
                                    std::uint64_t seed, const Budget& budget = {},
                                    int max_retries = 32) {
  if (eps <= 0.0) throw structural_error("lowrank_approx: eps must be > 0");
  if (!F.is_punctured())
    throw structural_error("lowrank_approx: punctured system required");
  if (F.max_sup_norm() > 1.0 + 1e-12)
    throw structural_error("lowrank_approx: members must satisfy ||f||_inf <= 1");

  const GroupSpec& g = F.group();
  const int k = F.dim();
  const std::uint64_t subgroup_size =
      Budget::pow_saturating(g.order(), static_cast<unsigned>(k));

  const detail::CubeLift lift = detail::build_cube_lift(F, budget);

  LowRankApprox out;
  const std::uint64_t n =
      detail::shift_sample_count(eps, subgroup_size, &out.exact_mode);

  const GroupTable tbl(g);
  CounterRng rng(seed);

  std::vector<std::vector<std::uint64_t>> draws;  // t-parts as index tuples
  auto term_values = [&](const std::vector<std::uint64_t>& y) {
    // table z -> [F]^x(z + (0, y)); index shift inside the flat table
    std::vector<cplx> shifted(lift.order);
    const std::uint64_t order = g.order();
    // flat index layout: x most significant, then t_1..t_k
    std::vector<std::uint64_t> params(static_cast<std::size_t>(k) + 1, 0);
    std::uint64_t flat = 0;
    while (true) {
      std::uint64_t src = params[0];
      for (int i = 0; i < k; ++i)
        src = src * order + tbl.add(params[i + 1], y[i]);
      shifted[flat] = lift.product[src];
      ++flat;
      int pos = k;
      while (pos >= 0) {
        if (++params[pos] < order) break;
        params[pos--] = 0;
      }
      if (pos < 0) break;
    }
    return shifted;
  };

  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    draws.clear();
    if (out.exact_mode) {
      // every element of C_0^k once
      std::vector<std::uint64_t> y(k, 0);
      while (true) {
        draws.push_back(y);
        int pos = k - 1;
        while (pos >= 0) {
          if (++y[pos] < g.order()) break;
          y[pos--] = 0;
        }
        if (pos < 0) break;
      }
    } else {
      for (std::uint64_t i = 0; i < n; ++i) {
        std::vector<std::uint64_t> y(k);
        for (auto& c : y) c = rng.next_below(g.order());
        draws.push_back(std::move(y));
      }
    }

    std::vector<cplx> avg(lift.order, cplx(0, 0));
    for (const auto& y : draws) {
      std::vector<cplx> tv = term_values(y);
      for (std::uint64_t j = 0; j < lift.order; ++j) avg[j] += tv[j];
    }
    for (auto& z : avg) z /= static_cast<double>(draws.size());

    KahanSum err2;
    for (std::uint64_t j = 0; j < lift.order; ++j)
      err2.add(std::norm(avg[j] - lift.target[j]));
    const double err = std::sqrt(err2.value() / static_cast<double>(lift.order));

    if (err <= eps || out.exact_mode) {
      if (err > eps)
        throw invariant_error("lowrank_approx: exact average missed eps");
      out.certified_error = err;
      out.retries = attempt;
      for (const auto& y : draws) {
        std::vector<GroupElement> shift;
        for (std::uint64_t c : y) shift.push_back(g.element_at(c));
        out.terms.emplace_back(F, std::move(shift));
      }
      return out;
    }
  }
  throw invariant_error("lowrank_approx: retry limit exhausted");
}

// One term of the product approximation: members are pointwise products of
// a shifted F member and a shifted G member.
struct ConvProductApprox {
  int dim = 0;
  GroupSpec group;
  // per term: t-part shifts applied to F and to G
  std::vector<std::pair<std::vector<GroupElement>, std::vector<GroupElement>>>
      term_shifts;
  double certified_error = 0.0;
  int retries = 0;

  std::uint64_t term_count() const { return term_shifts.size(); }
};

// H^i member tables for one term of the approximation.
inline FunctionSystem conv_product_term(const FunctionSystem& F,
                                        const FunctionSystem& G,
                                        const ConvProductApprox& approx,
                                        std::uint64_t index) {
  const auto& [yf, yg] = approx.term_shifts.at(index);
  RankOneTerm tf(F, yf);
  RankOneTerm tg(G, yg);
  FunctionSystem sf = tf.shifted_system();
  FunctionSystem sg = tg.shifted_system();
  std::vector<GroupFunction> members;
  for (Vertex v = 1; v < (Vertex{1} << F.dim()); ++v)
    members.push_back(sf.member(v).pointwise_mul(sg.member(v)));
  return FunctionSystem::punctured(F.dim(), std::move(members));
}

// Approximates the pointwise product [F][G] on A by an average of at most
// (1 + 64/eps^2)^2 corner convolutions; the certificate is an exact L^2(A)
// distance.
inline ConvProductApprox conv_product_approx(const FunctionSystem& F,
                                             const FunctionSystem& G, double eps,
                                             std::uint64_t seed,
                                             const Budget& budget = {},
                                             int max_retries = 32) {
  if (eps <= 0.0) throw structural_error("conv_product_approx: eps must be > 0");
  if (!F.is_punctured() || !G.is_punctured())
    throw structural_error("conv_product_approx: punctured systems required");
  if (!(F.group() == G.group()) || F.dim() != G.dim())
    throw structural_error("conv_product_approx: mismatched systems");
  if (F.max_sup_norm() > 1.0 + 1e-12 || G.max_sup_norm() > 1.0 + 1e-12)
    throw structural_error("conv_product_approx: members must be bounded by 1");

  const GroupSpec& g = F.group();
  const int k = F.dim();
  const GroupTable tbl(g);
  const std::size_t nverts = std::size_t{1} << k;
  const std::uint64_t order = g.order();

  const GroupFunction convF = corner_convolution(F, budget);
  const GroupFunction convG = corner_convolution(G, budget);
  std::vector<cplx> target(order);
  for (std::uint64_t x = 0; x < order; ++x)
    target[x] = convF.values[x] * convG.values[x];

  std::vector<std::vector<cplx>> starredF(nverts), starredG(nverts);
  for (Vertex v = 1; v < nverts; ++v) {
    starredF[v].resize(order);
    starredG[v].resize(order);
    for (std::uint64_t x = 0; x < order; ++x) {
      starredF[v][x] = star(v, F.member(v).values[x]);
      starredG[v][x] = star(v, G.member(v).values[x]);
    }
  }

  for (int attempt = 0; attempt <= max_retries; ++attempt) {
    LowRankApprox lrF = lowrank_approx(F, eps / 4.0, seed + 2 * attempt, budget,
                                       max_retries);
    LowRankApprox lrG = lowrank_approx(G, eps / 4.0, seed + 2 * attempt + 1,
                                       budget, max_retries);

    std::vector<std::vector<std::uint64_t>> shiftsF, shiftsG;
    for (const auto& t : lrF.terms) {
      std::vector<std::uint64_t> y;
      for (const auto& e : t.shift) y.push_back(g.index_of(e));
      shiftsF.push_back(std::move(y));
    }
    for (const auto& t : lrG.terms) {
      std::vector<std::uint64_t> y;
      for (const auto& e : t.shift) y.push_back(g.index_of(e));
      shiftsG.push_back(std::move(y));
    }

    // (1/n) sum_{ij} [H^{ij}](x)
    //   = E_t ( avg_i prodF(x,t,y_i) ) ( avg_j prodG(x,t,y_j) )
    std::vector<KahanCSum> acc(order);
    std::vector<std::uint64_t> t(static_cast<std::size_t>(k), 0);
    std::vector<std::uint64_t> ts(k);
    std::vector<std::uint64_t> sums(nverts);
    while (true) {
      for (std::uint64_t x = 0; x < order; ++x) {
        cplx af = {0, 0};
        for (const auto& y : shiftsF) {
          for (int i = 0; i < k; ++i) ts[i] = tbl.add(t[i], y[i]);
          detail::fill_subset_sums(tbl, ts, sums);
          cplx p = {1.0, 0.0};
          for (Vertex v = 1; v < nverts; ++v)
            p *= starredF[v][tbl.add(x, sums[v])];
          af += p;
        }
        af /= static_cast<double>(shiftsF.size());
        cplx ag = {0, 0};
        for (const auto& y : shiftsG) {
          for (int i = 0; i < k; ++i) ts[i] = tbl.add(t[i], y[i]);
          detail::fill_subset_sums(tbl, ts, sums);
          cplx p = {1.0, 0.0};
          for (Vertex v = 1; v < nverts; ++v)
            p *= starredG[v][tbl.add(x, sums[v])];
          ag += p;
        }
        ag /= static_cast<double>(shiftsG.size());
        acc[x].add(af * ag);
      }
      int pos = k - 1;
      while (pos >= 0) {
        if (++t[pos] < order) break;
        t[pos--] = 0;
      }
      if (pos < 0) break;
    }
    const double denom = static_cast<double>(
        Budget::pow_saturating(order, static_cast<unsigned>(k)));

    KahanSum err2;
    for (std::uint64_t x = 0; x < order; ++x)
      err2.add(std::norm(acc[x].value() / denom - target[x]));
    const double err = std::sqrt(err2.value() / static_cast<double>(order));

    if (err <= eps) {
      ConvProductApprox out;
      out.dim = k;
      out.group = g;
      out.certified_error = err;
      out.retries = attempt;
      for (const auto& tf : lrF.terms)
        for (const auto& tg : lrG.terms)
          out.term_shifts.emplace_back(tf.shift, tg.shift);
      return out;
    }
  }
  throw invariant_error("conv_product_approx: retry limit exhausted");
}

}  // namespace hofa
