#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "hofa/abelian.hpp"
#include "hofa/common.hpp"
#include "hofa/cubespace.hpp"
#include "hofa/rng.hpp"

namespace hofa {

using GElem = std::uint16_t;

// A finite group given by an explicit multiplication table together with a
// filtration F = F_0 >= F_1 >= ... >= F_k = {1} satisfying
// [F, F_i] <= F_{i+1}. Element 0 is the identity.
class FilteredGroup {
 public:
  static constexpr std::size_t kMaxOrder = 4096;

  FilteredGroup(std::vector<std::vector<GElem>> mul,
                std::vector<std::vector<GElem>> filtration)
      : mul_(std::move(mul)) {
    order_ = mul_.size();
    if (order_ == 0 || order_ > kMaxOrder)
      throw structural_error("FilteredGroup: unsupported order");
    for (const auto& row : mul_)
      if (row.size() != order_)
        throw structural_error("FilteredGroup: ragged multiplication table");

    // identity and inverses
    for (std::size_t x = 0; x < order_; ++x)
      if (mul_[0][x] != x || mul_[x][0] != x)
        throw structural_error("FilteredGroup: element 0 is not an identity");
    inv_.assign(order_, 0);
    for (std::size_t x = 0; x < order_; ++x) {
      bool found = false;
      for (std::size_t y = 0; y < order_; ++y)
        if (mul_[x][y] == 0 && mul_[y][x] == 0) {
          inv_[x] = static_cast<GElem>(y);
          found = true;
          break;
        }
      if (!found) throw structural_error("FilteredGroup: missing inverse");
    }
    // associativity is cubic; check it fully only at small orders
    if (order_ <= 256) {
      for (std::size_t a = 0; a < order_; ++a)
        for (std::size_t b = 0; b < order_; ++b)
          for (std::size_t c = 0; c < order_; ++c)
            if (mul_[mul_[a][b]][c] != mul_[a][mul_[b][c]])
              throw structural_error("FilteredGroup: not associative");
    }

    if (filtration.empty())
      throw structural_error("FilteredGroup: empty filtration");
    for (auto& lvl : filtration) {
      std::sort(lvl.begin(), lvl.end());
      lvl.erase(std::unique(lvl.begin(), lvl.end()), lvl.end());
      levels_.push_back(lvl);
      std::vector<char> bits(order_, 0);
      for (GElem e : lvl) {
        if (e >= order_)
          throw structural_error("FilteredGroup: filtration element out of range");
        bits[e] = 1;
      }
      level_bits_.push_back(std::move(bits));
    }
    validate_filtration();
  }

  std::size_t order() const { return order_; }
  // k with F_k = {1}
  int degree() const { return static_cast<int>(levels_.size()) - 1; }

  GElem mul(GElem a, GElem b) const { return mul_[a][b]; }
  GElem inv(GElem a) const { return inv_[a]; }
  static constexpr GElem identity() { return 0; }

  GElem commutator(GElem a, GElem b) const {
    return mul(mul(inv(a), inv(b)), mul(a, b));
  }

  const std::vector<GElem>& level(int i) const {
    return levels_.at(static_cast<std::size_t>(i));
  }

  // F_d for arbitrary d >= 0, with F_d = {1} beyond the chain.
  const std::vector<GElem>& level_clamped(int d) const {
    if (d >= static_cast<int>(levels_.size())) return levels_.back();
    return levels_[static_cast<std::size_t>(d)];
  }

  bool in_level(int d, GElem x) const {
    if (d >= static_cast<int>(levels_.size())) return x == 0;
    return level_bits_[static_cast<std::size_t>(d)][x] != 0;
  }

  // An abelian group with the filtration F_0 = ... = F_k = A, F_{k+1} = 1;
  // its generative cubes are the degree-k cubes of A.
  static FilteredGroup abelian(const GroupSpec& a, int k) {
    if (k < 1) throw structural_error("FilteredGroup::abelian: k < 1");
    const std::size_t n = a.order();
    if (n > kMaxOrder) throw structural_error("FilteredGroup::abelian: too large");
    std::vector<std::vector<GElem>> mul(n, std::vector<GElem>(n));
    const GroupTable tbl(a);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y)
        mul[x][y] = static_cast<GElem>(tbl.add(x, y));
    std::vector<GElem> all(n);
    for (std::size_t x = 0; x < n; ++x) all[x] = static_cast<GElem>(x);
    std::vector<std::vector<GElem>> filt(static_cast<std::size_t>(k) + 2, all);
    filt.back() = {0};
    return FilteredGroup(std::move(mul), std::move(filt));
  }

  // Upper unitriangular 3x3 matrices over Z_p, encoded as (a, b, c) with
  // index (a*p + b)*p + c; (a,b,c)(a',b',c') = (a+a', b+b', c+c'+a b').
  // Filtration F_0 = F_1 = F, F_2 = center, F_3 = {1}.
  static FilteredGroup heisenberg(int p) {
    if (p < 2) throw structural_error("FilteredGroup::heisenberg: p < 2");
    const std::size_t n = static_cast<std::size_t>(p) * p * p;
    if (n > kMaxOrder)
      throw structural_error("FilteredGroup::heisenberg: too large");
    auto enc = [&](int a, int b, int c) {
      return static_cast<GElem>((a * p + b) * p + c);
    };
    std::vector<std::vector<GElem>> mul(n, std::vector<GElem>(n));
    for (int a = 0; a < p; ++a)
      for (int b = 0; b < p; ++b)
        for (int c = 0; c < p; ++c)
          for (int a2 = 0; a2 < p; ++a2)
            for (int b2 = 0; b2 < p; ++b2)
              for (int c2 = 0; c2 < p; ++c2)
                mul[enc(a, b, c)][enc(a2, b2, c2)] =
                    enc((a + a2) % p, (b + b2) % p,
                        (c + c2 + a * b2) % p);
    std::vector<GElem> all(n);
    for (std::size_t x = 0; x < n; ++x) all[x] = static_cast<GElem>(x);
    std::vector<GElem> center;
    for (int c = 0; c < p; ++c) center.push_back(enc(0, 0, c));
    std::vector<std::vector<GElem>> filt{all, all, center, {0}};
    return FilteredGroup(std::move(mul), std::move(filt));
  }

 private:
  void validate_filtration() const {
    // F_0 = F
    if (levels_.front().size() != order_)
      throw structural_error("FilteredGroup: F_0 must be the whole group");
    // F_k = {1}
    if (levels_.back() != std::vector<GElem>{0})
      throw structural_error("FilteredGroup: F_k must be trivial");
    for (std::size_t i = 0; i < levels_.size(); ++i) {
      // subgroup: closed under multiplication and inverse, contains 1
      if (!level_bits_[i][0])
        throw structural_error("FilteredGroup: filtration level missing identity");
      for (GElem x : levels_[i]) {
        if (!level_bits_[i][inv_[x]])
          throw structural_error("FilteredGroup: level not closed under inverse");
        for (GElem y : levels_[i])
          if (!level_bits_[i][mul_[x][y]])
            throw structural_error("FilteredGroup: level not closed under product");
      }
      // chain inclusion
      if (i + 1 < levels_.size())
        for (GElem x : levels_[i + 1])
          if (!level_bits_[i][x])
            throw structural_error("FilteredGroup: filtration is not a chain");
    }
    // [F, F_i] <= F_{i+1}
    for (std::size_t i = 0; i + 1 < levels_.size(); ++i)
      for (std::size_t a = 0; a < order_; ++a)
        for (GElem b : levels_[i])
          if (!level_bits_[i + 1][commutator(static_cast<GElem>(a), b)])
            throw structural_error("FilteredGroup: [F, F_i] not inside F_{i+1}");
  }

  std::size_t order_ = 0;
  std::vector<std::vector<GElem>> mul_;
  std::vector<GElem> inv_;
  std::vector<std::vector<GElem>> levels_;
  std::vector<std::vector<char>> level_bits_;
};

// The ordering g_n: {0,1}^n -> [1, 2^n] with g_1(0) = 1, g_1(1) = 2,
// g_n((v,0)) = g_{n-1}(v), g_n((v,1)) = 2^n + 1 - g_{n-1}(v). Returned as
// the vertex sequence g_n^{-1}(1), ..., g_n^{-1}(2^n); consecutive entries
// differ in exactly one coordinate.
inline std::vector<Vertex> gray_code_order(int n) {
  if (n < 1) throw structural_error("gray_code_order: n must be >= 1");
  std::vector<Vertex> order{0, 1};
  for (int d = 2; d <= n; ++d) {
    std::vector<Vertex> next(std::size_t{1} << d);
    const std::size_t half = std::size_t{1} << (d - 1);
    const Vertex top = Vertex{1} << (d - 1);
    for (std::size_t i = 0; i < half; ++i) {
      next[i] = order[i];                              // (v, 0) keeps its rank
      next[2 * half - 1 - i] = order[i] | top;         // (v, 1) is mirrored
    }
    order = std::move(next);
  }
  return order;
}

// prod_{i=1}^{2^n} f(g_n^{-1}(i))^{(-1)^i}, evaluated strictly in the gray
// code order (the group may be non-abelian).
inline GElem gray_code_product(const FilteredGroup& fg,
                               const std::vector<GElem>& labels, int n) {
  if (labels.size() != (std::size_t{1} << n))
    throw structural_error("gray_code_product: wrong label count");
  const std::vector<Vertex> order = gray_code_order(n);
  GElem prod = FilteredGroup::identity();
  for (std::size_t i = 0; i < order.size(); ++i) {
    const GElem x = labels[order[i]];
    // position i is rank i+1; odd ranks carry exponent -1
    prod = fg.mul(prod, (i % 2 == 0) ? fg.inv(x) : x);
  }
  return prod;
}

// Membership of the alternating ordered product in a subgroup, supplied as
// a bitset over the group.
inline bool gray_code_property(const FilteredGroup& fg,
                               const std::vector<GElem>& labels, int n,
                               const std::vector<char>& subgroup_bits) {
  return subgroup_bits[gray_code_product(fg, labels, n)] != 0;
}

namespace detail {

// All injective morphisms {0,1}^d -> {0,1}^n whose image is a d-face:
// choose the free coordinate set, the values of the fixed coordinates, a
// bijection of source coordinates onto the free ones, and a polarity per
// source coordinate.
template <typename Fn>
void for_each_injective_face_morphism(int n, int d, Fn&& fn) {
  std::vector<int> free_bits;
  for_each_face(n, d, [&](Vertex free_mask, Vertex base) {
    free_bits.clear();
    for (int b = 0; b < n; ++b)
      if ((free_mask >> b) & 1u) free_bits.push_back(b);
    std::vector<int> perm(free_bits.begin(), free_bits.end());
    std::sort(perm.begin(), perm.end());
    do {
      for (Vertex polarity = 0; polarity < (Vertex{1} << d); ++polarity) {
        // source vertex u maps to base | bits placed at perm positions
        fn([=](Vertex u) {
          Vertex out = base;
          for (int s = 0; s < d; ++s) {
            int bit = (u >> s) & 1;
            if ((polarity >> s) & 1u) bit = 1 - bit;
            out |= static_cast<Vertex>(bit) << perm[s];
          }
          return out;
        });
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  });
}

}  // namespace detail

// The cube set of a filtered group through the gray code description: a
// labeling is a cube iff for every d <= k+1 and every injective morphism
// onto a d-face, the gray code product of the pullback lies in F_d.
inline bool is_filtered_cube(const FilteredGroup& fg,
                             const std::vector<GElem>& labels, int n) {
  if (labels.size() != (std::size_t{1} << n))
    throw structural_error("is_filtered_cube: wrong label count");
  const int dmax = std::min(n, fg.degree() + 1);
  for (int d = 1; d <= dmax; ++d) {
    bool ok = true;
    std::vector<GElem> pulled(std::size_t{1} << d);
    detail::for_each_injective_face_morphism(n, d, [&](auto&& vertex_map) {
      if (!ok) return;
      for (Vertex u = 0; u < (Vertex{1} << d); ++u)
        pulled[u] = labels[vertex_map(u)];
      const GElem prod = gray_code_product(fg, pulled, d);
      if (!fg.in_level(d, prod)) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

// --- generative Host-Kra cube structure --------------------------------------

namespace detail {

struct FaceGenerator {
  Vertex support;  // the face {v : v >= support}; codimension = |support|
  int codim;
};

// Upper faces only, ordered by increasing codimension then support mask.
inline std::vector<FaceGenerator> upper_faces(int n, int max_codim) {
  std::vector<FaceGenerator> out;
  for (int j = 0; j <= std::min(n, max_codim); ++j)
    for (Vertex s = 0; s < (Vertex{1} << n); ++s)
      if (vertex_height(s) == j) out.push_back({s, j});
  std::stable_sort(out.begin(), out.end(),
                   [](const FaceGenerator& a, const FaceGenerator& b) {
                     return a.codim < b.codim;
                   });
  return out;
}

}  // namespace detail

// Expected size of the generative cube set: prod_j |F_j|^{#codim-j faces
// over all orientations} collapses to prod_j |F_j|^{C(n,j)} through the
// unique upper-face factorization.
inline std::uint64_t hk_expected_size(const FilteredGroup& fg, int n) {
  std::uint64_t total = 1;
  for (const auto& f : detail::upper_faces(n, fg.degree())) {
    const std::uint64_t s = fg.level_clamped(f.codim).size();
    if (total > Budget::kUnbounded / s) return Budget::kUnbounded;
    total *= s;
  }
  return total;
}

// Deciding membership in the generative cube set: peel vertices by
// increasing height, multiplying the upper face at v by the inverse of the
// current value. The value at height h must lie in F_h (and must already
// be 1 beyond the filtration depth).
inline bool hk_member(const FilteredGroup& fg, const std::vector<GElem>& labels,
                      int n) {
  if (labels.size() != (std::size_t{1} << n))
    throw structural_error("hk_member: wrong label count");
  std::vector<GElem> c = labels;
  const std::size_t nverts = c.size();
  for (int h = 0; h <= n; ++h) {
    for (Vertex v = 0; v < nverts; ++v) {
      if (vertex_height(v) != h) continue;
      const GElem x = c[v];
      if (h > fg.degree()) {
        if (x != FilteredGroup::identity()) return false;
        continue;
      }
      if (!fg.in_level(h, x)) return false;
      const GElem xi = fg.inv(x);
      for (Vertex w = 0; w < nverts; ++w)
        if ((w & v) == v) c[w] = fg.mul(c[w], xi);
    }
  }
  for (GElem e : c)
    if (e != FilteredGroup::identity()) return false;
  return true;
}

// All labelings generated from the constant 1 map by multiplying faces by
// filtration elements, computed as a closure under the face generators
// (codimension-j faces in every orientation carry F_j).
inline std::vector<std::vector<GElem>> hk_enumerate(const FilteredGroup& fg,
                                                    int n,
                                                    const Budget& budget = {}) {
  budget.require(hk_expected_size(fg, n), "hk_enumerate");
  const std::size_t nverts = std::size_t{1} << n;

  // generators: (vertex membership mask of the face, element)
  struct Gen {
    std::vector<char> in_face;
    GElem x;
  };
  std::vector<Gen> gens;
  for (int j = 0; j <= std::min(n, fg.degree()); ++j) {
    for_each_face(n, n - j, [&](Vertex free_mask, Vertex base) {
      std::vector<char> in_face(nverts, 0);
      for (Vertex v = 0; v < nverts; ++v)
        if ((v & ~free_mask) == base) in_face[v] = 1;
      for (GElem x : fg.level_clamped(j)) {
        if (x == FilteredGroup::identity()) continue;
        gens.push_back({in_face, x});
      }
    });
  }

  std::set<std::vector<GElem>> seen;
  std::vector<std::vector<GElem>> queue;
  std::vector<GElem> start(nverts, FilteredGroup::identity());
  seen.insert(start);
  queue.push_back(start);
  while (!queue.empty()) {
    std::vector<GElem> cur = std::move(queue.back());
    queue.pop_back();
    for (const Gen& g : gens) {
      std::vector<GElem> nxt = cur;
      for (Vertex v = 0; v < nverts; ++v)
        if (g.in_face[v]) nxt[v] = fg.mul(nxt[v], g.x);
      if (seen.insert(nxt).second) queue.push_back(nxt);
    }
  }
  return {seen.begin(), seen.end()};
}

// Uniform sample from the generative cube set via the upper-face
// factorization: one uniform filtration element per upper face, multiplied
// in a fixed order of increasing codimension.
inline std::vector<GElem> hk_sample(const FilteredGroup& fg, int n,
                                    CounterRng& rng) {
  const std::size_t nverts = std::size_t{1} << n;
  std::vector<GElem> c(nverts, FilteredGroup::identity());
  for (const auto& face : detail::upper_faces(n, fg.degree())) {
    const auto& lvl = fg.level_clamped(face.codim);
    const GElem x = lvl[rng.next_below(lvl.size())];
    for (Vertex v = 0; v < nverts; ++v)
      if ((v & face.support) == face.support) c[v] = fg.mul(c[v], x);
  }
  return c;
}

// Every distinct assignment of upper-face parameters, for bijectivity
// checks at small scale.
template <typename Fn>
void hk_for_each_parametrized(const FilteredGroup& fg, int n,
                              const Budget& budget, Fn&& fn) {
  budget.require(hk_expected_size(fg, n), "hk_for_each_parametrized");
  const auto faces = detail::upper_faces(n, fg.degree());
  const std::size_t nverts = std::size_t{1} << n;
  std::vector<std::size_t> choice(faces.size(), 0);
  while (true) {
    std::vector<GElem> c(nverts, FilteredGroup::identity());
    for (std::size_t i = 0; i < faces.size(); ++i) {
      const GElem x = fg.level_clamped(faces[i].codim)[choice[i]];
      for (Vertex v = 0; v < nverts; ++v)
        if ((v & faces[i].support) == faces[i].support) c[v] = fg.mul(c[v], x);
    }
    fn(c);
    std::size_t pos = 0;
    while (pos < faces.size()) {
      if (++choice[pos] < fg.level_clamped(faces[pos].codim).size()) break;
      choice[pos++] = 0;
    }
    if (pos == faces.size()) break;
  }
}

}  // namespace hofa
