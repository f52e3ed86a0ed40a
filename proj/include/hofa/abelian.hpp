#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

#include "hofa/common.hpp"

namespace hofa {

// An element of a product of cyclic groups, stored as reduced residues,
// one per factor.
struct GroupElement {
  std::vector<int> residues;

  bool operator==(const GroupElement&) const = default;
};

// A character of the same product group, stored as frequencies. The dual
// group has the same shape as the group itself.
struct Character {
  std::vector<int> frequencies;

  bool operator==(const Character&) const = default;
};

// A finite abelian group presented as Z_{m1} x ... x Z_{mr}. Elements and
// characters are indexed in mixed radix with the FIRST modulus most
// significant; every table in the library uses this order.
class GroupSpec {
 public:
  GroupSpec() = default;

  explicit GroupSpec(std::vector<int> moduli) : moduli_(std::move(moduli)) {
    if (moduli_.empty()) throw structural_error("GroupSpec: no moduli");
    order_ = 1;
    for (int m : moduli_) {
      if (m < 2) throw structural_error("GroupSpec: modulus < 2");
      order_ *= static_cast<std::uint64_t>(m);
    }
    if (order_ < 2) throw structural_error("GroupSpec: order < 2");
  }

  static GroupSpec cyclic(int m) { return GroupSpec(std::vector<int>{m}); }

  static GroupSpec product(const GroupSpec& a, const GroupSpec& b) {
    std::vector<int> m = a.moduli_;
    m.insert(m.end(), b.moduli_.begin(), b.moduli_.end());
    return GroupSpec(std::move(m));
  }

  static GroupSpec power(const GroupSpec& a, int n) {
    if (n < 1) throw structural_error("GroupSpec::power: n < 1");
    std::vector<int> m;
    m.reserve(a.rank() * static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      m.insert(m.end(), a.moduli_.begin(), a.moduli_.end());
    return GroupSpec(std::move(m));
  }

  const std::vector<int>& moduli() const { return moduli_; }
  std::size_t rank() const { return moduli_.size(); }
  std::uint64_t order() const { return order_; }

  bool operator==(const GroupSpec&) const = default;

  GroupElement identity() const {
    return GroupElement{std::vector<int>(rank(), 0)};
  }

  GroupElement element_at(std::uint64_t index) const {
    if (index >= order_) throw structural_error("element_at: index out of range");
    std::vector<int> r(rank());
    for (std::size_t i = rank(); i-- > 0;) {
      const auto m = static_cast<std::uint64_t>(moduli_[i]);
      r[i] = static_cast<int>(index % m);
      index /= m;
    }
    return GroupElement{std::move(r)};
  }

  std::uint64_t index_of(const GroupElement& x) const {
    check_element(x);
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < rank(); ++i)
      idx = idx * static_cast<std::uint64_t>(moduli_[i]) +
            static_cast<std::uint64_t>(x.residues[i]);
    return idx;
  }

  void check_element(const GroupElement& x) const {
    if (x.residues.size() != rank())
      throw structural_error("group element has wrong rank");
    for (std::size_t i = 0; i < rank(); ++i)
      if (x.residues[i] < 0 || x.residues[i] >= moduli_[i])
        throw structural_error("group element residue out of range");
  }

  void check_character(const Character& c) const {
    if (c.frequencies.size() != rank())
      throw structural_error("character has wrong rank");
    for (std::size_t i = 0; i < rank(); ++i)
      if (c.frequencies[i] < 0 || c.frequencies[i] >= moduli_[i])
        throw structural_error("character frequency out of range");
  }

  GroupElement add(const GroupElement& a, const GroupElement& b) const {
    check_element(a);
    check_element(b);
    std::vector<int> r(rank());
    for (std::size_t i = 0; i < rank(); ++i) {
      int s = a.residues[i] + b.residues[i];
      if (s >= moduli_[i]) s -= moduli_[i];
      r[i] = s;
    }
    return GroupElement{std::move(r)};
  }

  GroupElement neg(const GroupElement& a) const {
    check_element(a);
    std::vector<int> r(rank());
    for (std::size_t i = 0; i < rank(); ++i)
      r[i] = a.residues[i] == 0 ? 0 : moduli_[i] - a.residues[i];
    return GroupElement{std::move(r)};
  }

  GroupElement sub(const GroupElement& a, const GroupElement& b) const {
    return add(a, neg(b));
  }

  // k * a with k an arbitrary integer.
  GroupElement scale(const GroupElement& a, long long k) const {
    check_element(a);
    std::vector<int> r(rank());
    for (std::size_t i = 0; i < rank(); ++i) {
      const long long m = moduli_[i];
      long long v = (static_cast<long long>(a.residues[i]) * (k % m)) % m;
      if (v < 0) v += m;
      r[i] = static_cast<int>(v);
    }
    return GroupElement{std::move(r)};
  }

  // Reduce arbitrary integers componentwise into the group.
  GroupElement reduce(const std::vector<long long>& raw) const {
    if (raw.size() != rank()) throw structural_error("reduce: wrong rank");
    std::vector<int> r(rank());
    for (std::size_t i = 0; i < rank(); ++i) {
      const long long m = moduli_[i];
      long long v = raw[i] % m;
      if (v < 0) v += m;
      r[i] = static_cast<int>(v);
    }
    return GroupElement{std::move(r)};
  }

  Character trivial_character() const {
    return Character{std::vector<int>(rank(), 0)};
  }

  Character character_at(std::uint64_t index) const {
    return Character{element_at(index).residues};
  }

  std::uint64_t index_of_character(const Character& c) const {
    check_character(c);
    return index_of(GroupElement{c.frequencies});
  }

  Character char_add(const Character& a, const Character& b) const {
    return Character{add(GroupElement{a.frequencies}, GroupElement{b.frequencies})
                         .residues};
  }

  Character char_neg(const Character& a) const {
    return Character{neg(GroupElement{a.frequencies}).residues};
  }

  // chi(x) = e(sum_i freq_i res_i / m_i); always on the unit circle.
  cplx char_eval(const Character& chi, const GroupElement& x) const {
    check_character(chi);
    check_element(x);
    double frac = 0.0;
    for (std::size_t i = 0; i < rank(); ++i) {
      const long long m = moduli_[i];
      const long long num =
          (static_cast<long long>(chi.frequencies[i]) * x.residues[i]) % m;
      frac += static_cast<double>(num) / static_cast<double>(m);
    }
    return unit_phase(frac);
  }

 private:
  std::vector<int> moduli_;
  std::uint64_t order_ = 0;
};

// Dense index-level operation tables for inner loops. Built on demand;
// falls back to componentwise arithmetic when the group is too large to
// tabulate.
class GroupTable {
 public:
  explicit GroupTable(const GroupSpec& g) : spec_(g), n_(g.order()) {
    if (n_ <= kTableLimit) {
      add_.resize(n_ * n_);
      neg_.resize(n_);
      // index arithmetic factor by factor; radix strides
      std::vector<std::uint64_t> stride(g.rank());
      std::uint64_t s = 1;
      for (std::size_t i = g.rank(); i-- > 0;) {
        stride[i] = s;
        s *= static_cast<std::uint64_t>(g.moduli()[i]);
      }
      for (std::uint64_t a = 0; a < n_; ++a) {
        GroupElement ea = g.element_at(a);
        neg_[a] = g.index_of(g.neg(ea));
        for (std::uint64_t b = 0; b < n_; ++b) {
          std::uint64_t idx = 0;
          std::uint64_t bb = b;
          for (std::size_t i = g.rank(); i-- > 0;) {
            const int m = g.moduli()[i];
            int rb = static_cast<int>(bb % static_cast<std::uint64_t>(m));
            bb /= static_cast<std::uint64_t>(m);
            int sres = ea.residues[i] + rb;
            if (sres >= m) sres -= m;
            idx += static_cast<std::uint64_t>(sres) * stride[i];
          }
          add_[a * n_ + b] = static_cast<std::uint32_t>(idx);
        }
      }
    }
  }

  std::uint64_t size() const { return n_; }

  std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
    if (!add_.empty()) return add_[a * n_ + b];
    return spec_.index_of(spec_.add(spec_.element_at(a), spec_.element_at(b)));
  }

  std::uint64_t neg(std::uint64_t a) const {
    if (!neg_.empty()) return neg_[a];
    return spec_.index_of(spec_.neg(spec_.element_at(a)));
  }

 private:
  static constexpr std::uint64_t kTableLimit = 8192;
  GroupSpec spec_;
  std::uint64_t n_;
  std::vector<std::uint32_t> add_;
  std::vector<std::uint32_t> neg_;
};

// A complex-valued table on a finite abelian group, in mixed-radix order.
struct GroupFunction {
  GroupSpec group;
  std::vector<cplx> values;
  // Declared sup bound, validated on construction when present.
  std::optional<double> sup_bound;

  GroupFunction() = default;

  GroupFunction(GroupSpec g, std::vector<cplx> v,
                std::optional<double> declared_sup = std::nullopt)
      : group(std::move(g)), values(std::move(v)), sup_bound(declared_sup) {
    if (values.size() != group.order())
      throw structural_error("GroupFunction: table length != group order");
    if (sup_bound) {
      for (const cplx& z : values)
        if (std::abs(z) > *sup_bound + 1e-12)
          throw structural_error("GroupFunction: declared sup bound violated");
    }
  }

  static GroupFunction constant(const GroupSpec& g, cplx c) {
    return GroupFunction(g, std::vector<cplx>(g.order(), c));
  }

  static GroupFunction from_character(const GroupSpec& g, const Character& chi) {
    std::vector<cplx> v(g.order());
    for (std::uint64_t i = 0; i < g.order(); ++i)
      v[i] = g.char_eval(chi, g.element_at(i));
    return GroupFunction(g, std::move(v));
  }

  std::uint64_t size() const { return values.size(); }
  cplx operator()(std::uint64_t idx) const { return values[idx]; }
  cplx at(const GroupElement& x) const { return values[group.index_of(x)]; }

  cplx mean() const {
    KahanCSum s;
    for (const cplx& z : values) s.add(z);
    return s.value() / static_cast<double>(values.size());
  }

  double sup_norm() const {
    double m = 0.0;
    for (const cplx& z : values) m = std::max(m, std::abs(z));
    return m;
  }

  // Normalized L^p norm: (E |f|^p)^(1/p).
  double lp_norm(double p) const {
    KahanSum s;
    for (const cplx& z : values) s.add(std::pow(std::abs(z), p));
    return std::pow(s.value() / static_cast<double>(values.size()), 1.0 / p);
  }

  double l2_norm() const {
    KahanSum s;
    for (const cplx& z : values) s.add(std::norm(z));
    return std::sqrt(s.value() / static_cast<double>(values.size()));
  }

  GroupFunction conjugate() const {
    std::vector<cplx> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = std::conj(values[i]);
    return GroupFunction(group, std::move(v));
  }

  // x -> f(x + t)
  GroupFunction shifted(const GroupElement& t) const {
    const std::uint64_t ti = group.index_of(t);
    GroupTable tbl(group);
    std::vector<cplx> v(values.size());
    for (std::uint64_t i = 0; i < values.size(); ++i) v[i] = values[tbl.add(i, ti)];
    return GroupFunction(group, std::move(v));
  }

  GroupFunction pointwise_mul(const GroupFunction& other) const {
    if (!(group == other.group))
      throw structural_error("pointwise_mul: mismatched groups");
    std::vector<cplx> v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) v[i] = values[i] * other.values[i];
    return GroupFunction(group, std::move(v));
  }
};

// Normalized inner product (f, g) = E f conj(g).
inline cplx inner_product(const GroupFunction& f, const GroupFunction& g) {
  if (!(f.group == g.group)) throw structural_error("inner_product: mismatched groups");
  KahanCSum s;
  for (std::size_t i = 0; i < f.values.size(); ++i)
    s.add(f.values[i] * std::conj(g.values[i]));
  return s.value() / static_cast<double>(f.values.size());
}

namespace detail {

// Direct O(m^2) transform of one axis. sign = -1 for analysis, +1 for
// synthesis. Input and output are length-m slices.
inline void dft_axis_direct(const cplx* in, cplx* out, int m, std::ptrdiff_t stride,
                            int sign) {
  for (int j = 0; j < m; ++j) {
    KahanCSum acc;
    for (int x = 0; x < m; ++x) {
      const long long num = (static_cast<long long>(j) * x) % m;
      const cplx w = unit_phase(sign * static_cast<double>(num) / m);
      acc.add(in[x * stride] * w);
    }
    out[j * stride] = acc.value();
  }
}

// Radix-2 recursion for power-of-two axis lengths.
inline void dft_axis_radix2(std::vector<cplx>& buf, int m, int sign) {
  if (m == 1) return;
  const int h = m / 2;
  std::vector<cplx> even(h), odd(h);
  for (int i = 0; i < h; ++i) {
    even[i] = buf[2 * i];
    odd[i] = buf[2 * i + 1];
  }
  dft_axis_radix2(even, h, sign);
  dft_axis_radix2(odd, h, sign);
  for (int j = 0; j < h; ++j) {
    const cplx w = unit_phase(sign * static_cast<double>(j) / m);
    buf[j] = even[j] + w * odd[j];
    buf[j + h] = even[j] - w * odd[j];
  }
}

inline bool is_power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

// Transform every line of the table along one axis.
inline void transform_axis(std::vector<cplx>& data, const GroupSpec& g,
                           std::size_t axis, int sign, bool force_direct) {
  const int m = g.moduli()[axis];
  std::uint64_t inner = 1;
  for (std::size_t i = axis + 1; i < g.rank(); ++i)
    inner *= static_cast<std::uint64_t>(g.moduli()[i]);
  std::uint64_t outer = g.order() / (inner * static_cast<std::uint64_t>(m));

  const bool use_radix2 = !force_direct && m > 64 && is_power_of_two(m);
  std::vector<cplx> line(static_cast<std::size_t>(m));
  std::vector<cplx> out(static_cast<std::size_t>(m));
  for (std::uint64_t o = 0; o < outer; ++o) {
    for (std::uint64_t i = 0; i < inner; ++i) {
      cplx* base = data.data() + o * inner * m + i;
      if (use_radix2) {
        for (int x = 0; x < m; ++x) line[x] = base[x * inner];
        dft_axis_radix2(line, m, sign);
        for (int j = 0; j < m; ++j) base[j * inner] = line[j];
      } else {
        for (int x = 0; x < m; ++x) line[x] = base[x * inner];
        dft_axis_direct(line.data(), out.data(), m, 1, sign);
        for (int j = 0; j < m; ++j) base[j * inner] = out[j];
      }
    }
  }
}

}  // namespace detail

// Fourier coefficients lambda_chi = (1/|A|) sum_x f(x) conj(chi(x)),
// indexed like dual-group elements. Axes of length <= 64 (or of non-power-
// of-two length) use the direct quadratic transform; longer power-of-two
// axes use the radix-2 recursion. force_direct pins the quadratic path so
// the two can be cross-checked.
inline std::vector<cplx> dft(const GroupFunction& f, bool force_direct = false) {
  std::vector<cplx> data = f.values;
  for (std::size_t axis = 0; axis < f.group.rank(); ++axis)
    detail::transform_axis(data, f.group, axis, -1, force_direct);
  const double scale = 1.0 / static_cast<double>(f.group.order());
  for (cplx& z : data) z *= scale;
  return data;
}

// Synthesis: f(x) = sum_chi lambda_chi chi(x).
inline GroupFunction idft(const GroupSpec& g, const std::vector<cplx>& coeffs,
                          bool force_direct = false) {
  if (coeffs.size() != g.order())
    throw structural_error("idft: coefficient table length != group order");
  std::vector<cplx> data = coeffs;
  for (std::size_t axis = 0; axis < g.rank(); ++axis)
    detail::transform_axis(data, g, axis, +1, force_direct);
  return GroupFunction(g, std::move(data));
}

}  // namespace hofa
