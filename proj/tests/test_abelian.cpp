#include <catch2/catch_amalgamated.hpp>

#include "hofa/abelian.hpp"
#include "test_util.hpp"

using namespace hofa;

TEST_CASE("modular addition and negation") {
  GroupSpec z4 = GroupSpec::cyclic(4);
  CHECK(z4.add(GroupElement{{3}}, GroupElement{{2}}) == GroupElement{{1}});

  GroupSpec z23({2, 3});
  CHECK(z23.add(GroupElement{{1, 2}}, GroupElement{{1, 2}}) ==
        GroupElement{{0, 1}});

  CounterRng rng(7);
  for (int i = 0; i < 20; ++i) {
    GroupElement a = testutil::random_element(z23, rng);
    CHECK(z23.add(a, z23.neg(a)) == z23.identity());
  }
}

TEST_CASE("mixed-radix indexing is first-modulus-most-significant") {
  GroupSpec g({2, 3});
  // index = r0*3 + r1
  CHECK(g.index_of(GroupElement{{1, 2}}) == 5);
  CHECK(g.element_at(4) == GroupElement{{1, 1}});
  for (std::uint64_t i = 0; i < g.order(); ++i)
    CHECK(g.index_of(g.element_at(i)) == i);
}

TEST_CASE("mismatched elements are rejected") {
  GroupSpec z4 = GroupSpec::cyclic(4);
  CHECK_THROWS_AS(z4.add(GroupElement{{1}}, GroupElement{{1, 0}}),
                  structural_error);
  CHECK_THROWS_AS(z4.index_of(GroupElement{{4}}), structural_error);
}

TEST_CASE("character evaluation") {
  GroupSpec z4 = GroupSpec::cyclic(4);
  const Character triv = z4.trivial_character();
  for (std::uint64_t i = 0; i < 4; ++i)
    CHECK(std::abs(z4.char_eval(triv, z4.element_at(i)) - cplx(1, 0)) < 1e-12);

  // e(1/4) = i
  CHECK(std::abs(z4.char_eval(Character{{1}}, GroupElement{{1}}) - cplx(0, 1)) <
        1e-12);

  // unit modulus everywhere
  GroupSpec g({3, 4});
  for (std::uint64_t c = 0; c < g.order(); ++c)
    for (std::uint64_t x = 0; x < g.order(); ++x)
      CHECK(std::abs(std::abs(g.char_eval(g.character_at(c), g.element_at(x))) -
                     1.0) < 1e-12);
}

TEST_CASE("character multiplicativity on Z_6, all pairs") {
  GroupSpec z6 = GroupSpec::cyclic(6);
  for (std::uint64_t c = 0; c < 6; ++c) {
    const Character chi = z6.character_at(c);
    for (std::uint64_t x = 0; x < 6; ++x)
      for (std::uint64_t y = 0; y < 6; ++y) {
        GroupElement ex = z6.element_at(x), ey = z6.element_at(y);
        cplx lhs = z6.char_eval(chi, z6.add(ex, ey));
        cplx rhs = z6.char_eval(chi, ex) * z6.char_eval(chi, ey);
        CHECK(std::abs(lhs - rhs) < 1e-12);
      }
  }
}

TEST_CASE("dft of a character is a delta") {
  GroupSpec z5 = GroupSpec::cyclic(5);
  const Character chi = z5.character_at(2);
  auto coeffs = dft(GroupFunction::from_character(z5, chi));
  for (std::uint64_t c = 0; c < 5; ++c) {
    const double expect = (c == 2) ? 1.0 : 0.0;
    CHECK(std::abs(coeffs[c] - cplx(expect, 0)) < 1e-12);
  }
}

TEST_CASE("dft of the identity indicator is flat") {
  GroupSpec z4 = GroupSpec::cyclic(4);
  std::vector<cplx> v(4, cplx(0, 0));
  v[0] = 1.0;
  auto coeffs = dft(GroupFunction(z4, std::move(v)));
  for (const cplx& z : coeffs) CHECK(std::abs(z - cplx(0.25, 0)) < 1e-12);
}

TEST_CASE("Parseval against direct summation, random f on Z_8") {
  GroupSpec z8 = GroupSpec::cyclic(8);
  CounterRng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    GroupFunction f = testutil::random_bounded(z8, rng);
    auto coeffs = dft(f);
    double coeff_side = 0.0;
    for (const cplx& z : coeffs) coeff_side += std::norm(z);
    double fn_side = 0.0;
    for (const cplx& z : f.values) fn_side += std::norm(z);
    fn_side /= 8.0;
    CHECK(std::abs(coeff_side - fn_side) < 1e-9);
  }
}

TEST_CASE("dft then idft is the identity") {
  GroupSpec g({2, 3, 4});
  CounterRng rng(13);
  GroupFunction f = testutil::random_bounded(g, rng);
  GroupFunction back = idft(g, dft(f));
  for (std::uint64_t i = 0; i < g.order(); ++i)
    CHECK(std::abs(back.values[i] - f.values[i]) < 1e-9);
}

TEST_CASE("radix-2 and direct transforms agree on Z_128") {
  GroupSpec g = GroupSpec::cyclic(128);
  CounterRng rng(17);
  GroupFunction f = testutil::random_bounded(g, rng);
  auto fast = dft(f, /*force_direct=*/false);
  auto slow = dft(f, /*force_direct=*/true);
  for (std::uint64_t i = 0; i < g.order(); ++i)
    CHECK(std::abs(fast[i] - slow[i]) < 1e-9);
  GroupFunction back = idft(g, fast, /*force_direct=*/false);
  for (std::uint64_t i = 0; i < g.order(); ++i)
    CHECK(std::abs(back.values[i] - f.values[i]) < 1e-9);
}

TEST_CASE("declared sup bound is validated") {
  GroupSpec z2 = GroupSpec::cyclic(2);
  CHECK_NOTHROW(GroupFunction(z2, {cplx(1, 0), cplx(0, 1)}, 1.0));
  CHECK_THROWS_AS(GroupFunction(z2, {cplx(2, 0), cplx(0, 0)}, 1.0),
                  structural_error);
}

TEST_CASE("group table matches componentwise arithmetic") {
  GroupSpec g({3, 2, 2});
  GroupTable t(g);
  CounterRng rng(19);
  for (int i = 0; i < 50; ++i) {
    std::uint64_t a = rng.next_below(g.order());
    std::uint64_t b = rng.next_below(g.order());
    CHECK(t.add(a, b) ==
          g.index_of(g.add(g.element_at(a), g.element_at(b))));
    CHECK(t.neg(a) == g.index_of(g.neg(g.element_at(a))));
  }
}
