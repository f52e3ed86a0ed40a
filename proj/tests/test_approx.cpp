#include <catch2/catch_amalgamated.hpp>

#include "hofa/approx.hpp"
#include "test_util.hpp"

using namespace hofa;

namespace {

FunctionSystem random_unimodular_punctured(const GroupSpec& g, int n,
                                           CounterRng& rng) {
  std::vector<GroupFunction> m;
  for (std::size_t i = 1; i < (std::size_t{1} << n); ++i)
    m.push_back(testutil::random_unimodular(g, rng));
  return FunctionSystem::punctured(n, std::move(m));
}

double l2_distance(const GroupFunction& a, const GroupFunction& b) {
  KahanSum acc;
  for (std::size_t i = 0; i < a.values.size(); ++i)
    acc.add(std::norm(a.values[i] - b.values[i]));
  return std::sqrt(acc.value() / static_cast<double>(a.values.size()));
}

}  // namespace

TEST_CASE("subgroup closure") {
  GroupSpec z6 = GroupSpec::cyclic(6);
  Subgroup b(z6, {GroupElement{{3}}});
  CHECK(b.size() == 2);
  CHECK(b.contains_index(0));
  CHECK(b.contains_index(3));
  CHECK(Subgroup::whole(z6).size() == 6);
  CHECK(Subgroup::trivial(z6).size() == 1);
  CHECK_THROWS_AS(
      Subgroup::from_elements(z6, {z6.identity(), GroupElement{{1}}}),
      structural_error);
}

TEST_CASE("shift average basics") {
  GroupSpec z6 = GroupSpec::cyclic(6);
  CounterRng rng(3);
  GroupFunction f = testutil::random_bounded(z6, rng);

  GroupFunction whole = shift_average(f, Subgroup::whole(z6));
  for (const cplx& z : whole.values) CHECK(std::abs(z - f.mean()) < 1e-12);

  GroupFunction triv = shift_average(f, Subgroup::trivial(z6));
  for (std::uint64_t i = 0; i < 6; ++i)
    CHECK(std::abs(triv.values[i] - f.values[i]) < 1e-12);

  Subgroup b(z6, {GroupElement{{3}}});
  GroupFunction avg = shift_average(f, b);
  for (std::uint64_t z = 0; z < 6; ++z) {
    const cplx expect = 0.5 * (f.values[z] + f.values[(z + 3) % 6]);
    CHECK(std::abs(avg.values[z] - expect) < 1e-12);
  }
}

TEST_CASE("shift sampling trivial cases") {
  GroupSpec z8 = GroupSpec::cyclic(8);
  CounterRng rng(5);
  GroupFunction f = testutil::random_unimodular(z8, rng);

  auto r1 = shift_sample_approx(f, Subgroup::trivial(z8), 0.5, 1);
  CHECK(r1.error < 1e-12);
  CHECK(r1.exact_mode);
  for (std::uint64_t i = 0; i < 8; ++i)
    CHECK(std::abs(r1.approx.values[i] - f.values[i]) < 1e-12);

  GroupFunction c = GroupFunction::constant(z8, cplx(0.6, -0.2));
  auto r2 = shift_sample_approx(c, Subgroup::whole(z8), 0.25, 2);
  CHECK(r2.error < 1e-12);

  CHECK_THROWS_AS(shift_sample_approx(f, Subgroup::whole(z8), -1.0, 3),
                  structural_error);
}

TEST_CASE("shift sampling respects the hard sample cap") {
  GroupSpec z16 = GroupSpec::cyclic(16);
  CounterRng rng(7);
  GroupFunction f = testutil::random_unimodular(z16, rng);
  const double eps = 0.9;
  auto r = shift_sample_approx(f, Subgroup::whole(z16), eps, 11);
  CHECK_FALSE(r.exact_mode);
  CHECK(static_cast<double>(r.shifts.size()) <= 1.0 + 4.0 / (eps * eps));
  CHECK(r.error <= eps);
}

TEST_CASE("shift sampling statistics on the index-2 subgroup of Z_16") {
  GroupSpec z16 = GroupSpec::cyclic(16);
  Subgroup evens(z16, {GroupElement{{2}}});
  REQUIRE(evens.size() == 8);

  // eps = 0.5 drives the bound past |B|, so the draw is exact
  CounterRng rng(9);
  GroupFunction f = testutil::random_unimodular(z16, rng);
  auto exact = shift_sample_approx(f, evens, 0.5, 1);
  CHECK(exact.exact_mode);
  CHECK(exact.error < 1e-12);

  // eps = 1.0 gives n = 5 < |B| and genuine sampling; the accepted errors
  // must beat the variance bound with 1.5x slack on average
  const double eps = 1.0;
  const std::uint64_t n = 5;
  double sum_err2 = 0.0;
  double sum_retries = 0.0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    GroupFunction fs = testutil::random_unimodular(z16, rng);
    auto r = shift_sample_approx(fs, evens, eps, 1000 + s);
    REQUIRE(r.shifts.size() == n);
    sum_err2 += r.error * r.error;
    sum_retries += r.retries;
  }
  CHECK(sum_err2 / seeds <= 1.5 * 4.0 / static_cast<double>(n));
  CHECK(sum_retries / seeds <= 2.0);
}

TEST_CASE("rank one terms are shifted starred products") {
  GroupSpec z5 = GroupSpec::cyclic(5);
  CounterRng rng(13);
  FunctionSystem F = random_unimodular_punctured(z5, 2, rng);
  std::vector<GroupElement> y{GroupElement{{2}}, GroupElement{{4}}};
  RankOneTerm term(F, y);

  // table route vs definitional product of the shifted system
  GroupFunction table = term.to_function();
  FunctionSystem shifted = term.shifted_system();
  const GroupSpec big = cube_group(z5, 2);
  for (std::uint64_t x = 0; x < 5; ++x)
    for (std::uint64_t t1 = 0; t1 < 5; ++t1)
      for (std::uint64_t t2 = 0; t2 < 5; ++t2) {
        cplx expect =
            star(1, shifted.member(1).values[(x + t1) % 5]) *
            star(2, shifted.member(2).values[(x + t2) % 5]) *
            star(3, shifted.member(3).values[(x + t1 + t2) % 5]);
        const std::uint64_t flat = (x * 5 + t1) * 5 + t2;
        CHECK(std::abs(table.values[flat] - expect) < 1e-12);
      }
}

TEST_CASE("rank one terms are shift invariant as a class") {
  GroupSpec z4 = GroupSpec::cyclic(4);
  CounterRng rng(17);
  FunctionSystem F = random_unimodular_punctured(z4, 2, rng);
  std::vector<GroupElement> y{GroupElement{{1}}, GroupElement{{2}}};
  std::vector<GroupElement> yp{GroupElement{{3}}, GroupElement{{1}}};
  RankOneTerm term(F, y);
  RankOneTerm shifted_term(
      F, {z4.add(y[0], yp[0]), z4.add(y[1], yp[1])});

  GroupFunction t1 = term.to_function();
  GroupFunction t2 = shifted_term.to_function();
  // evaluating term at z + (0, yp) equals evaluating the shifted term at z
  for (std::uint64_t x = 0; x < 4; ++x)
    for (std::uint64_t a = 0; a < 4; ++a)
      for (std::uint64_t b = 0; b < 4; ++b) {
        const std::uint64_t zyp =
            (x * 4 + (a + z4.index_of(yp[0])) % 4) * 4 +
            (b + z4.index_of(yp[1])) % 4;
        const std::uint64_t z = (x * 4 + a) * 4 + b;
        CHECK(std::abs(t1.values[zyp] - t2.values[z]) < 1e-12);
      }
}

TEST_CASE("lowrank approximation with a generous eps uses one term") {
  GroupSpec z5 = GroupSpec::cyclic(5);
  GroupFunction one = GroupFunction::constant(z5, 1.0);
  FunctionSystem F = FunctionSystem::constant_punctured(2, one);
  auto lr = lowrank_approx(F, 2.5, 42);
  CHECK(lr.terms.size() == 1);
  CHECK(lr.certified_error < 1e-12);
  // the single term of the all-ones system is all ones
  GroupFunction t = lr.terms[0].to_function();
  for (const cplx& z : t.values) CHECK(std::abs(z - cplx(1, 0)) < 1e-12);
}

TEST_CASE("lowrank approximation on Z_8 at eps = 0.5") {
  GroupSpec z8 = GroupSpec::cyclic(8);
  CounterRng rng(19);
  FunctionSystem F = random_unimodular_punctured(z8, 2, rng);
  auto lr = lowrank_approx(F, 0.5, 7);
  CHECK_FALSE(lr.exact_mode);
  CHECK(lr.terms.size() <= 17);
  CHECK(lr.certified_error <= 0.5);

  // independent recomputation of the certificate from the term tables
  GroupFunction avg = lr.average_function();
  GroupFunction convd = corner_convolution(F);
  const GroupSpec big = cube_group(z8, 2);
  std::vector<cplx> lifted(big.order());
  for (std::uint64_t x = 0; x < 8; ++x)
    for (std::uint64_t t1 = 0; t1 < 8; ++t1)
      for (std::uint64_t t2 = 0; t2 < 8; ++t2)
        lifted[(x * 8 + t1) * 8 + t2] = convd.values[x];
  const double recomputed = l2_distance(avg, GroupFunction(big, lifted));
  CHECK(std::abs(recomputed - lr.certified_error) < 1e-9);
}

TEST_CASE("lowrank approximation of a character system") {
  GroupSpec z5 = GroupSpec::cyclic(5);
  CounterRng rng(23);
  std::vector<GroupFunction> members;
  for (int i = 0; i < 3; ++i)
    members.push_back(GroupFunction::from_character(
        z5, z5.character_at(rng.next_below(5))));
  FunctionSystem F = FunctionSystem::punctured(2, std::move(members));
  auto lr = lowrank_approx(F, 0.5, 99);
  CHECK(lr.terms.size() <= 17);
  CHECK(lr.certified_error <= 0.5);
}

TEST_CASE("exact-mode lowrank reproduces the lifted convolution") {
  GroupSpec z4 = GroupSpec::cyclic(4);
  CounterRng rng(29);
  FunctionSystem F = random_unimodular_punctured(z4, 2, rng);
  // eps small enough that the bound passes |C_0^2| = 16
  auto lr = lowrank_approx(F, 0.4, 3);
  CHECK(lr.exact_mode);
  CHECK(lr.terms.size() == 16);
  CHECK(lr.certified_error < 1e-12);
}

TEST_CASE("conv product with all-ones systems") {
  GroupSpec z5 = GroupSpec::cyclic(5);
  GroupFunction one = GroupFunction::constant(z5, 1.0);
  FunctionSystem F = FunctionSystem::constant_punctured(2, one);
  FunctionSystem G = FunctionSystem::constant_punctured(2, one);
  auto pr = conv_product_approx(F, G, 9.0, 5);
  CHECK(pr.term_count() == 1);
  CHECK(pr.certified_error < 1e-12);
  FunctionSystem H = conv_product_term(F, G, pr, 0);
  for (Vertex v = 1; v < 4; ++v)
    for (const cplx& z : H.member(v).values) CHECK(std::abs(z - cplx(1, 0)) < 1e-12);
}

TEST_CASE("conv product with G all ones reduces to a convolution average") {
  GroupSpec z8 = GroupSpec::cyclic(8);
  CounterRng rng(31);
  FunctionSystem F = random_unimodular_punctured(z8, 2, rng);
  GroupFunction one = GroupFunction::constant(z8, 1.0);
  FunctionSystem G = FunctionSystem::constant_punctured(2, one);
  auto pr = conv_product_approx(F, G, 0.5, 77);
  CHECK(pr.certified_error <= 0.5);
  CHECK(pr.term_count() <= (1 + 64 / 0.25) * (1 + 64 / 0.25));
}

TEST_CASE("conv product on Z_8 with certification oracle") {
  GroupSpec z8 = GroupSpec::cyclic(8);
  CounterRng rng(37);
  FunctionSystem F = random_unimodular_punctured(z8, 2, rng);
  FunctionSystem G = random_unimodular_punctured(z8, 2, rng);
  auto pr = conv_product_approx(F, G, 0.5, 911);
  CHECK(pr.certified_error <= 0.5);
  const double cap = sqr(1.0 + 64.0 / 0.25);
  CHECK(static_cast<double>(pr.term_count()) <= cap);

  // independent oracle: materialize every term system, convolve it the
  // definitional way, and recompute the L^2 distance to [F][G]
  GroupFunction target =
      corner_convolution(F).pointwise_mul(corner_convolution(G));
  std::vector<cplx> avg(z8.order(), cplx(0, 0));
  for (std::uint64_t i = 0; i < pr.term_count(); ++i) {
    GroupFunction hc = corner_convolution(conv_product_term(F, G, pr, i));
    for (std::uint64_t x = 0; x < z8.order(); ++x) avg[x] += hc.values[x];
  }
  for (auto& z : avg) z /= static_cast<double>(pr.term_count());
  const double recomputed = l2_distance(GroupFunction(z8, avg), target);
  CHECK(std::abs(recomputed - pr.certified_error) < 1e-9);
}

TEST_CASE("approx rejects out-of-contract inputs") {
  GroupSpec z4 = GroupSpec::cyclic(4);
  GroupFunction big = GroupFunction::constant(z4, 2.0);
  CHECK_THROWS_AS(
      shift_sample_approx(big, Subgroup::whole(z4), 0.5, 1),
      structural_error);
  FunctionSystem Fbig = FunctionSystem::constant_punctured(2, big);
  CHECK_THROWS_AS(lowrank_approx(Fbig, 0.5, 1), structural_error);
}
