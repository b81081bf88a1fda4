#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <deque>
#include <map>
#include <random>
#include <set>

#include "specdens/groups.hpp"

using namespace specdens;

namespace {

// Independent word-metric oracle: BFS over mul() only.
std::map<long, long> bfs_distances(const GroupPtr& g) {
  std::map<long, long> dist;
  std::deque<GroupElement> q;
  dist[g->index_of(g->identity())] = 0;
  q.push_back(g->identity());
  while (!q.empty()) {
    auto x = q.front();
    q.pop_front();
    long dx = dist[g->index_of(x)];
    for (int i = 0; i < g->num_generators(); i++) {
      for (auto s : {g->generator(i), g->inverse(g->generator(i))}) {
        auto y = g->mul(x, s);
        long yi = g->index_of(y);
        if (!dist.count(yi)) {
          dist[yi] = dx + 1;
          q.push_back(y);
        }
      }
    }
  }
  return dist;
}

}  // namespace

TEST_CASE("cyclic group basics") {
  auto g = Group::cyclic(6);
  CHECK(g->order() == 6);
  CHECK(g->is_finite());
  auto u = g->generator(0);
  CHECK(g->is_identity(g->pow(u, 6)));
  CHECK(g->mul(g->pow(u, 4), g->pow(u, 5)) == g->pow(u, 3));
  CHECK(g->inverse(g->pow(u, 2)) == g->pow(u, 4));
  for (long i = 0; i < 6; i++) CHECK(g->index_of(g->element_at(i)) == i);
  CHECK(g->format(g->pow(u, 2)) == "u^2");
  CHECK(g->format(g->identity()) == "e");
  CHECK(g->parse("u^2") == g->pow(u, 2));
  CHECK(g->parse("u^-1") == g->pow(u, 5));
  CHECK(g->parse("e") == g->identity());
  CHECK_THROWS(g->parse("q^2"));
}

TEST_CASE("finite table word metric matches a fresh BFS") {
  for (auto g : {Group::cyclic(12), Group::symmetric(4)}) {
    auto dist = bfs_distances(g);
    for (long i = 0; i < g->element_count(); i++) {
      auto x = g->element_at(i);
      CHECK(g->word_length(x) == dist.at(i));
    }
    // left invariance
    std::mt19937 rng(5);
    for (int t = 0; t < 30; t++) {
      auto a = g->element_at(rng() % g->element_count());
      auto x = g->element_at(rng() % g->element_count());
      auto y = g->element_at(rng() % g->element_count());
      CHECK(g->word_distance(x, y) == g->word_distance(g->mul(a, x), g->mul(a, y)));
    }
  }
}

TEST_CASE("finite table validation") {
  // Klein four group.
  std::vector<std::vector<int>> v4 = {
      {0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  auto g = Group::finite_table(v4, {1, 2});
  CHECK(g->order() == 4);
  CHECK(g->inverse(g->element_at(3)) == g->element_at(3));

  auto broken = v4;
  broken[1][1] = 1;  // kills both the inverse and associativity
  CHECK_THROWS(Group::finite_table(broken, {1, 2}));

  // Generators that do not generate.
  CHECK_THROWS(Group::finite_table(v4, {0}));
}

TEST_CASE("symmetric group structure") {
  auto g = Group::symmetric(3);
  CHECK(g->order() == 6);
  auto s = g->generator(0), c = g->generator(1);
  CHECK_FALSE(g->mul(s, c) == g->mul(c, s));
  CHECK(g->is_identity(g->pow(s, 2)));
  CHECK(g->is_identity(g->pow(c, 3)));

  // Conjugacy class sizes of S3 are 1, 3, 2.
  std::multiset<long> sizes;
  std::set<GroupElement> seen;
  for (long i = 0; i < 6; i++) {
    auto x = g->element_at(i);
    if (seen.count(x)) continue;
    auto cls = g->conjugacy_class(x);
    REQUIRE(cls.status == ClassStatus::Finite);
    sizes.insert(cls.size());
    seen.insert(cls.elements.begin(), cls.elements.end());
    // closure under conjugation by everything
    for (long j = 0; j < 6; j++) {
      auto a = g->element_at(j);
      auto y = g->mul(g->inverse(a), g->mul(x, a));
      CHECK(std::binary_search(cls.elements.begin(), cls.elements.end(), y));
    }
  }
  CHECK(sizes == std::multiset<long>({1, 2, 3}));

  auto cls = g->conjugacy_class(s, /*budget=*/1);
  CHECK(cls.status == ClassStatus::Undecided);
}

TEST_CASE("free abelian group") {
  auto g = Group::free_abelian(2, {"u", "v"});
  auto u = g->generator(0), v = g->generator(1);
  CHECK(g->order() == -1);
  CHECK_FALSE(g->is_finite());
  CHECK(g->mul(u, v) == g->mul(v, u));
  auto x = g->mul(g->pow(u, 3), g->pow(v, -2));
  CHECK(g->word_length(x) == 5);
  CHECK(g->format(x) == "u^3*v^-2");
  CHECK(g->parse("u^3*v^-2") == x);
  CHECK(g->parse("v^-2*u^3") == x);
  auto cls = g->conjugacy_class(x);
  CHECK(cls.status == ClassStatus::Finite);
  CHECK(cls.size() == 1);
  CHECK_THROWS(g->element_count());
}

TEST_CASE("free group reduction") {
  auto g = Group::free_group(2);
  auto a = g->generator(0), b = g->generator(1);
  CHECK(g->is_identity(g->mul(a, g->inverse(a))));
  auto w = g->mul(g->mul(a, b), g->inverse(b));
  CHECK(w == a);
  auto ab = g->mul(a, b);
  CHECK(g->inverse(ab) == g->mul(g->inverse(b), g->inverse(a)));
  CHECK(g->word_length(g->mul(ab, ab)) == 4);
  CHECK(g->format(g->mul(ab, g->inverse(a))) == "a*b*a^-1");
  CHECK(g->parse("a*b*a^-1") == g->mul(ab, g->inverse(a)));
  CHECK(g->conjugacy_class(a).status == ClassStatus::Infinite);
  CHECK(g->conjugacy_class(g->identity()).status == ClassStatus::Finite);
  // rank one free group is Z: classes are singletons
  auto z = Group::free_group(1);
  CHECK(z->conjugacy_class(z->generator(0)).size() == 1);
}

TEST_CASE("element shape validation") {
  auto g = Group::cyclic(4);
  auto h = Group::free_abelian(1);
  CHECK_THROWS_AS(g->mul(g->identity(), h->identity()), std::invalid_argument);
  CHECK_THROWS_AS(h->check_element(GroupElement{std::vector<std::int64_t>{1, 2}}),
                  std::invalid_argument);
  // unreduced word rejected
  auto f = Group::free_group(2);
  CHECK_THROWS_AS(f->check_element(GroupElement{std::vector<std::int32_t>{1, -1}}),
                  std::invalid_argument);
}

TEST_CASE("direct product") {
  auto g = Group::direct_product({Group::cyclic(2, "t"), Group::free_abelian(1)});
  CHECK(g->order() == -1);
  CHECK(g->num_generators() == 2);
  auto t = g->generator(0), u = g->generator(1);
  CHECK(g->mul(t, u) == g->mul(u, t));
  CHECK(g->is_identity(g->pow(t, 2)));
  auto x = g->mul(t, g->pow(u, 3));
  CHECK(g->word_length(x) == 4);
  CHECK(g->format(x) == "t*u^3");
  CHECK(g->parse("t*u^3") == x);
  auto cls = g->conjugacy_class(x);
  CHECK(cls.status == ClassStatus::Finite);
  CHECK(cls.size() == 1);

  CHECK_THROWS(Group::direct_product({Group::cyclic(2), Group::free_abelian(1, {"u"})}));

  auto fin = Group::direct_product({Group::cyclic(2, "t"), Group::cyclic(3, "u")});
  CHECK(fin->order() == 6);
  for (long i = 0; i < 6; i++) CHECK(fin->index_of(fin->element_at(i)) == i);
  auto dist = bfs_distances(fin);
  for (long i = 0; i < 6; i++)
    CHECK(fin->word_length(fin->element_at(i)) == dist.at(i));
}

TEST_CASE("mod quotient of Z") {
  auto z = Group::free_abelian(1);
  auto q = QuotientMap::mod_quotient(z, 5);
  CHECK(q.target->order() == 5);
  std::string why;
  CHECK(q.verify(&why));
  for (long k = -20; k <= 20; k++) {
    auto img = q.apply(z->pow(z->generator(0), k));
    CHECK(q.target->index_of(img) == ((k % 5) + 5) % 5);
  }
}

TEST_CASE("mod quotient of Z/2 x Z^1 keeps the finite factor") {
  auto g = Group::direct_product({Group::cyclic(2, "t"), Group::free_abelian(1)});
  auto q = QuotientMap::mod_quotient(g, 8);
  CHECK(q.target->order() == 16);
  std::string why;
  CHECK(q.verify(&why));
  auto t = g->generator(0), u = g->generator(1);
  auto x = g->mul(t, g->pow(u, 11));
  auto img = q.apply(x);
  CHECK(img == q.target->parse("t*u^3"));
  CHECK(q.apply(g->pow(u, 8)) == q.target->identity());
}

TEST_CASE("composition of quotient maps") {
  auto z = Group::free_abelian(1);
  auto q8 = QuotientMap::mod_quotient(z, 8);
  auto z8 = q8.target;
  auto z4 = Group::cyclic(4);
  QuotientMap step(z8, z4, {z4->generator(0)});
  std::string why;
  REQUIRE(step.verify(&why));
  auto q4 = QuotientMap::compose(q8, step);
  auto direct = QuotientMap::mod_quotient(z, 4);
  for (long k = -9; k <= 9; k++) {
    auto x = z->pow(z->generator(0), k);
    CHECK(q4.apply(x) == direct.apply(x));
  }
}

TEST_CASE("verify rejects non-homomorphisms") {
  auto z3 = Group::cyclic(3);
  auto z2 = Group::cyclic(2, "t");
  QuotientMap bad(z3, z2, {z2->generator(0)});
  std::string why;
  CHECK_FALSE(bad.verify(&why));
  CHECK_FALSE(why.empty());

  // images of commuting generators must commute
  auto z2ab = Group::free_abelian(2);
  auto s3 = Group::symmetric(3);
  QuotientMap bad2(z2ab, s3, {s3->generator(0), s3->generator(1)});
  CHECK_FALSE(bad2.verify(&why));
}

TEST_CASE("identity map and descriptor equality") {
  auto g = Group::direct_product({Group::cyclic(2, "t"), Group::free_abelian(2)});
  auto id = QuotientMap::identity_map(g);
  std::string why;
  CHECK(id.verify(&why));
  std::mt19937 rng(3);
  auto u = g->generator(1), v = g->generator(2), t = g->generator(0);
  for (int trial = 0; trial < 20; trial++) {
    auto x = g->mul(g->pow(t, rng() % 2),
                    g->mul(g->pow(u, (long)(rng() % 9) - 4),
                           g->pow(v, (long)(rng() % 9) - 4)));
    CHECK(id.apply(x) == x);
  }
  CHECK(Group::cyclic(4)->same_descriptor(*Group::cyclic(4)));
  CHECK_FALSE(Group::cyclic(4)->same_descriptor(*Group::cyclic(5)));
  CHECK_FALSE(Group::cyclic(4)->same_descriptor(*Group::free_abelian(1)));
}
