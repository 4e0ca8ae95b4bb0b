#include <catch_amalgamated.hpp>

#include <unordered_set>

#include "granular/history.hpp"

using namespace granular;

TEST_CASE("history construction and string round-trip") {
  History h;
  CHECK(h.empty());
  CHECK(h.size() == 0);
  CHECK(h.to_string() == "");
  h.push_back(1);
  h.push_back(0);
  h.push_back(1);
  CHECK(h.size() == 3);
  CHECK(h.to_string() == "101");
  CHECK(History::from_string("101") == h);
  CHECK(h.last() == 1);
  CHECK(h.parent().to_string() == "10");
  CHECK(h.child(0).to_string() == "1010");
}

TEST_CASE("push then pop restores exact equality") {
  History a = History::from_string("0110");
  History b = a;
  b.push_back(1);
  b.pop_back();
  CHECK(a == b);
  CHECK(a.hash() == b.hash());
  History c;
  c.push_back(0);
  c.pop_back();
  CHECK(c == History());
  CHECK(c.hash() == History().hash());
}

TEST_CASE("prefix relation") {
  History h = History::from_string("110010");
  CHECK(h.prefix(0) == History());
  CHECK(h.prefix(3).to_string() == "110");
  CHECK(h.prefix(3).is_prefix_of(h));
  CHECK(h.is_prefix_of(h));
  CHECK_FALSE(h.is_prefix_of(h.prefix(3)));
  CHECK_FALSE(History::from_string("111").is_prefix_of(h));
}

TEST_CASE("from_index enumerates length-lexicographically") {
  CHECK(History::from_index(0, 0) == History());
  CHECK(History::from_index(3, 0).to_string() == "000");
  CHECK(History::from_index(3, 5).to_string() == "101");
  CHECK(History::from_index(3, 7).to_string() == "111");
}

TEST_CASE("length-lex order") {
  History a = History::from_string("11");
  History b = History::from_string("000");
  History c = History::from_string("001");
  CHECK(length_lex_less(a, b));
  CHECK(length_lex_less(b, c));
  CHECK_FALSE(length_lex_less(c, b));
  CHECK_FALSE(length_lex_less(a, a));
}

TEST_CASE("long histories cross word boundaries safely") {
  History h;
  for (int i = 0; i < 200; ++i) h.push_back((i * 7 + 3) % 5 < 2 ? 1 : 0);
  CHECK(h.size() == 200);
  History copy = History::from_string(h.to_string());
  CHECK(copy == h);
  CHECK(copy.hash() == h.hash());
  for (int i = 0; i < 70; ++i) h.pop_back();
  CHECK(h.size() == 130);
  CHECK(h == copy.prefix(130));
}

TEST_CASE("hashes distinguish typical neighbours") {
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t len = 0; len <= 10; ++len)
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << len); ++i)
      seen.insert(History::from_index(len, i).hash());
  // 2^11 - 1 distinct histories; a few collisions would be tolerable for a
  // hash, none are expected at this size.
  CHECK(seen.size() == 2047);
}
