#include <cstdlib>
#include <fstream>
#include <random>

#include "doctest.h"
#include "cache.hpp"
#include "config.hpp"

using namespace dioph;
using namespace dioph::cli;
namespace fs = std::filesystem;

namespace {

fs::path fixture(const std::string& name) {
  const char* dir = std::getenv("DIOPH_FIXTURES");
  REQUIRE(dir != nullptr);
  return fs::path(dir) / name;
}

json two_squares() {
  std::ifstream in(fixture("two_squares.json"));
  return json::parse(in);
}

fs::path scratch_dir() {
  std::random_device rd;
  const fs::path dir = fs::temp_directory_path() / ("dioph-cache-test-" + std::to_string(rd()));
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("fixture config loads with defaults filled in") {
  const auto c = load_config(fixture("two_squares.json"));
  CHECK(c.system.variables() == 2);
  CHECK(c.N == 25);
  CHECK(c.D == 1);
  CHECK(c.v[0] == 25);
  CHECK(c.s.size() == 2);
  CHECK(c.linear.has_value());
  CHECK(c.canonical["workers"] == 1);
  CHECK(c.canonical["seed"] == 20240601);
  for (const char* name : {"quadric5.json", "product_pair.json", "no_real_solutions.json",
                           "synthetic_gamma.json", "sieve_sum.json"}) {
    CHECK_NOTHROW(load_config(fixture(name)));
  }
}

TEST_CASE("config validation names the bad key") {
  auto expect_error = [](json doc, const std::string& fragment) {
    try {
      parse_config(doc);
      FAIL("expected a validation error mentioning " << fragment);
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::validation);
      CHECK(std::string(e.what()).find(fragment) != std::string::npos);
    }
  };
  json doc = two_squares();
  doc["v"] = {1, 2};
  expect_error(doc, "'v'");
  doc = two_squares();
  doc["s"] = {1, 2, 3};
  expect_error(doc, "'s'");
  doc = two_squares();
  doc["N"] = 0;
  expect_error(doc, "'N'");
  doc = two_squares();
  doc["system"]["forms"][0][0]["exponents"] = {2};
  expect_error(doc, "exponents");
  doc = two_squares();
  doc["system"]["linear"] = {{1, 0, 0}};
  expect_error(doc, "linear");
  doc = two_squares();
  doc["unknown"] = 1;
  expect_error(doc, "'unknown'");
  doc = two_squares();
  doc["eps"] = 0.5;
  doc["eta"] = 0.2;
  expect_error(doc, "eps < eta");
  doc = two_squares();
  doc["gamma"] = {{"source", "oracle"}};
  expect_error(doc, "gamma.source");
  CHECK_THROWS_AS(load_config(fixture("missing.json")), Error);
}

TEST_CASE("cache keys follow the inputs, not the worker count") {
  auto a = parse_config(two_squares());
  json doc = two_squares();
  doc["workers"] = 4;
  auto b = parse_config(doc);
  CHECK(cache_key("count", cache_inputs(a)) == cache_key("count", cache_inputs(b)));
  CHECK(cache_key("count", cache_inputs(a)) != cache_key("circle", cache_inputs(a)));
  doc["N"] = 26;
  CHECK(cache_key("count", cache_inputs(a)) != cache_key("count", cache_inputs(parse_config(doc))));
  CHECK(fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("cache stores, serves and misses") {
  const fs::path dir = scratch_dir();
  const json payload = {{"results", {{"count", 2}}}};
  {
    ResultCache cache(dir);
    REQUIRE(cache.enabled());
    CHECK_FALSE(cache.get("k1").has_value());
    cache.put("k1", payload);
  }
  ResultCache cache(dir);
  const auto hit = cache.get("k1");
  REQUIRE(hit.has_value());
  CHECK(*hit == payload);
  CHECK_FALSE(cache.get("k2").has_value());
  CHECK(cache.warnings().empty());
  fs::remove_all(dir);
}

TEST_CASE("corrupt cache lines are ignored with a warning") {
  const fs::path dir = scratch_dir();
  {
    ResultCache cache(dir);
    cache.put("k1", {{"count", 2}});
  }
  // flip the stored value without updating the checksum
  std::string line;
  {
    std::ifstream in(dir / "cache.v1.tsv");
    std::getline(in, line);
  }
  line.replace(line.rfind('2'), 1, "3");
  {
    std::ofstream out(dir / "cache.v1.tsv");
    out << line << '\n' << "garbage without tabs\n";
  }
  ResultCache cache(dir);
  CHECK_FALSE(cache.get("k1").has_value());
  CHECK(cache.warnings().size() == 2);

  // recomputed value is appended and served afterwards
  cache.put("k1", {{"count", 2}});
  ResultCache again(dir);
  const auto hit = again.get("k1");
  REQUIRE(hit.has_value());
  CHECK((*hit)["count"] == 2);
  fs::remove_all(dir);
}

TEST_CASE("unwritable cache directory disables the cache") {
  const fs::path file = scratch_dir();
  { std::ofstream(file) << "not a directory"; }
  ResultCache cache(file / "sub");
  CHECK_FALSE(cache.enabled());
  CHECK_FALSE(cache.get("k").has_value());
  CHECK(cache.warnings().size() == 1);
  fs::remove(file);
}
