#include <doctest.h>

#include <cstdlib>
#include <sstream>

#include "qpkdv/config.hpp"
#include "qpkdv/errors.hpp"

using namespace qpkdv;

namespace {

Config parse(const std::string& text) {
  std::istringstream is(text);
  return Config::parse(is, "test.cfg");
}

}  // namespace

TEST_CASE("typed lookups and defaults") {
  const auto c = parse("# comment\nalpha = [1, sqrt(2)]\nsigma = 0.3, 0.3\nbox = 12  # trailing\nname = \"a # b\"\nflag = yes\n");
  CHECK(c.strings("alpha") == std::vector<std::string>{"1", "sqrt(2)"});
  CHECK(c.reals("sigma") == std::vector<double>{0.3, 0.3});
  CHECK(c.integer("box") == 12);
  CHECK(c.string("name") == "a # b");
  CHECK(c.boolean("flag"));
  CHECK(c.real("dt", 1e-3) == 1e-3);
  CHECK(c.echo().at("dt") == "0.001");
  CHECK(c.echo().at("alpha") == "[1, sqrt(2)]");
  CHECK_NOTHROW(c.check_consumed());
}

TEST_CASE("diagnostics carry the line") {
  CHECK_THROWS_WITH_AS(parse("a = 1\nnot a pair\n"), doctest::Contains("test.cfg:2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse("a = 1\na = 2\n"), doctest::Contains("duplicate"), ConfigError);
  const auto c = parse("box = 1.5\ntypo = 3\n");
  CHECK_THROWS_WITH_AS(c.integer("box"), doctest::Contains("test.cfg:1"), ConfigError);
  CHECK_THROWS_WITH_AS(c.check_consumed(), doctest::Contains("unknown key 'typo'"), ConfigError);
  CHECK_THROWS_WITH_AS(c.real("missing"), doctest::Contains("missing"), ConfigError);
  CHECK_THROWS_AS(parse("l = [1, 2\n").reals("l"), ConfigError);
}

TEST_CASE("precedence: command line, environment, file") {
  auto c = parse("config_test_key = 1\n");
  ::setenv("QPKDV_CONFIG_TEST_KEY", "2", 1);
  CHECK(c.integer("config_test_key") == 2);
  c.set("config_test_key", "3");
  CHECK(c.integer("config_test_key") == 3);
  ::unsetenv("QPKDV_CONFIG_TEST_KEY");
  CHECK(Config::env_name("probe.min_half_width") == "QPKDV_PROBE_MIN_HALF_WIDTH");
}

TEST_CASE("list splitting respects parentheses") {
  CHECK(Config::split_list("[sqrt(2), 1/3, golden]") == std::vector<std::string>{"sqrt(2)", "1/3", "golden"});
  CHECK(Config::split_list("[]").empty());
}
