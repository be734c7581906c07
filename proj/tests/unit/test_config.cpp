#include <doctest.h>

#include <filesystem>
#include <functional>
#include <fstream>

#include "pat/config.hpp"
#include "pat/csv.hpp"
#include "pat/error.hpp"

using namespace pat;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("parse key/value text with comments") {
    const Config c = Config::parse("# header\nattack.iterations = 300\n\n  loss.weights=nt:1,t=:1  # hybrid\n");
    CHECK(c.get_int("attack.iterations") == 300);
    CHECK(c.get("loss.weights") == "nt:1,t=:1");
    CHECK(c.get_list("loss.weights") == std::vector<std::string>{"nt:1", "t=:1"});
  }

  TEST_CASE("malformed input is a ConfigError naming the line") {
    CHECK(message_of([] { Config::parse("a=1\nnot a pair\n", "x.conf"); }).find("x.conf:2") != std::string::npos);
    CHECK_THROWS_AS(Config::parse("a=1\na=2\n"), ConfigError);
    CHECK_THROWS_AS(Config::parse("a=abc\n").get_int("a"), ConfigError);
    CHECK_THROWS_AS(Config::parse("a=1.5x\n").get_double("a"), ConfigError);
    CHECK_THROWS_AS(Config::parse("").get("missing"), ConfigError);
  }

  TEST_CASE("require lists every missing key") {
    const Config c = Config::parse("attack.iterations=5\n");
    const std::string msg = message_of([&] { c.require(required_keys("attack")); });
    CHECK(msg.find("attack.batch_size") != std::string::npos);
    CHECK(msg.find("loss.weights") != std::string::npos);
    CHECK(msg.find("attack.iterations") == std::string::npos);
  }

  TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(Config::parse("attack.iteratons=5\n").reject_unknown(), ConfigError);
    CHECK_NOTHROW(default_config().reject_unknown());
  }

  TEST_CASE("a manifest reads back as its config section") {
    const Config c = Config::parse("manifest.version=1\nmanifest.command=attack\nresult.x=3\nconfig.attack.iterations=7\n");
    CHECK(c.get_int("attack.iterations") == 7);
    CHECK_FALSE(c.has("manifest.command"));
    CHECK_FALSE(c.has("result.x"));
  }

  TEST_CASE("dump then parse is the identity") {
    const Config& d = default_config();
    const Config back = Config::parse(d.dump());
    CHECK(back.entries() == d.entries());
  }

  TEST_CASE("alpha schedule round trip") {
    const attack::AlphaSchedule s = parse_alpha_schedule("500:0.75,inf:0.25");
    REQUIRE(s.size() == 2);
    CHECK(s[0].until_iteration == 500);
    CHECK(s[0].alpha == 0.75);
    CHECK(parse_alpha_schedule(format_alpha_schedule(s)).size() == 2);
    CHECK(format_alpha_schedule(parse_alpha_schedule(format_alpha_schedule(s))) == format_alpha_schedule(s));
    CHECK_THROWS_AS(parse_alpha_schedule("500"), ConfigError);
  }

  TEST_CASE("defaults build valid module configs") {
    const Config& d = default_config();
    CHECK_NOTHROW(scene_distribution_from(d).validate());
    CHECK_NOTHROW(train_config_from(d).validate());
    const attack::AttackConfig a = attack_config_from(d);
    CHECK_NOTHROW(a.validate());
    CHECK(attack::alpha_at(a.alpha, 500) == 0.75);
    CHECK(attack::alpha_at(a.alpha, 501) == 0.25);
    CHECK(a.loss.weight(attack::LossTerm::nt) == 1.0);
    Config hybrid = d;
    hybrid.set("loss.weights", "nt:1,t=:1000");
    CHECK(attack_config_from(hybrid).loss.weight(attack::LossTerm::t_equal) == 1000.0);
    hybrid.set("loss.weights", "bogus:1");
    CHECK_THROWS_AS(attack_config_from(hybrid), ConfigError);
  }

  TEST_CASE("csv writer output parses back") {
    const auto path = std::filesystem::temp_directory_path() / "pat_csv_roundtrip.csv";
    {
      CsvWriter w(path, {"name", "value", "note"});
      w.write("a", 0.1, "plain");
      w.write("b,c", 1.0 / 3.0, "has \"quotes\"");
    }
    const CsvTable t = read_csv(path);
    REQUIRE(t.rows.size() == 2);
    CHECK(t.text(1, "name") == "b,c");
    CHECK(t.text(1, "note") == "has \"quotes\"");
    CHECK(t.number(1, "value") == 1.0 / 3.0);
    CHECK(t.number(0, "value") == 0.1);
    CHECK_THROWS_AS(t.column("missing"), Error);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(parse_csv("a,b\n1\n"), Error);
  }
}
