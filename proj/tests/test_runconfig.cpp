#include <doctest.h>

#include <cstdlib>

#include "avfd/runconfig.hpp"
#include "avfd/errors.hpp"
#include "test_util.hpp"

using namespace avfd;

TEST_CASE("config files parse with comments and whitespace") {
  TempDir tmp("cfg");
  const auto path = tmp.path / "run.cfg";
  {
    std::ofstream out(path);
    out << "# training setup\n"
        << "seed = 42\n"
        << "\n"
        << "manifest=data/m.avfd  # inline comment\n"
        << "learning_rate = 0.0009\n";
  }
  const RunConfig cfg = RunConfig::load(path);
  CHECK(cfg.get_u64("seed", 0) == 42);
  CHECK(cfg.get_string("manifest", "") == "data/m.avfd");
  CHECK(cfg.get_double("learning_rate", 0.0) == doctest::Approx(9e-4));
  CHECK(cfg.get_int("missing", 5) == 5);
}

TEST_CASE("malformed lines and values raise config errors") {
  TempDir tmp("cfg-bad");
  const auto path = tmp.path / "bad.cfg";
  {
    std::ofstream out(path);
    out << "just a line without equals\n";
  }
  CHECK_THROWS_AS(RunConfig::load(path), ParseError);

  RunConfig cfg;
  cfg.set("epochs", "thirty");
  CHECK_THROWS_AS(cfg.get_int("epochs", 0), ConfigError);
  cfg.set("flag", "maybe");
  CHECK_THROWS_AS(cfg.get_bool("flag", false), ConfigError);
}

TEST_CASE("merge precedence: flags beat file") {
  RunConfig file_cfg;
  file_cfg.set("seed", "1");
  file_cfg.set("epochs", "30");
  RunConfig flags;
  flags.set("seed", "2");
  file_cfg.merge(flags);
  CHECK(file_cfg.get_u64("seed", 0) == 2);
  CHECK(file_cfg.get_int("epochs", 0) == 30);
}

TEST_CASE("environment seed override") {
  RunConfig cfg;
  cfg.set("seed", "1");
  setenv("AVFD_SEED", "777", 1);
  cfg.apply_env();
  unsetenv("AVFD_SEED");
  CHECK(cfg.get_u64("seed", 0) == 777);
}

TEST_CASE("unknown keys are rejected per command") {
  RunConfig cfg;
  cfg.set("seed", "1");
  cfg.set("bogus", "x");
  CHECK_THROWS_AS(cfg.restrict_to({"seed"}, "train"), ConfigError);
  cfg.values.erase("bogus");
  CHECK_NOTHROW(cfg.restrict_to({"seed"}, "train"));
}

TEST_CASE("config echo is byte-stable and reloadable") {
  TempDir tmp("cfg-echo");
  RunConfig cfg;
  cfg.set("b", "2");
  cfg.set("a", "1");
  const auto p1 = tmp.path / "e1";
  const auto p2 = tmp.path / "e2";
  cfg.echo(p1);
  cfg.echo(p2);
  CHECK(read_file(p1) == read_file(p2));
  CHECK(read_file(p1) == "a=1\nb=2\n");
  CHECK(RunConfig::load(p1).values == cfg.values);
}
