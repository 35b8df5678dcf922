#include <doctest.h>

#include "pals/error.hpp"
#include "pals/validate.hpp"

TEST_CASE("self-checks pass on the reference tables") {
  for (const auto& check : pals::run_validation()) {
    CAPTURE(check.name);
    CAPTURE(check.detail);
    CHECK(check.passed);
  }
}

TEST_CASE("a corrupted coefficient table fails the cardinality check of the affected problem") {
  auto table = pals::default_polynomial_table();
  table[2][4] = -68;  // f8 drives g6
  const auto checks = pals::run_validation(table);
  bool g6_failed = false;
  for (const auto& check : checks) {
    if (check.name.find("g6") != std::string::npos) g6_failed = !check.passed;
    if (check.name.find("g1") != std::string::npos) CHECK(check.passed);
  }
  CHECK(g6_failed);
}

TEST_CASE("coefficient table parsing") {
  std::string text;
  for (int line = 0; line < 10; ++line) text += "1, 2, 3, 4, 5, 6, 7, 8, 9, 10\n";
  const auto table = pals::parse_polynomial_table(text);
  CHECK(table[9][9] == 10.0);
  CHECK(table[0][0] == 1.0);
  CHECK_THROWS_AS(pals::parse_polynomial_table("1 2 3\n"), pals::ConfigError);
  CHECK_THROWS_AS(pals::parse_polynomial_table(text + "1 2 3 4 5 6 7 8 9 10\n"), pals::ConfigError);
}
