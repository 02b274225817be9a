// Acceptance suite: one PASS/FAIL line per criterion.
#include <iostream>

#include "loqc/acceptance.hpp"

int main() {
  const auto report = loqc::acceptance::run_all();
  std::cout << report.render();
  return report.passed() ? 0 : 1;
}
