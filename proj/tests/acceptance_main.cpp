#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "acceptance.hpp"

using namespace glassland::acceptance;

// Optional arguments select criterion ids; all twelve run by default.
int main(int argc, char** argv) {
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
  const auto results = run_suite(ids, [](const CriterionResult& r) { std::cout << format_line(r) << std::endl; });
  int passed = 0;
  for (const auto& r : results) passed += r.pass;
  std::cout << passed << "/" << results.size() << " criteria passed";
  for (const auto& r : results)
    if (!r.pass && r.known_unattainable) std::cout << "; criterion " << r.id << " is a documented known failure";
  std::cout << std::endl;
  return suite_exit_code(results);
}
