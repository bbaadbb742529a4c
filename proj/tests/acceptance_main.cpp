// Prints one PASS/FAIL line per acceptance criterion. With arguments, runs only the named ids.
#include <cstdio>
#include <string>
#include <vector>

#include "mgof/acceptance.hpp"

int main(int argc, char** argv) {
  namespace acc = mgof::acceptance;
  std::vector<std::string> ids;
  for (int i = 1; i < argc; ++i) ids.emplace_back(argv[i]);
  if (ids.empty()) ids = acc::criterion_ids();

  bool all = true;
  for (const auto& id : ids) {
    const auto r = acc::run_criterion(id);
    std::printf("%s\n", acc::format_line(r).c_str());
    std::fflush(stdout);
    all = all && r.passed;
  }
  return all ? 0 : 1;
}
