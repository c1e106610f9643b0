// Runs acceptance criteria and prints one pass/fail line per criterion.
// Usage: acceptance [--criterion N[,M...]] [--cli PATH] [--fast]
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "../tools/cli.hpp"
#include "oconnell/verify.hpp"

int main(int argc, char** argv) {
  std::vector<int> ids;
  std::string cli;
  oconnell::VerifyOptions opt;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      std::stringstream ss(argv[++i]);
      std::string item;
      while (std::getline(ss, item, ',')) ids.push_back(std::stoi(item));
    } else if (a == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (a == "--fast") {
      opt.fast = true;
    } else {
      std::cerr << "usage: acceptance [--criterion N[,M...]] [--cli PATH] [--fast]\n";
      return 2;
    }
  }
  if (ids.empty())
    for (const auto& c : oconnell::criteria()) ids.push_back(c.id);
  opt.simulate = cli.empty() ? oconnell::cli::in_process_runner() : oconnell::cli::subprocess_runner(cli);

  auto rep = oconnell::run_criteria(ids, opt, [](const oconnell::CriterionResult& r) {
    std::cout << oconnell::to_text(r) << std::flush;
  });
  int passed = 0;
  for (const auto& r : rep.criteria) passed += r.pass() ? 1 : 0;
  std::cout << passed << "/" << rep.criteria.size() << " criteria passed\n";
  return rep.pass() ? 0 : 1;
}
