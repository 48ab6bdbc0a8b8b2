// Fast end-to-end oracle suite behind `csmlab selftest`.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace csmlab {

struct SelftestCase {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Runs every check, printing one line per check to `log`.
std::vector<SelftestCase> run_selftest(std::ostream& log);

}  // namespace csmlab
