#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kmsgraph {

struct VerbInfo {
    std::string verb;
    std::string module;
    std::vector<std::string> operations;  // library operations the verb exposes
    std::string summary;
};

const std::vector<VerbInfo>& verb_table();

// Exit codes: 0 success, 1 internal failure or failed example check,
// 2 usage, schema or precondition failure, 3 undetermined (verdicts only with --strict).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kmsgraph
