#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "kmsgraph/graph.hpp"

namespace kmsgraph {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    double seconds = 0.0;
    double budget = 0.0;
    std::string detail;
};

// Runs the acceptance criteria (all when `only` is empty), printing one
// PASS/FAIL line per criterion.
std::vector<CriterionResult> run_acceptance(std::ostream& out, const std::vector<int>& only = {}, unsigned seed = 12345);

// Pascal grid with unit potentials: alpha^{x-1} (1-alpha)^{y-1} e^{beta(x+y-2)}.
std::vector<double> pascal_alpha_vector(const Digraph& g, double alpha, double beta);
// C(n+m-x-y, n-x) e^{-beta(n+m-x-y)} for unit potentials.
double pascal_green_closed_form(long x, long y, long n, long m, double beta);

}  // namespace kmsgraph
