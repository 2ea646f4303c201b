// Runs every acceptance criterion and prints one line per criterion.
// Exit status is nonzero when any criterion fails.

#include <cstdio>
#include <iostream>

#include "sphdist/verify.hpp"

int main() {
    const auto rows = sphdist::verify::run_all({});
    int failed = 0;
    for (const auto& r : rows) {
        std::printf("criterion %2d: %s  computed=%.12g  paper=%s  tol=%s  (%.2fs / %.0fs)\n", r.id,
                    r.passed ? "PASS" : "FAIL", r.computed, r.paper_value.c_str(), r.tolerance.c_str(), r.seconds,
                    r.budget_seconds);
        std::printf("              %s\n", r.detail.c_str());
        failed += r.passed ? 0 : 1;
    }
    std::printf("%zu criteria, %d failed\n", rows.size(), failed);
    return failed == 0 ? 0 : 1;
}
