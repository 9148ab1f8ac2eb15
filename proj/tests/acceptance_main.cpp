#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#include "horseshoe/acceptance.hpp"

// Runs acceptance criteria 1..10 (or those named on the command line) and
// prints one PASS/FAIL line each. Exit status is nonzero on any failure.
int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    hs::RunConfig cfg;
    int failed = 0;
    for (const auto& r : hs::run_acceptance(cfg, ids)) {
        std::printf("[%s] criterion %d: %s (%.2f s)\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(), r.seconds);
        std::printf("       %s\n", r.measured.dump().c_str());
        if (!r.error.empty()) std::printf("       error: %s\n", r.error.c_str());
        failed += !r.pass;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
