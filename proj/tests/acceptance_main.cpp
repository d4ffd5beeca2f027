// Acceptance battery runner: one PASS/FAIL line per criterion, nonzero exit
// on any failure.
#include <cstring>
#include <iostream>

#include "trilab/acceptance.hpp"

int main(int argc, char** argv) {
    auto profile = trilab::accept::Profile::quick;
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--full") == 0) profile = trilab::accept::Profile::full;
        if (std::strncmp(argv[i], "--only=", 7) == 0) only = std::atoi(argv[i] + 7);
    }
    auto results = trilab::accept::run_acceptance(profile, std::cout, only);
    int fails = 0;
    for (const auto& r : results)
        if (!r.pass) ++fails;
    return fails;
}
