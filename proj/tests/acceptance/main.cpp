#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "suite.hpp"

// Usage: sel_acceptance [criterion ids...]
int main(int argc, char** argv) {
    std::vector<int> ids;
    for (int i = 1; i < argc; ++i) ids.push_back(std::atoi(argv[i]));
    const auto results = acceptance::run(ids);
    int failed = 0;
    for (const auto& o : results) {
        std::cout << acceptance::summary_line(o) << '\n';
        for (const auto& l : o.lines) std::cout << "      " << l << '\n';
        if (!o.pass) ++failed;
    }
    std::cout << results.size() - failed << "/" << results.size() << " criteria pass\n";
    return failed == 0 ? 0 : 1;
}
