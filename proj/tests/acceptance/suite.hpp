#pragma once

#include <functional>
#include <string>
#include <vector>

namespace acceptance {

struct Outcome {
    int id = 0;
    std::string title;
    bool pass = false;
    std::vector<std::string> lines;  // measured values, one per check
    double seconds = 0.0;
};

struct Criterion {
    int id;
    std::string title;
    std::function<Outcome()> run;
};

const std::vector<Criterion>& criteria();

// Runs the selected criteria (all when ids is empty) with up to jobs of them
// in flight; results come back ordered by id.
std::vector<Outcome> run(const std::vector<int>& ids = {}, int jobs = 1);

std::string summary_line(const Outcome& o);

}  // namespace acceptance
