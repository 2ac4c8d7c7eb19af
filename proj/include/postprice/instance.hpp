#pragma once

#include <vector>

namespace postprice {

// Request for r units of capacity valued at v in total.
struct Agent {
    double v = 0.0;
    double r = 0.0;
};

using ArrivalInstance = std::vector<Agent>;

// Multi-slot request; r[t] = 0 outside the active duration.
struct MultiAgent {
    double v = 0.0;
    std::vector<double> r;
};

using MultiSlotInstance = std::vector<MultiAgent>;

}  // namespace postprice
