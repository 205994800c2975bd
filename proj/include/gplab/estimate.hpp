#pragma once

namespace gplab {

// A Monte Carlo scalar estimate.
struct MCEstimate {
    double value = 0.0;
    double std_error = 0.0;
    long long n_samples = 0;
};

}  // namespace gplab
