#pragma once

// Monte-Carlo check of the sampling-accuracy argument: each synthetic library
// is hit by an independent Bernoulli(p) indicator on every sample, p̂ is the
// hit fraction over N samples, and the normal-approximation interval around p̂
// should cover p about 95% of the time at z = 1.96.
//
// The model assumes samples are IID across invocations; the simulator checks
// the statistics conditional on that assumption and nothing more.

#include <cstdint>
#include <vector>

namespace coldprof {

struct SimSpec {
    std::vector<double> p_true;
    std::int64_t n_samples = 10000;
    std::int64_t trials = 2000;
    double z = 1.96;
    std::uint64_t seed = 1;

    void validate() const;
};

struct SimLibraryResult {
    double p_true = 0.0;
    double coverage = 0.0;         // fraction of trials whose interval contains p_true
    double mean_p_hat = 0.0;
    double mean_abs_error = 0.0;   // mean |p̂ - p|
    double mean_width = 0.0;       // mean interval width (high - low)
};

struct SimReport {
    SimSpec spec;
    std::vector<SimLibraryResult> libraries;
};

/// Deterministic given spec.seed; trial t draws from a stream seeded by (seed, t).
SimReport simulate(const SimSpec& spec);

struct DetectabilityResult {
    double detected_fraction = 0.0;  // trials with at least one hit
    double expected = 0.0;           // 1 - (1 - p)^N
    double standard_error = 0.0;     // sqrt(expected (1 - expected) / trials)
};

DetectabilityResult check_rare_detectability(double p_rare, std::int64_t n, std::int64_t trials,
                                             std::uint64_t seed);

}  // namespace coldprof
