#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coldprof/cct.hpp"
#include "coldprof/package_mapper.hpp"
#include "coldprof/trace_model.hpp"

namespace coldprof {

inline constexpr double kDefaultZ = 1.96;
inline constexpr double kDefaultGateThreshold = 0.10;

struct GateResult {
    double ratio = 0.0;
    double threshold = kDefaultGateThreshold;
    bool profile_worthy = false;
    double mean_init_us = 0.0;  // mean per-invocation library initialization
    double mean_exec_us = 0.0;  // mean per-invocation exec_end - init_end

    bool operator==(const GateResult&) const = default;
};

/// Screening ratio: mean library initialization per invocation over mean
/// execution duration. Throws InsufficientDataError on zero execution time.
GateResult init_ratio(std::span<const InvocationMeta> metas, const ModuleTree& tree,
                      double threshold = kDefaultGateThreshold);

struct Interval {
    double low = 0.0;
    double high = 0.0;

    bool operator==(const Interval&) const = default;
};

/// Normal-approximation interval p ± z·sqrt(p(1-p)/n), clamped to [0, 1].
Interval confidence_interval(double p_hat, std::int64_t n, double z = kDefaultZ);

/// Share of all samples whose innermost frame lies in `library` (a library
/// name, a dotted package prefix, or a reserved label). Throws
/// InsufficientDataError when the tree holds no samples of the chosen phase.
double utilization(const CallingContextTree& cct, std::string_view library,
                   PhaseFilter filter = PhaseFilter::kExecOnly);

struct LibraryStats {
    std::string library;
    std::string file_path;
    double init_time_us = 0.0;
    double init_overhead_share = 0.0;
    std::int64_t sample_count = 0;
    double utilization = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::int64_t invocations_observed = 0;

    bool operator==(const LibraryStats&) const = default;
};

/// One row per library seen in the module tree or the CCT, ordered by
/// init_overhead_share descending, then by name.
std::vector<LibraryStats> library_stats(const ModuleTree& tree, const CallingContextTree& cct,
                                        double z = kDefaultZ, PhaseFilter filter = PhaseFilter::kExecOnly);

}  // namespace coldprof
