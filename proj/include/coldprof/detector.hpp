#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "coldprof/cct.hpp"
#include "coldprof/metrics.hpp"
#include "coldprof/package_mapper.hpp"

namespace coldprof {

enum class Category {
    kUnused,      // C1: significant initialization, no samples at all
    kRarelyUsed,  // C2: significant initialization, utilization CI entirely below the rare threshold
    kReview,      // significant initialization and used; misuse/avoidable usage needs a human
};

std::string_view to_string(Category category);
Category parse_category(std::string_view text);
/// Lower is more severe.
int severity(Category category);

struct DetectorConfig {
    double overhead_floor = 0.05;
    double rare_utilization = 0.01;
    std::int64_t min_samples = 1000;
    std::size_t top_k_paths = 3;
    double z = kDefaultZ;
    PhaseFilter filter = PhaseFilter::kExecOnly;

    /// Throws Error when a field is out of range.
    void validate() const;
};

struct Finding {
    Category category = Category::kReview;
    std::string subject;  // dotted library or package path
    std::string file_path;
    double overhead_share = 0.0;
    std::int64_t sample_count = 0;
    double utilization = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::vector<PathCount> evidence_paths;  // root -> first frame inside the subject
    std::vector<Frame> import_sites;        // the frame just before the subject is entered
    int rank = 0;

    bool operator==(const Finding&) const = default;
};

/// Hierarchical descent through one library. C1/C2 subtrees are reported at
/// their top node. A used node is reported (as kReview) when none of its
/// children clear the overhead floor, or when what remains after its
/// qualifying children still clears it. Throws LookupError for unknown libraries.
std::vector<Finding> drill_down(const ModuleTree& tree, const CallingContextTree& cct, std::string_view library,
                                const DetectorConfig& cfg);

/// Runs drill_down over every library whose share clears the overhead floor,
/// then ranks. Throws InsufficientDataError below cfg.min_samples.
std::vector<Finding> detect(std::span<const LibraryStats> stats, const ModuleTree& tree,
                            const CallingContextTree& cct, const DetectorConfig& cfg);

/// Overhead share descending, then severity, then subject; ranks 1..n.
std::vector<Finding> rank(std::vector<Finding> findings);

}  // namespace coldprof
