#include "coldprof/detector.hpp"

#include <algorithm>

#include "coldprof/errors.hpp"

namespace coldprof {

std::string_view to_string(Category category) {
    switch (category) {
        case Category::kUnused: return "C1_UNUSED";
        case Category::kRarelyUsed: return "C2_RARELY_USED";
        case Category::kReview: return "C_REVIEW";
    }
    return "C_REVIEW";
}

Category parse_category(std::string_view text) {
    if (text == "C1_UNUSED") return Category::kUnused;
    if (text == "C2_RARELY_USED") return Category::kRarelyUsed;
    if (text == "C_REVIEW") return Category::kReview;
    throw SchemaError("category", "unknown category \"" + std::string(text) + "\"");
}

int severity(Category category) { return static_cast<int>(category); }

void DetectorConfig::validate() const {
    if (!(overhead_floor > 0.0 && overhead_floor < 1.0)) throw Error("overhead floor must lie in (0, 1)");
    if (!(rare_utilization > 0.0 && rare_utilization < 1.0)) throw Error("rare utilization must lie in (0, 1)");
    if (min_samples < 0) throw Error("min_samples must be non-negative");
    if (top_k_paths < 1) throw Error("top_k must be at least 1");
    if (!(z > 0.0)) throw Error("z must be positive");
}

namespace {

class Descent {
  public:
    Descent(const ModuleTree& tree, const CallingContextTree& cct, const DetectorConfig& cfg)
        : tree_(tree), cct_(cct), cfg_(cfg), total_(total_initialization(tree)), n_(cct.samples(cfg.filter)) {}

    double share(const std::string& path) const { return total_ > 0.0 ? package_time(tree_, path) / total_ : 0.0; }

    void visit(const std::string& path, std::vector<Finding>& out) const {
        Finding self = classify(path);
        if (self.category != Category::kReview) {
            out.push_back(std::move(self));
            return;
        }
        const std::size_t before = out.size();
        double covered = 0.0;
        for (const auto& child : tree_.at(path).children) {
            const double s = share(child);
            if (s < cfg_.overhead_floor) continue;
            covered += s;
            visit(child, out);
        }
        if (out.size() == before || self.overhead_share - covered >= cfg_.overhead_floor) {
            out.push_back(std::move(self));
        }
    }

  private:
    Finding classify(const std::string& path) const {
        Finding f;
        f.subject = path;
        f.file_path = tree_.at(path).file_path;
        f.overhead_share = share(path);
        f.sample_count = cct_.samples_in(path, cfg_.filter);
        f.utilization = n_ > 0 ? static_cast<double>(f.sample_count) / static_cast<double>(n_) : 0.0;
        if (n_ > 0) {
            const Interval ci = confidence_interval(f.utilization, n_, cfg_.z);
            f.ci_low = ci.low;
            f.ci_high = ci.high;
        }
        if (f.sample_count == 0) {
            f.category = Category::kUnused;
        } else if (f.ci_high < cfg_.rare_utilization) {
            f.category = Category::kRarelyUsed;
        } else {
            f.category = Category::kReview;
        }
        const bool library_level = path.find('.') == std::string::npos;
        f.evidence_paths = cct_.paths_to(path, cfg_.top_k_paths, library_level);
        for (const auto& p : f.evidence_paths) {
            if (p.path.frames.size() < 2) continue;
            const Frame& site = p.path.frames[p.path.frames.size() - 2];
            if (std::find(f.import_sites.begin(), f.import_sites.end(), site) == f.import_sites.end()) {
                f.import_sites.push_back(site);
            }
        }
        return f;
    }

    const ModuleTree& tree_;
    const CallingContextTree& cct_;
    const DetectorConfig& cfg_;
    double total_;
    std::int64_t n_;
};

}  // namespace

std::vector<Finding> drill_down(const ModuleTree& tree, const CallingContextTree& cct, std::string_view library,
                                const DetectorConfig& cfg) {
    cfg.validate();
    const std::string lib(library);
    if (is_reserved_label(lib) || lib.find('.') != std::string::npos || !tree.contains(lib)) {
        throw LookupError("no library \"" + lib + "\" in the module tree");
    }
    std::vector<Finding> out;
    Descent(tree, cct, cfg).visit(lib, out);
    return out;
}

std::vector<Finding> detect(std::span<const LibraryStats> stats, const ModuleTree& tree,
                            const CallingContextTree& cct, const DetectorConfig& cfg) {
    cfg.validate();
    const std::int64_t n = cct.samples(cfg.filter);
    if (n < cfg.min_samples) {
        throw InsufficientDataError("only " + std::to_string(n) + " samples; detection needs min_samples = " +
                                    std::to_string(cfg.min_samples));
    }
    std::vector<Finding> out;
    for (const auto& row : stats) {
        if (is_reserved_label(row.library) || !tree.contains(row.library)) continue;
        if (row.init_overhead_share < cfg.overhead_floor) continue;
        auto found = drill_down(tree, cct, row.library, cfg);
        out.insert(out.end(), std::make_move_iterator(found.begin()), std::make_move_iterator(found.end()));
    }
    return rank(std::move(out));
}

std::vector<Finding> rank(std::vector<Finding> findings) {
    std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        if (a.overhead_share != b.overhead_share) return a.overhead_share > b.overhead_share;
        if (a.category != b.category) return severity(a.category) < severity(b.category);
        return a.subject < b.subject;
    });
    for (std::size_t i = 0; i < findings.size(); ++i) findings[i].rank = static_cast<int>(i + 1);
    return findings;
}

}  // namespace coldprof
