#include "coldprof/report.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "coldprof/errors.hpp"

namespace coldprof {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return buf;
}

std::string pct(double fraction) { return fixed(fraction * 100.0, 2); }

std::string pad_right(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string pad_left(const std::string& s, std::size_t width) {
    return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::string library_of(const std::string& subject) { return subject.substr(0, subject.find('.')); }

std::string frame_label(const Frame& frame, const RootConfig& roots) {
    return display_path(frame.file_path, roots) + ":" + std::to_string(frame.line);
}

struct Parsed {
    std::optional<InvocationTrace> trace;
    std::string error;
};

std::vector<Parsed> parse_all(const std::vector<std::filesystem::path>& files, std::size_t max_depth) {
    std::vector<Parsed> out(files.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < files.size(); i = next++) {
            try {
                out[i].trace = read_trace_file(files[i], max_depth);
            } catch (const std::exception& e) {
                out[i].error = e.what();
            }
        }
    };
    const std::size_t n_threads =
        std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), files.size() / 16 + 1));
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(work);
    work();
    return out;
}

// -- JSON helpers -----------------------------------------------------------

ordered_json frame_json(const Frame& f) { return ordered_json{{"file", f.file_path}, {"line", f.line}, {"fn", f.function_name}}; }

Frame frame_from(const json& j) {
    return Frame{j.at("file").get<std::string>(), j.at("line").get<std::int64_t>(), j.at("fn").get<std::string>()};
}

ordered_json path_json(const CallPath& p) {
    auto arr = ordered_json::array();
    for (const auto& f : p.frames) arr.push_back(frame_json(f));
    return arr;
}

CallPath path_from(const json& j) {
    CallPath p;
    for (const auto& f : j) p.frames.push_back(frame_from(f));
    return p;
}

ordered_json meta_json(const InvocationMeta& m) {
    ordered_json j;
    j["inv"] = m.invocation_id;
    j["app"] = m.app_id;
    j["manifest"] = m.code_manifest_hash;
    j["period_us"] = m.sample_period_us;
    j["init_end_us"] = m.init_end_us;
    j["exec_end_us"] = m.exec_end_us;
    j["agent"] = m.agent_version;
    j["dropped"] = m.dropped_samples;
    j["warnings"] = m.warnings;
    return j;
}

InvocationMeta meta_from(const json& j) {
    InvocationMeta m;
    m.invocation_id = j.at("inv").get<std::string>();
    m.app_id = j.at("app").get<std::string>();
    m.code_manifest_hash = j.at("manifest").get<std::string>();
    m.sample_period_us = j.at("period_us").get<std::int64_t>();
    m.init_end_us = j.at("init_end_us").get<std::int64_t>();
    m.exec_end_us = j.at("exec_end_us").get<std::int64_t>();
    m.agent_version = j.at("agent").get<std::string>();
    m.dropped_samples = j.at("dropped").get<std::int64_t>();
    m.warnings = j.at("warnings").get<std::vector<std::string>>();
    return m;
}

std::string_view filter_name(PhaseFilter f) { return f == PhaseFilter::kExecOnly ? "exec" : "all"; }

PhaseFilter parse_filter(const std::string& s) {
    if (s == "exec") return PhaseFilter::kExecOnly;
    if (s == "all") return PhaseFilter::kAll;
    throw SchemaError("phase_filter", "expected exec|all");
}

}  // namespace

bool ProfileBundle::operator==(const ProfileBundle& other) const {
    return app_id == other.app_id && manifest_hash == other.manifest_hash &&
           invocation_count == other.invocation_count && roots == other.roots && filter == other.filter &&
           z == other.z && invocations == other.invocations && module_tree == other.module_tree &&
           cct.app_id() == other.cct.app_id() && cct.manifest_hash() == other.cct.manifest_hash() &&
           cct.canonical_dump() == other.cct.canonical_dump() && stats == other.stats &&
           findings == other.findings && gate == other.gate && skipped == other.skipped;
}

std::vector<std::filesystem::path> list_trace_files(const std::filesystem::path& dir) {
    std::error_code ec;
    if (!std::filesystem::is_directory(dir, ec)) throw IoError(dir.string() + ": not a directory");
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".trace") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

ProfileBundle ingest(const std::filesystem::path& dir, const IngestOptions& options) {
    const auto files = list_trace_files(dir);
    if (files.empty()) throw IoError(dir.string() + ": no .trace files");

    auto parsed = parse_all(files, options.max_depth);
    ProfileBundle bundle;
    std::vector<InvocationTrace> traces;
    traces.reserve(parsed.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        if (parsed[i].trace) {
            traces.push_back(std::move(*parsed[i].trace));
            continue;
        }
        if (!options.lenient) throw Error(parsed[i].error);
        bundle.skipped.push_back(SkippedFile{files[i].filename().string(), parsed[i].error});
    }
    if (traces.empty()) throw Error(dir.string() + ": no valid trace files");

    std::sort(traces.begin(), traces.end(),
              [](const InvocationTrace& a, const InvocationTrace& b) { return a.meta.invocation_id < b.meta.invocation_id; });
    for (std::size_t i = 1; i < traces.size(); ++i) {
        if (traces[i].meta.invocation_id == traces[i - 1].meta.invocation_id) {
            throw IntegrityError("duplicate invocation id " + traces[i].meta.invocation_id);
        }
    }
    const std::string& manifest = traces.front().meta.code_manifest_hash;
    for (const auto& t : traces) {
        if (t.meta.code_manifest_hash != manifest) {
            throw MergeError("mixed code manifests in " + dir.string() + ": " + manifest + " and " +
                             t.meta.code_manifest_hash + " (invocation " + t.meta.invocation_id + ")");
        }
    }

    bundle.app_id = traces.front().meta.app_id;
    bundle.manifest_hash = manifest;
    bundle.invocation_count = static_cast<std::int64_t>(traces.size());
    bundle.roots = options.roots.roots.empty() ? infer_roots(traces) : options.roots;
    bundle.filter = options.filter;
    bundle.z = options.z;
    for (const auto& t : traces) bundle.invocations.push_back(t.meta);

    bundle.module_tree = build_module_tree(traces, bundle.roots);
    bundle.cct = CallingContextTree(bundle.app_id, manifest);
    for (const auto& t : traces) bundle.cct.insert_trace(t);
    bundle.cct.annotate_libraries(bundle.roots);

    if (bundle.cct.samples(options.filter) > 0) {
        bundle.stats = library_stats(bundle.module_tree, bundle.cct, options.z, options.filter);
    }
    bundle.gate = init_ratio(bundle.invocations, bundle.module_tree, options.threshold_ratio);
    return bundle;
}

void analyze(ProfileBundle& bundle, const DetectorConfig& cfg) {
    bundle.findings = detect(bundle.stats, bundle.module_tree, bundle.cct, cfg);
}

std::vector<std::string> render_call_path(const CallPath& path, const std::string& subject, const RootConfig& roots) {
    std::size_t n = path.frames.size();
    if (subject.find('.') == std::string::npos && n > 1) --n;  // library: stop at the import site
    std::vector<std::string> lines;
    for (std::size_t i = 0; i < n; ++i) {
        const std::string label = frame_label(path.frames[i], roots);
        lines.push_back(i == 0 ? label : std::string(2 * i, ' ') + "-> " + label);
    }
    return lines;
}

std::string render_text(const ProfileBundle& bundle, const ReportOptions& options) {
    std::ostringstream out;
    out << "coldprof Summary\n";
    out << "Application: " << bundle.app_id << "\n";
    out << "Invocations: " << bundle.invocation_count << "  Samples: " << bundle.cct.exec_samples() << " EXEC / "
        << bundle.cct.init_samples() << " INIT\n";
    out << "Init/exec ratio: " << fixed(bundle.gate.ratio, 4) << " (T = " << fixed(bundle.gate.threshold, 2) << ", "
        << (bundle.gate.profile_worthy ? "profile-worthy" : "insignificant impact on the cold start") << ")\n";
    for (const auto& s : bundle.skipped) out << "Skipped: " << s.file << ": " << s.error << "\n";
    out << "\n";

    if (bundle.findings.empty()) {
        out << "no inefficiencies above thresholds\n";
        return out.str();
    }

    struct Row {
        std::string marker, name, util, overhead, category, file;
    };
    std::map<std::string, const LibraryStats*> stats_by_lib;
    for (const auto& s : bundle.stats) stats_by_lib[s.library] = &s;

    // Group findings under their library, groups in order of their best rank.
    std::vector<std::string> group_order;
    std::map<std::string, std::vector<const Finding*>> groups;
    for (const auto& f : bundle.findings) {
        const std::string lib = library_of(f.subject);
        if (!groups.contains(lib)) group_order.push_back(lib);
        groups[lib].push_back(&f);
    }

    auto file_of = [&](const std::string& file) { return file.empty() ? std::string("-") : display_path(file, bundle.roots); };
    std::vector<Row> rows;
    for (const auto& lib : group_order) {
        const auto& members = groups[lib];
        const Finding* lib_finding = nullptr;
        std::vector<const Finding*> packages;
        for (const auto* f : members) {
            if (f->subject == lib) {
                lib_finding = f;
            } else {
                packages.push_back(f);
            }
        }
        const std::string marker = packages.empty() ? "+" : "-";
        if (lib_finding) {
            rows.push_back({marker, lib, pct(lib_finding->utilization), pct(lib_finding->overhead_share),
                            std::string(to_string(lib_finding->category)), file_of(lib_finding->file_path)});
        } else if (auto it = stats_by_lib.find(lib); it != stats_by_lib.end()) {
            const auto& s = *it->second;
            rows.push_back({marker, lib, pct(s.utilization), pct(s.init_overhead_share), "", file_of(s.file_path)});
        } else {
            rows.push_back({marker, lib, "-", "-", "", "-"});
        }
        for (const auto* f : packages) {
            rows.push_back({"+", "  " + f->subject, pct(f->utilization), pct(f->overhead_share),
                            std::string(to_string(f->category)), file_of(f->file_path)});
        }
    }

    std::size_t w_name = std::string("Package").size();
    std::size_t w_cat = std::string("Category").size();
    for (const auto& r : rows) {
        w_name = std::max(w_name, r.name.size());
        w_cat = std::max(w_cat, r.category.size());
    }
    const std::size_t w_util = 6;
    const std::size_t w_over = std::string("Init. Overhead").size();
    out << "   " << pad_right("Package", w_name) << "  " << pad_left("Util.", w_util) << "  "
        << pad_left("Init. Overhead", w_over) << "  " << pad_right("Category", w_cat) << "  File\n";
    for (const auto& r : rows) {
        out << r.marker << "  " << pad_right(r.name, w_name) << "  " << pad_left(r.util, w_util) << "  "
            << pad_left(r.overhead, w_over) << "  " << pad_right(r.category, w_cat) << "  " << r.file << "\n";
    }

    out << "\nCall Path\n";
    for (const auto& f : bundle.findings) {
        out << "[" << f.rank << "] " << f.subject << "  " << to_string(f.category) << "  util " << pct(f.utilization)
            << "% (CI " << pct(f.ci_low) << "-" << pct(f.ci_high) << ", " << f.sample_count << " of "
            << bundle.cct.samples(bundle.filter) << " samples)  init overhead " << pct(f.overhead_share) << "%\n";
        if (!f.import_sites.empty()) {
            out << "    entered from:";
            for (const auto& site : f.import_sites) out << " " << frame_label(site, bundle.roots);
            out << "\n";
        }
        const std::size_t k = std::min(options.top_k, f.evidence_paths.size());
        for (std::size_t i = 0; i < k; ++i) {
            const auto& ev = f.evidence_paths[i];
            out << "    path " << (i + 1) << " (" << ev.count << " samples)\n";
            for (const auto& line : render_call_path(ev.path, f.subject, bundle.roots)) out << "      " << line << "\n";
        }
        if (k == 0) out << "    (no sampled call path)\n";
    }
    return out.str();
}

// -- JSON ---------------------------------------------------------------------

ordered_json to_json(const ProfileBundle& b) {
    ordered_json j;
    j["app"] = b.app_id;
    j["manifest"] = b.manifest_hash;
    j["invocation_count"] = b.invocation_count;
    j["phase_filter"] = std::string(filter_name(b.filter));
    j["z"] = b.z;
    auto roots = ordered_json::array();
    for (const auto& r : b.roots.roots) roots.push_back(ordered_json{{"path", r.path}, {"kind", std::string(to_string(r.kind))}});
    j["roots"] = roots;
    j["gate"] = ordered_json{{"ratio", b.gate.ratio},
                             {"threshold", b.gate.threshold},
                             {"profile_worthy", b.gate.profile_worthy},
                             {"mean_init_us", b.gate.mean_init_us},
                             {"mean_exec_us", b.gate.mean_exec_us}};

    auto invocations = ordered_json::array();
    for (const auto& m : b.invocations) invocations.push_back(meta_json(m));
    j["invocations"] = invocations;

    auto nodes = ordered_json::array();
    for (const auto& [path, n] : b.module_tree.nodes()) {
        ordered_json node;
        node["path"] = n.path;
        node["file"] = n.file_path;
        node["kind"] = std::string(to_string(n.kind));
        node["self_sum_us"] = n.self_sum_us;
        node["cum_sum_us"] = n.cumulative_sum_us;
        node["import_count"] = n.import_count;
        node["t_self_us"] = n.t_self_us();
        node["subtree_us"] = n.subtree_us;
        nodes.push_back(std::move(node));
    }
    j["module_tree"] = ordered_json{{"invocation_count", b.module_tree.invocation_count()}, {"nodes", nodes}};

    auto cct_nodes = ordered_json::array();
    for (NodeId id = 1; id < b.cct.size(); ++id) {
        const auto& n = b.cct.node(id);
        ordered_json node;
        node["id"] = id;
        node["parent"] = n.parent;
        node["file"] = n.frame.file_path;
        node["line"] = n.frame.line;
        node["fn"] = n.frame.function_name;
        node["module"] = n.module_dotted;
        node["library"] = n.module.library;
        node["init"] = n.init_count;
        node["exec"] = n.exec_count;
        cct_nodes.push_back(std::move(node));
    }
    j["cct"] = ordered_json{{"app", b.cct.app_id()},
                            {"manifest", b.cct.manifest_hash()},
                            {"total_samples", b.cct.total_samples()},
                            {"init_samples", b.cct.init_samples()},
                            {"exec_samples", b.cct.exec_samples()},
                            {"nodes", cct_nodes}};

    auto stats = ordered_json::array();
    for (const auto& s : b.stats) {
        ordered_json row;
        row["library"] = s.library;
        row["file"] = s.file_path;
        row["init_time_us"] = s.init_time_us;
        row["init_overhead_share"] = s.init_overhead_share;
        row["sample_count"] = s.sample_count;
        row["utilization"] = s.utilization;
        row["ci_low"] = s.ci_low;
        row["ci_high"] = s.ci_high;
        row["invocations_observed"] = s.invocations_observed;
        stats.push_back(std::move(row));
    }
    j["stats"] = stats;

    auto findings = ordered_json::array();
    for (const auto& f : b.findings) {
        ordered_json row;
        row["rank"] = f.rank;
        row["category"] = std::string(to_string(f.category));
        row["subject"] = f.subject;
        row["file"] = f.file_path;
        row["overhead_share"] = f.overhead_share;
        row["sample_count"] = f.sample_count;
        row["utilization"] = f.utilization;
        row["ci_low"] = f.ci_low;
        row["ci_high"] = f.ci_high;
        auto evidence = ordered_json::array();
        for (const auto& p : f.evidence_paths) evidence.push_back(ordered_json{{"count", p.count}, {"path", path_json(p.path)}});
        row["evidence_paths"] = evidence;
        auto sites = ordered_json::array();
        for (const auto& s : f.import_sites) sites.push_back(frame_json(s));
        row["import_sites"] = sites;
        findings.push_back(std::move(row));
    }
    j["findings"] = findings;

    auto skipped = ordered_json::array();
    for (const auto& s : b.skipped) skipped.push_back(ordered_json{{"file", s.file}, {"error", s.error}});
    j["skipped"] = skipped;
    return j;
}

ProfileBundle bundle_from_json(const json& j) {
    ProfileBundle b;
    try {
        b.app_id = j.at("app").get<std::string>();
        b.manifest_hash = j.at("manifest").get<std::string>();
        b.invocation_count = j.at("invocation_count").get<std::int64_t>();
        b.filter = parse_filter(j.at("phase_filter").get<std::string>());
        b.z = j.at("z").get<double>();
        for (const auto& r : j.at("roots")) {
            b.roots.roots.push_back(SourceRoot{r.at("path").get<std::string>(), parse_module_kind(r.at("kind").get<std::string>())});
        }
        const auto& g = j.at("gate");
        b.gate.ratio = g.at("ratio").get<double>();
        b.gate.threshold = g.at("threshold").get<double>();
        b.gate.profile_worthy = g.at("profile_worthy").get<bool>();
        b.gate.mean_init_us = g.at("mean_init_us").get<double>();
        b.gate.mean_exec_us = g.at("mean_exec_us").get<double>();
        for (const auto& m : j.at("invocations")) b.invocations.push_back(meta_from(m));

        const auto& mt = j.at("module_tree");
        for (const auto& n : mt.at("nodes")) {
            b.module_tree.put_node(n.at("path").get<std::string>(), parse_module_kind(n.at("kind").get<std::string>()),
                                   n.at("file").get<std::string>(), n.at("self_sum_us").get<std::int64_t>(),
                                   n.at("cum_sum_us").get<std::int64_t>(), n.at("import_count").get<std::int64_t>());
        }
        b.module_tree.set_invocation_count(mt.at("invocation_count").get<std::int64_t>());

        const auto& c = j.at("cct");
        b.cct = CallingContextTree(c.at("app").get<std::string>(), c.at("manifest").get<std::string>());
        std::map<std::int64_t, NodeId> ids{{0, CallingContextTree::kRoot}};
        for (const auto& n : c.at("nodes")) {
            const auto parent = ids.at(n.at("parent").get<std::int64_t>());
            const NodeId id = b.cct.child(parent, Frame{n.at("file").get<std::string>(), n.at("line").get<std::int64_t>(),
                                                        n.at("fn").get<std::string>()});
            ids[n.at("id").get<std::int64_t>()] = id;
            b.cct.set_counts(id, n.at("init").get<std::int64_t>(), n.at("exec").get<std::int64_t>());
        }
        b.cct.annotate_libraries(b.roots);

        for (const auto& s : j.at("stats")) {
            LibraryStats row;
            row.library = s.at("library").get<std::string>();
            row.file_path = s.at("file").get<std::string>();
            row.init_time_us = s.at("init_time_us").get<double>();
            row.init_overhead_share = s.at("init_overhead_share").get<double>();
            row.sample_count = s.at("sample_count").get<std::int64_t>();
            row.utilization = s.at("utilization").get<double>();
            row.ci_low = s.at("ci_low").get<double>();
            row.ci_high = s.at("ci_high").get<double>();
            row.invocations_observed = s.at("invocations_observed").get<std::int64_t>();
            b.stats.push_back(std::move(row));
        }
        for (const auto& f : j.at("findings")) {
            Finding row;
            row.rank = f.at("rank").get<int>();
            row.category = parse_category(f.at("category").get<std::string>());
            row.subject = f.at("subject").get<std::string>();
            row.file_path = f.at("file").get<std::string>();
            row.overhead_share = f.at("overhead_share").get<double>();
            row.sample_count = f.at("sample_count").get<std::int64_t>();
            row.utilization = f.at("utilization").get<double>();
            row.ci_low = f.at("ci_low").get<double>();
            row.ci_high = f.at("ci_high").get<double>();
            for (const auto& p : f.at("evidence_paths")) {
                row.evidence_paths.push_back(PathCount{path_from(p.at("path")), p.at("count").get<std::int64_t>()});
            }
            for (const auto& s : f.at("import_sites")) row.import_sites.push_back(frame_from(s));
            b.findings.push_back(std::move(row));
        }
        for (const auto& s : j.at("skipped")) {
            b.skipped.push_back(SkippedFile{s.at("file").get<std::string>(), s.at("error").get<std::string>()});
        }
    } catch (const json::exception& e) {
        throw SchemaError("bundle", e.what());
    }
    return b;
}

// -- Latency diff ---------------------------------------------------------------

double nearest_rank_percentile(std::vector<double> values, double q) {
    if (values.empty()) throw InsufficientDataError("percentile of an empty set");
    std::sort(values.begin(), values.end());
    const auto n = static_cast<double>(values.size());
    auto k = static_cast<std::size_t>(std::ceil(q * n));
    k = std::clamp<std::size_t>(k, 1, values.size());
    return values[k - 1];
}

LatencySummary summarize_latency(const std::vector<InvocationMeta>& invocations) {
    if (invocations.empty()) throw InsufficientDataError("no invocations");
    std::vector<double> init, exec;
    for (const auto& m : invocations) {
        init.push_back(static_cast<double>(m.init_end_us));
        exec.push_back(static_cast<double>(m.exec_duration_us()));
    }
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    LatencySummary out;
    out.mean_init_us = mean(init);
    out.p99_init_us = nearest_rank_percentile(init, 0.99);
    out.mean_exec_us = mean(exec);
    out.p99_exec_us = nearest_rank_percentile(exec, 0.99);
    return out;
}

DiffResult diff(const std::vector<InvocationMeta>& before, const std::vector<InvocationMeta>& after) {
    DiffResult d;
    d.before = summarize_latency(before);
    d.after = summarize_latency(after);
    auto ratio = [](double b, double a) { return a > 0.0 ? b / a : 0.0; };
    d.mean_init_speedup = ratio(d.before.mean_init_us, d.after.mean_init_us);
    d.p99_init_speedup = ratio(d.before.p99_init_us, d.after.p99_init_us);
    d.mean_exec_speedup = ratio(d.before.mean_exec_us, d.after.mean_exec_us);
    d.p99_exec_speedup = ratio(d.before.p99_exec_us, d.after.p99_exec_us);
    return d;
}

std::string format_speedup(double ratio) { return fixed(ratio, 2) + "×"; }

std::string render_diff(const DiffResult& d) {
    std::ostringstream out;
    auto ms = [](double us) { return fixed(us / 1000.0, 2); };
    out << pad_right("Phase", 16) << pad_right("Metric", 18) << pad_left("Before (ms)", 12) << pad_left("After (ms)", 12)
        << "  Speedup (times)\n";
    auto row = [&](const char* phase, const char* metric, double b, double a, double s) {
        out << pad_right(phase, 16) << pad_right(metric, 18) << pad_left(ms(b), 12) << pad_left(ms(a), 12) << "  "
            << format_speedup(s) << "\n";
    };
    row("Initialization", "mean", d.before.mean_init_us, d.after.mean_init_us, d.mean_init_speedup);
    row("Initialization", "99th percentile", d.before.p99_init_us, d.after.p99_init_us, d.p99_init_speedup);
    row("Execution", "mean", d.before.mean_exec_us, d.after.mean_exec_us, d.mean_exec_speedup);
    row("Execution", "99th percentile", d.before.p99_exec_us, d.after.p99_exec_us, d.p99_exec_speedup);
    return out.str();
}

// -- Config -------------------------------------------------------------------

AnalyzerConfig parse_config(const json& doc) {
    AnalyzerConfig cfg;
    try {
        if (doc.contains("roots")) {
            for (const auto& r : doc.at("roots")) {
                cfg.roots.roots.push_back(
                    SourceRoot{r.at("path").get<std::string>(), parse_module_kind(r.at("kind").get<std::string>())});
            }
        }
        if (doc.contains("threshold_ratio")) cfg.threshold_ratio = doc.at("threshold_ratio").get<double>();
        if (doc.contains("overhead_pct")) cfg.overhead_pct = doc.at("overhead_pct").get<double>();
        if (doc.contains("rare_util_pct")) cfg.rare_util_pct = doc.at("rare_util_pct").get<double>();
        if (doc.contains("min_samples")) cfg.min_samples = doc.at("min_samples").get<std::int64_t>();
        if (doc.contains("top_k")) cfg.top_k = doc.at("top_k").get<std::int64_t>();
        if (doc.contains("z")) cfg.z = doc.at("z").get<double>();
        if (doc.contains("all_phases")) cfg.all_phases = doc.at("all_phases").get<bool>();
    } catch (const json::exception& e) {
        throw SchemaError("config", e.what());
    }
    return cfg;
}

AnalyzerConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path.string() + ": cannot open config file");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte > 0 ? e.byte - 1 : 0, path.string());
    }
    return parse_config(doc);
}

}  // namespace coldprof
