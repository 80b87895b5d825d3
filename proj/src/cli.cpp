#include "coldprof/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "coldprof/accuracy_sim.hpp"
#include "coldprof/errors.hpp"
#include "coldprof/report.hpp"

namespace coldprof {

namespace {

struct CommonFlags {
    std::string traces;
    std::string roots_file;
    double threshold_ratio = kDefaultGateThreshold;
    double overhead_pct = 5.0;
    double rare_util_pct = 1.0;
    std::int64_t min_samples = 1000;
    std::int64_t top_k = 3;
    double z = kDefaultZ;
    bool all_phases = false;
    std::string format = "text";
    bool lenient = false;
};

struct Settings {
    IngestOptions ingest;
    DetectorConfig detector;
    std::size_t top_k = 3;
};

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') return std::nullopt;
    return std::string(v);
}

double env_double(const char* name, double fallback) {
    auto v = env(name);
    if (!v) return fallback;
    try {
        return std::stod(*v);
    } catch (const std::exception&) {
        throw Error(std::string(name) + ": not a number: " + *v);
    }
}

std::int64_t env_int(const char* name, std::int64_t fallback) {
    auto v = env(name);
    if (!v) return fallback;
    try {
        return std::stoll(*v);
    } catch (const std::exception&) {
        throw Error(std::string(name) + ": not an integer: " + *v);
    }
}

// Precedence: flags > environment > config file > defaults.
Settings resolve_settings(const CommonFlags& flags, const CLI::App& cmd, const std::filesystem::path& trace_dir) {
    AnalyzerConfig file_cfg;
    if (!flags.roots_file.empty()) {
        file_cfg = load_config(flags.roots_file);
    } else if (std::filesystem::exists(trace_dir / "roots.json")) {
        file_cfg = load_config(trace_dir / "roots.json");
    }

    double threshold = file_cfg.threshold_ratio.value_or(kDefaultGateThreshold);
    double overhead_pct = file_cfg.overhead_pct.value_or(5.0);
    double rare_pct = file_cfg.rare_util_pct.value_or(1.0);
    std::int64_t min_samples = file_cfg.min_samples.value_or(1000);
    std::int64_t top_k = file_cfg.top_k.value_or(3);
    double z = file_cfg.z.value_or(kDefaultZ);
    bool all_phases = file_cfg.all_phases.value_or(false);

    threshold = env_double("COLDPROF_THRESHOLD_RATIO", threshold);
    overhead_pct = env_double("COLDPROF_OVERHEAD_PCT", overhead_pct);
    rare_pct = env_double("COLDPROF_RARE_UTIL_PCT", rare_pct);
    min_samples = env_int("COLDPROF_MIN_SAMPLES", min_samples);
    top_k = env_int("COLDPROF_TOP_K", top_k);
    z = env_double("COLDPROF_Z", z);

    auto given = [&](const char* name) {
        const auto* opt = cmd.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--threshold-ratio")) threshold = flags.threshold_ratio;
    if (given("--overhead-pct")) overhead_pct = flags.overhead_pct;
    if (given("--rare-util-pct")) rare_pct = flags.rare_util_pct;
    if (given("--min-samples")) min_samples = flags.min_samples;
    if (given("--top-k")) top_k = flags.top_k;
    if (given("--z")) z = flags.z;
    if (given("--all-phases")) all_phases = flags.all_phases;

    if (top_k < 1) throw Error("--top-k must be at least 1");

    Settings s;
    s.ingest.roots = file_cfg.roots;
    s.ingest.lenient = flags.lenient;
    s.ingest.threshold_ratio = threshold;
    s.ingest.z = z;
    s.ingest.filter = all_phases ? PhaseFilter::kAll : PhaseFilter::kExecOnly;
    s.detector.overhead_floor = overhead_pct / 100.0;
    s.detector.rare_utilization = rare_pct / 100.0;
    s.detector.min_samples = min_samples;
    s.detector.top_k_paths = static_cast<std::size_t>(top_k);
    s.detector.z = z;
    s.detector.filter = s.ingest.filter;
    s.top_k = static_cast<std::size_t>(top_k);
    return s;
}

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_traces) {
    if (with_traces) cmd->add_option("--traces", flags.traces, "Trace directory")->required();
    cmd->add_option("--roots", flags.roots_file, "Analyzer config file (roots and threshold overrides)");
    cmd->add_option("--threshold-ratio", flags.threshold_ratio, "Gate threshold T on init/exec ratio (default 0.10)");
    cmd->add_flag("--lenient", flags.lenient, "Skip unreadable trace files instead of failing");
}

void add_detector(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--overhead-pct", flags.overhead_pct, "Minimum init overhead share, percent (default 5)");
    cmd->add_option("--rare-util-pct", flags.rare_util_pct, "Rare-usage utilization threshold, percent (default 1)");
    cmd->add_option("--min-samples", flags.min_samples, "Minimum EXEC samples for detection (default 1000)");
    cmd->add_option("--top-k", flags.top_k, "Evidence call paths per finding (default 3)");
    cmd->add_option("--z", flags.z, "Normal critical value for confidence intervals (default 1.96)");
    cmd->add_flag("--all-phases", flags.all_phases, "Count INIT-phase samples in utilization");
}

int cmd_gate(const CommonFlags& flags, const CLI::App& cmd, std::ostream& out) {
    const Settings s = resolve_settings(flags, cmd, flags.traces);
    const ProfileBundle bundle = ingest(flags.traces, s.ingest);
    const auto& g = bundle.gate;
    out << "ratio " << g.ratio << " threshold " << g.threshold << ": "
        << (g.profile_worthy ? "profile-worthy" : "insignificant impact on the cold start") << "\n";
    return g.profile_worthy ? kExitProfileWorthy : kExitOk;
}

int cmd_report(const CommonFlags& flags, const std::string& collapsed_out, const CLI::App& cmd, std::ostream& out) {
    if (flags.format != "text" && flags.format != "json") throw CLI::ValidationError("--format", "expected text|json");
    const Settings s = resolve_settings(flags, cmd, flags.traces);
    ProfileBundle bundle = ingest(flags.traces, s.ingest);
    analyze(bundle, s.detector);
    if (!collapsed_out.empty()) {
        std::ofstream f(collapsed_out);
        if (!f) throw IoError(collapsed_out + ": cannot write collapsed stacks");
        f << bundle.cct.collapsed_stacks(&bundle.roots, PhaseFilter::kAll);
    }
    if (flags.format == "json") {
        out << to_json(bundle).dump(2) << "\n";
    } else {
        out << render_text(bundle, ReportOptions{s.top_k});
    }
    return kExitOk;
}

int cmd_diff(const CommonFlags& flags, const std::string& before, const std::string& after, const CLI::App& cmd,
             std::ostream& out) {
    const Settings sb = resolve_settings(flags, cmd, before);
    const Settings sa = resolve_settings(flags, cmd, after);
    const ProfileBundle b = ingest(before, sb.ingest);
    const ProfileBundle a = ingest(after, sa.ingest);
    const DiffResult d = diff(b.invocations, a.invocations);
    if (flags.format == "json") {
        nlohmann::ordered_json j;
        j["mean_init_speedup"] = d.mean_init_speedup;
        j["p99_init_speedup"] = d.p99_init_speedup;
        j["mean_exec_speedup"] = d.mean_exec_speedup;
        j["p99_exec_speedup"] = d.p99_exec_speedup;
        j["before"] = {{"mean_init_us", d.before.mean_init_us}, {"p99_init_us", d.before.p99_init_us},
                       {"mean_exec_us", d.before.mean_exec_us}, {"p99_exec_us", d.before.p99_exec_us}};
        j["after"] = {{"mean_init_us", d.after.mean_init_us}, {"p99_init_us", d.after.p99_init_us},
                      {"mean_exec_us", d.after.mean_exec_us}, {"p99_exec_us", d.after.p99_exec_us}};
        out << j.dump(2) << "\n";
    } else {
        out << render_diff(d);
    }
    return kExitOk;
}

int cmd_simulate(const SimSpec& spec, const std::string& format, std::ostream& out) {
    const SimReport report = simulate(spec);
    std::vector<DetectabilityResult> detect;
    for (double p : spec.p_true) detect.push_back(check_rare_detectability(p, spec.n_samples, spec.trials, spec.seed));
    if (format == "json") {
        nlohmann::ordered_json j;
        j["n"] = spec.n_samples;
        j["trials"] = spec.trials;
        j["z"] = spec.z;
        j["seed"] = spec.seed;
        auto libs = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < report.libraries.size(); ++i) {
            const auto& r = report.libraries[i];
            libs.push_back({{"p", r.p_true},
                            {"coverage", r.coverage},
                            {"mean_p_hat", r.mean_p_hat},
                            {"mean_abs_error", r.mean_abs_error},
                            {"mean_width", r.mean_width},
                            {"detected_fraction", detect[i].detected_fraction},
                            {"detected_expected", detect[i].expected}});
        }
        j["libraries"] = libs;
        out << j.dump(2) << "\n";
        return kExitOk;
    }
    out << "N = " << spec.n_samples << ", trials = " << spec.trials << ", z = " << spec.z << ", seed = " << spec.seed
        << "\n";
    out << "p          coverage  mean p_hat   mean |err|   mean width   detected  expected\n";
    for (std::size_t i = 0; i < report.libraries.size(); ++i) {
        const auto& r = report.libraries[i];
        char line[256];
        std::snprintf(line, sizeof(line), "%-10g %8.4f  %10.6f  %11.6f  %11.6f  %8.4f  %8.4f\n", r.p_true, r.coverage,
                      r.mean_p_hat, r.mean_abs_error, r.mean_width, detect[i].detected_fraction, detect[i].expected);
        out << line;
    }
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"coldprof: cold-start library usage analyzer"};
    app.require_subcommand(1);

    CommonFlags gate_flags;
    auto* gate = app.add_subcommand("gate", "Screen a trace directory with the init/exec ratio gate");
    add_common(gate, gate_flags, true);

    CommonFlags report_flags;
    std::string collapsed_out;
    auto* report = app.add_subcommand("report", "Aggregate traces and report inefficient library usage");
    add_common(report, report_flags, true);
    add_detector(report, report_flags);
    report->add_option("--format", report_flags.format, "text|json");
    report->add_option("--collapsed-out", collapsed_out, "Also write flame-graph collapsed stacks to FILE");

    CommonFlags diff_flags;
    std::string before, after;
    auto* diffc = app.add_subcommand("diff", "Compare cold-start latency of two trace directories");
    diffc->add_option("--before", before, "Trace directory before optimization")->required();
    diffc->add_option("--after", after, "Trace directory after optimization")->required();
    add_common(diffc, diff_flags, false);
    diffc->add_option("--format", diff_flags.format, "text|json")->check(CLI::IsMember({"text", "json"}));

    SimSpec spec;
    spec.p_true = {0.01, 0.1, 0.5};
    std::string sim_format = "text";
    auto* sim = app.add_subcommand("simulate", "Monte-Carlo check of utilization confidence intervals");
    sim->add_option("--p", spec.p_true, "True usage frequencies")->delimiter(',');
    sim->add_option("--n", spec.n_samples, "Samples per trial");
    sim->add_option("--trials", spec.trials, "Trials");
    sim->add_option("--z", spec.z, "Normal critical value");
    sim->add_option("--seed", spec.seed, "Random seed");
    sim->add_option("--format", sim_format, "text|json")->check(CLI::IsMember({"text", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << "\n" << app.help();
        return kExitError;
    }

    try {
        if (*gate) return cmd_gate(gate_flags, *gate, out);
        if (*report) return cmd_report(report_flags, collapsed_out, *report, out);
        if (*diffc) return cmd_diff(diff_flags, before, after, *diffc, out);
        if (*sim) return cmd_simulate(spec, sim_format, out);
    } catch (const CLI::ValidationError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace coldprof
