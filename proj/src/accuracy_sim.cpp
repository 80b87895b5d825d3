#include "coldprof/accuracy_sim.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "coldprof/errors.hpp"
#include "coldprof/metrics.hpp"

namespace coldprof {

namespace {

std::mt19937_64 trial_stream(std::uint64_t seed, std::uint64_t trial, std::uint64_t salt) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32),
                      static_cast<std::uint32_t>(salt)};
    return std::mt19937_64(seq);
}

// Bernoulli(p) as a comparison against a 64-bit threshold.
class Bernoulli {
  public:
    explicit Bernoulli(double p)
        : always_(p >= 1.0),
          threshold_(p <= 0.0 || p >= 1.0 ? 0 : static_cast<std::uint64_t>(std::ldexp(p, 64))) {}

    bool operator()(std::mt19937_64& gen) const { return always_ || gen() < threshold_; }

  private:
    bool always_;
    std::uint64_t threshold_;
};

void check_probability(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("probability " + std::to_string(p) + " outside [0, 1]");
}

}  // namespace

void SimSpec::validate() const {
    for (double p : p_true) check_probability(p);
    if (n_samples < 1) throw Error("n_samples must be >= 1");
    if (trials < 1) throw Error("trials must be >= 1");
    if (!(z > 0.0)) throw Error("z must be positive");
}

SimReport simulate(const SimSpec& spec) {
    spec.validate();
    SimReport report;
    report.spec = spec;
    report.libraries.resize(spec.p_true.size());

    std::vector<Bernoulli> draws;
    for (double p : spec.p_true) draws.emplace_back(p);

    std::vector<std::int64_t> covered(spec.p_true.size(), 0);
    std::vector<double> sum_p_hat(spec.p_true.size(), 0.0);
    std::vector<double> sum_abs_err(spec.p_true.size(), 0.0);
    std::vector<double> sum_width(spec.p_true.size(), 0.0);

    for (std::int64_t t = 0; t < spec.trials; ++t) {
        auto gen = trial_stream(spec.seed, static_cast<std::uint64_t>(t), 0);
        std::vector<std::int64_t> hits(spec.p_true.size(), 0);
        for (std::int64_t j = 0; j < spec.n_samples; ++j) {
            for (std::size_t i = 0; i < draws.size(); ++i) hits[i] += draws[i](gen) ? 1 : 0;
        }
        for (std::size_t i = 0; i < draws.size(); ++i) {
            const double p = spec.p_true[i];
            const double p_hat = static_cast<double>(hits[i]) / static_cast<double>(spec.n_samples);
            const Interval ci = confidence_interval(p_hat, spec.n_samples, spec.z);
            if (ci.low <= p && p <= ci.high) ++covered[i];
            sum_p_hat[i] += p_hat;
            sum_abs_err[i] += std::abs(p_hat - p);
            sum_width[i] += ci.high - ci.low;
        }
    }

    const double trials = static_cast<double>(spec.trials);
    for (std::size_t i = 0; i < draws.size(); ++i) {
        auto& r = report.libraries[i];
        r.p_true = spec.p_true[i];
        r.coverage = static_cast<double>(covered[i]) / trials;
        r.mean_p_hat = sum_p_hat[i] / trials;
        r.mean_abs_error = sum_abs_err[i] / trials;
        r.mean_width = sum_width[i] / trials;
    }
    return report;
}

DetectabilityResult check_rare_detectability(double p_rare, std::int64_t n, std::int64_t trials,
                                             std::uint64_t seed) {
    check_probability(p_rare);
    if (n < 1 || trials < 1) throw Error("n and trials must be >= 1");
    const Bernoulli draw(p_rare);
    std::int64_t detected = 0;
    for (std::int64_t t = 0; t < trials; ++t) {
        auto gen = trial_stream(seed, static_cast<std::uint64_t>(t), 1);
        for (std::int64_t j = 0; j < n; ++j) {
            if (draw(gen)) {
                ++detected;
                break;
            }
        }
    }
    DetectabilityResult out;
    out.detected_fraction = static_cast<double>(detected) / static_cast<double>(trials);
    out.expected = 1.0 - std::pow(1.0 - p_rare, static_cast<double>(n));
    out.standard_error = std::sqrt(out.expected * (1.0 - out.expected) / static_cast<double>(trials));
    return out;
}

}  // namespace coldprof
