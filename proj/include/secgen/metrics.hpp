#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "secgen/language.hpp"

namespace secgen {

class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ScenarioTally {
    std::string scenario_id;
    std::string cwe;
    Language language = Language::C;
    long vulnerable = 0;
    long secure = 0;
    long invalid = 0;

    long total() const { return vulnerable + secure + invalid; }
    long valid() const { return vulnerable + secure; }
};

// (vulnerable + secure) / total. Undefined when total is 0.
double valid_ratio(const ScenarioTally& tally);

// secure / (vulnerable + secure). Undefined (never 0) when no sample
// compiled; render as "n/a".
double secure_ratio(const ScenarioTally& tally);

// Unbiased estimator 1 - C(n-c, k)/C(n, k) in product form; reduces to
// c/n at k = 1.
double pass_at_k(long n, long c, long k);

struct PassTask {
    std::string task_id;
    long n = 0;
    long c = 0;
};

// Mean of per-task pass@k.
double mean_pass_at_k(const std::vector<PassTask>& tasks, long k);

// Two-sided Fisher exact test on [[a, b], [c, d]]: with margins fixed,
// sums the hypergeometric mass of every table at most as probable as the
// observed one (relative tolerance 1e-7 on the comparison).
double fisher_exact_2x2(long a, long b, long c, long d);

struct Aggregate {
    std::string key; // language name, CWE id, or "all"
    long vulnerable = 0;
    long secure = 0;
    long invalid = 0;

    ScenarioTally as_tally() const;
};

enum class GroupBy { Language, Cwe, All };

// Element-wise count sums per group; ratios must be recomputed from the
// summed counts, never averaged.
std::vector<Aggregate> aggregate(const std::vector<ScenarioTally>& tallies, GroupBy group);

struct Report {
    std::vector<ScenarioTally> tallies; // ordered by scenario_id
    std::string model_tag;
    std::string config_digest;
};

// "58.8%" style (one decimal) and "9.93%" style (two decimals).
std::string format_percent1(double fraction);
std::string format_percent2(double fraction);

// CSV schema: scenario_id,language,cwe,vulnerable,secure,invalid,
// valid_ratio,secure_ratio. The text report adds per-language, per-CWE
// and overall sections. Byte-deterministic for equal inputs.
std::string report_csv(const Report& report);
std::string report_text(const Report& report);

// Per-CWE rows in plottable form: cwe,vulnerable,secure,invalid,secure_ratio.
std::string cwe_breakdown_csv(const Report& report);

// Benchmark results table: task_id,n,c per line (CSV with header).
std::vector<PassTask> parse_pass_tasks_csv(const std::string& text);

} // namespace secgen
