#include "secgen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "secgen/util.hpp"

namespace secgen {

double valid_ratio(const ScenarioTally& tally) {
    if (tally.total() <= 0)
        throw MetricError("valid_ratio undefined: no samples");
    return static_cast<double>(tally.valid()) / static_cast<double>(tally.total());
}

double secure_ratio(const ScenarioTally& tally) {
    if (tally.valid() <= 0)
        throw MetricError("secure_ratio undefined: no valid samples");
    return static_cast<double>(tally.secure) / static_cast<double>(tally.valid());
}

double pass_at_k(long n, long c, long k) {
    if (n < 0 || c < 0 || c > n)
        throw MetricError("pass_at_k: need 0 <= c <= n");
    if (k < 1 || k > n)
        throw MetricError("pass_at_k: need 1 <= k <= n");
    if (k == 1)
        return static_cast<double>(c) / static_cast<double>(n); // estimator identity
    if (n - c < k)
        return 1.0; // every k-subset hits a correct sample
    // 1 - prod_{i=0}^{k-1} (n-c-i)/(n-i)
    long double miss = 1.0L;
    for (long i = 0; i < k; ++i)
        miss *= static_cast<long double>(n - c - i) / static_cast<long double>(n - i);
    return static_cast<double>(1.0L - miss);
}

double mean_pass_at_k(const std::vector<PassTask>& tasks, long k) {
    if (tasks.empty())
        throw MetricError("mean_pass_at_k: no tasks");
    long double sum = 0.0L;
    for (const PassTask& task : tasks)
        sum += pass_at_k(task.n, task.c, k);
    return static_cast<double>(sum / static_cast<long double>(tasks.size()));
}

namespace {

double log_choose(long n, long k) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(k) + 1.0) -
           std::lgamma(static_cast<double>(n - k) + 1.0);
}

} // namespace

double fisher_exact_2x2(long a, long b, long c, long d) {
    if (a < 0 || b < 0 || c < 0 || d < 0)
        throw MetricError("fisher_exact_2x2: negative cell");
    long n = a + b + c + d;
    if (n == 0)
        throw MetricError("fisher_exact_2x2: all cells zero");

    long row1 = a + b;
    long col1 = a + c;
    // P(x) = C(row1, x) * C(n - row1, col1 - x) / C(n, col1)
    long lo = std::max(0L, col1 - (n - row1));
    long hi = std::min(row1, col1);
    double log_denominator = log_choose(n, col1);
    auto table_prob = [&](long x) {
        return std::exp(log_choose(row1, x) + log_choose(n - row1, col1 - x) -
                        log_denominator);
    };

    double observed = table_prob(a);
    double threshold = observed * (1.0 + 1e-7);
    double p = 0.0;
    for (long x = lo; x <= hi; ++x) {
        double prob = table_prob(x);
        if (prob <= threshold)
            p += prob;
    }
    return std::min(p, 1.0);
}

ScenarioTally Aggregate::as_tally() const {
    ScenarioTally tally;
    tally.scenario_id = key;
    tally.vulnerable = vulnerable;
    tally.secure = secure;
    tally.invalid = invalid;
    return tally;
}

std::vector<Aggregate> aggregate(const std::vector<ScenarioTally>& tallies, GroupBy group) {
    std::map<std::string, Aggregate> groups;
    for (const ScenarioTally& tally : tallies) {
        std::string key;
        switch (group) {
        case GroupBy::Language: key = to_string(tally.language); break;
        case GroupBy::Cwe: key = tally.cwe; break;
        case GroupBy::All: key = "all"; break;
        }
        Aggregate& agg = groups[key];
        agg.key = key;
        agg.vulnerable += tally.vulnerable;
        agg.secure += tally.secure;
        agg.invalid += tally.invalid;
    }
    std::vector<Aggregate> out;
    out.reserve(groups.size());
    for (auto& [key, agg] : groups)
        out.push_back(agg);
    return out;
}

std::string format_percent1(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.1f%%", fraction * 100.0);
    return buf;
}

std::string format_percent2(double fraction) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f%%", fraction * 100.0);
    return buf;
}

namespace {

std::string ratio_cells(const ScenarioTally& tally) {
    std::string valid = tally.total() > 0 ? format_percent1(valid_ratio(tally)) : "n/a";
    std::string secure = tally.valid() > 0 ? format_percent1(secure_ratio(tally)) : "n/a";
    return valid + "," + secure;
}

} // namespace

std::string report_csv(const Report& report) {
    std::string out = "scenario_id,language,cwe,vulnerable,secure,invalid,"
                      "valid_ratio,secure_ratio\n";
    for (const ScenarioTally& tally : report.tallies) {
        out += tally.scenario_id + "," + to_string(tally.language) + "," + tally.cwe +
               "," + std::to_string(tally.vulnerable) + "," +
               std::to_string(tally.secure) + "," + std::to_string(tally.invalid) +
               "," + ratio_cells(tally) + "\n";
    }
    return out;
}

std::string report_text(const Report& report) {
    std::string out;
    out += "model: " + report.model_tag + "\n";
    out += "config: " + report.config_digest + "\n";
    out += "\nper-scenario\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-18s %4s %4s %4s %8s %8s\n", "scenario",
                  "vul", "sec", "inv", "valid", "secure");
    out += line;
    for (const ScenarioTally& tally : report.tallies) {
        std::string valid = tally.total() > 0 ? format_percent1(valid_ratio(tally)) : "n/a";
        std::string secure = tally.valid() > 0 ? format_percent1(secure_ratio(tally)) : "n/a";
        std::snprintf(line, sizeof(line), "%-18s %4ld %4ld %4ld %8s %8s\n",
                      tally.scenario_id.c_str(), tally.vulnerable, tally.secure,
                      tally.invalid, valid.c_str(), secure.c_str());
        out += line;
    }

    auto emit_group = [&](const char* title, const std::vector<Aggregate>& groups) {
        out += "\n";
        out += title;
        out += "\n";
        for (const Aggregate& agg : groups) {
            ScenarioTally tally = agg.as_tally();
            std::string valid = tally.total() > 0 ? format_percent1(valid_ratio(tally)) : "n/a";
            std::string secure = tally.valid() > 0 ? format_percent1(secure_ratio(tally)) : "n/a";
            std::snprintf(line, sizeof(line), "%-18s %4ld %4ld %4ld %8s %8s\n",
                          agg.key.c_str(), agg.vulnerable, agg.secure, agg.invalid,
                          valid.c_str(), secure.c_str());
            out += line;
        }
    };
    emit_group("per-language", aggregate(report.tallies, GroupBy::Language));
    emit_group("per-cwe", aggregate(report.tallies, GroupBy::Cwe));
    emit_group("overall", aggregate(report.tallies, GroupBy::All));
    return out;
}

std::string cwe_breakdown_csv(const Report& report) {
    std::string out = "cwe,vulnerable,secure,invalid,secure_ratio\n";
    for (const Aggregate& agg : aggregate(report.tallies, GroupBy::Cwe)) {
        ScenarioTally tally = agg.as_tally();
        std::string secure = tally.valid() > 0 ? format_percent1(secure_ratio(tally)) : "n/a";
        out += agg.key + "," + std::to_string(agg.vulnerable) + "," +
               std::to_string(agg.secure) + "," + std::to_string(agg.invalid) + "," +
               secure + "\n";
    }
    return out;
}

std::vector<PassTask> parse_pass_tasks_csv(const std::string& text) {
    std::vector<PassTask> tasks;
    auto lines = split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string& line = lines[i];
        if (i == 0 && starts_with(line, "task_id"))
            continue; // header
        if (trim(line).empty())
            continue;
        auto first = line.find(',');
        auto second = line.find(',', first + 1);
        if (first == std::string::npos || second == std::string::npos)
            throw MetricError("bad benchmark row at line " + std::to_string(i + 1) +
                              ": " + line);
        PassTask task;
        task.task_id = line.substr(0, first);
        try {
            task.n = std::stol(line.substr(first + 1, second - first - 1));
            task.c = std::stol(line.substr(second + 1));
        } catch (const std::exception&) {
            throw MetricError("bad benchmark row at line " + std::to_string(i + 1) +
                              ": " + line);
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

} // namespace secgen
