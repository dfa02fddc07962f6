#include "dacer/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dacer/errors.hpp"

namespace dacer {

void RunMetrics::append(int64_t iteration, const std::string& metric, double value) {
    if (metric.empty() || metric.find(',') != std::string::npos ||
        metric.find(' ') != std::string::npos || metric.find('\n') != std::string::npos)
        throw ContractError("metrics: bad metric name '" + metric + "'");
    auto it = last_iteration_.find(metric);
    if (it != last_iteration_.end() && iteration <= it->second)
        throw ContractError("metrics: iteration " + std::to_string(iteration) + " for '" +
                            metric + "' does not increase (last " +
                            std::to_string(it->second) + ")");
    last_iteration_[metric] = iteration;
    rows_.push_back({iteration, metric, value});
}

std::vector<std::pair<int64_t, double>> RunMetrics::series(const std::string& metric) const {
    std::vector<std::pair<int64_t, double>> out;
    for (const Row& r : rows_)
        if (r.metric == metric) out.emplace_back(r.iteration, r.value);
    return out;
}

std::vector<std::string> RunMetrics::metric_names() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : last_iteration_) out.push_back(k);
    return out;
}

void RunMetrics::write_csv(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw LoadError("metrics: cannot open '" + path + "' for writing");
    f << "iteration,metric,value\n";
    f.precision(17);
    for (const Row& r : rows_) f << r.iteration << ',' << r.metric << ',' << r.value << '\n';
    if (!f) throw LoadError("metrics: write failed for '" + path + "'");
}

RunMetrics RunMetrics::read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw LoadError("metrics: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(f, line) || line != "iteration,metric,value")
        throw LoadError("metrics: '" + path + "' lacks the iteration,metric,value header");
    RunMetrics m;
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream is(line);
        std::string iter_s, metric, value_s;
        if (!std::getline(is, iter_s, ',') || !std::getline(is, metric, ',') ||
            !std::getline(is, value_s))
            throw LoadError("metrics: malformed line " + std::to_string(lineno) + " in '" +
                            path + "'");
        try {
            m.append(std::stoll(iter_s), metric, std::stod(value_s));
        } catch (const std::invalid_argument&) {
            throw LoadError("metrics: malformed numbers on line " + std::to_string(lineno));
        }
    }
    return m;
}

} // namespace dacer
