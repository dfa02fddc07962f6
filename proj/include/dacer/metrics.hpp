#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dacer {

// Append-only scalar stream keyed by (iteration, metric name). Within one
// metric the iteration index must strictly increase.
class RunMetrics {
  public:
    struct Row {
        int64_t iteration;
        std::string metric;
        double value;
    };

    void append(int64_t iteration, const std::string& metric, double value);

    const std::vector<Row>& rows() const { return rows_; }
    // (iteration, value) pairs of one metric, in append order.
    std::vector<std::pair<int64_t, double>> series(const std::string& metric) const;
    std::vector<std::string> metric_names() const;

    // CSV with an "iteration,metric,value" header line.
    void write_csv(const std::string& path) const;
    static RunMetrics read_csv(const std::string& path);

  private:
    std::vector<Row> rows_;
    std::map<std::string, int64_t> last_iteration_;
};

} // namespace dacer
