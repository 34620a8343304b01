#ifndef ENTROPT_METRICS_HPP
#define ENTROPT_METRICS_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "entropt/optimizers.hpp"

namespace entropt {

// One metrics.csv row. Non-finite values serialize as the literal "nan"
// sentinel so aborted runs still produce parseable files.
struct MetricsRow {
  std::int64_t step = 0;
  double wall_time_s = 0.0;
  double tau = 0.0;
  double train_loss = 0.0;
  double test_accuracy = std::numeric_limits<double>::quiet_NaN();
  double diagnostic = std::numeric_limits<double>::quiet_NaN();
};

inline std::vector<MetricsRow> to_metrics(const TrainTrace& trace) {
  std::vector<MetricsRow> rows;
  rows.reserve(trace.rows.size());
  for (const TraceRow& r : trace.rows)
    rows.push_back(MetricsRow{r.step, r.wall_seconds, r.tau, r.loss,
                              r.accuracy, r.diagnostic});
  return rows;
}

namespace detail {
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
}  // namespace detail

inline constexpr const char* kMetricsHeader =
    "step,wall_time_s,tau,train_loss,test_accuracy,diagnostic";

inline void write_metrics_csv(const std::string& path,
                              const std::vector<MetricsRow>& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("metrics: cannot write " + path);
  out << kMetricsHeader << "\n";
  for (const MetricsRow& r : rows) {
    out << r.step << ',' << detail::format_double(r.wall_time_s) << ','
        << detail::format_double(r.tau) << ','
        << detail::format_double(r.train_loss) << ','
        << detail::format_double(r.test_accuracy) << ','
        << detail::format_double(r.diagnostic) << "\n";
  }
}

inline std::vector<MetricsRow> read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("metrics: cannot read " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader)
    throw std::runtime_error("metrics: bad header in " + path);
  std::vector<MetricsRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    MetricsRow r;
    auto next = [&]() -> std::string {
      if (!std::getline(ss, field, ','))
        throw std::runtime_error("metrics: short row in " + path);
      return field;
    };
    r.step = std::stoll(next());
    r.wall_time_s = std::stod(next());
    r.tau = std::stod(next());
    r.train_loss = std::stod(next());
    r.test_accuracy = std::stod(next());
    r.diagnostic = std::stod(next());
    rows.push_back(r);
  }
  return rows;
}

}  // namespace entropt

#endif
