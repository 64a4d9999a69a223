#include <cstdio>
#include <fstream>

#include "i2plive/scenario.hpp"

namespace i2plive {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

class CsvFile {
 public:
  CsvFile(const std::filesystem::path& path, const std::string& schema, const std::string& header) : out_(path) {
    if (!out_) throw std::runtime_error("cannot write " + path.string());
    out_ << "# i2plive " << schema << " v1\n" << header << '\n';
  }
  template <typename... T>
  void row(const T&... cells) {
    std::size_t i = 0;
    ((out_ << (i++ ? "," : "") << cells), ...);
    out_ << '\n';
  }
  ~CsvFile() { out_.flush(); }

 private:
  std::ofstream out_;
};

}  // namespace

void emit_report(const ScenarioResult& result, const std::filesystem::path& out_dir) {
  if (result.routers.empty() && result.correlation.series.empty())
    throw std::invalid_argument("nothing to report");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create " + out_dir.string() + ": " + ec.message());

  {
    CsvFile f(out_dir / "bias.csv", "bias",
              "router,category,truth_session,inferred_session,join_bias_s,leave_bias_s,start_quality,end_quality");
    for (const auto& r : result.bias.rows)
      f.row(r.router, to_string(r.category), r.match.truth_session, r.match.inferred_session,
            num(r.match.join_bias_s), num(r.match.leave_bias_s), to_string(r.match.start_quality),
            to_string(r.match.end_quality));
  }
  {
    CsvFile f(out_dir / "bias_summary.csv", "bias-summary",
              "category,sessions,join_median_s,join_uq_s,leave_median_s,leave_uq_s,complement");
    for (const auto& c : result.bias.per_category)
      f.row(to_string(c.category), c.sessions, num(c.join_median_s), num(c.join_uq_s), num(c.leave_median_s),
            num(c.leave_uq_s), result.with_complement ? "on" : "off");
  }
  {
    CsvFile f(out_dir / "cases.csv", "cases", "router,synthetic,case,severity,session,note");
    for (const auto& r : result.routers)
      for (const auto& d : r.final.diagnostics)
        f.row(r.plan.label, r.plan.noise ? 1 : 0, to_string(d.label), to_string(d.severity), d.session, d.note);
  }
  {
    // Noise routers (synthetic=1 in cases.csv) stand in for a real
    // network's background population.
    CsvFile f(out_dir / "anonymity_series.csv", "anonymity-series",
              "service,host,day,target_sessions,set_size,host_included");
    for (const auto& s : result.correlation.series)
      f.row(s.service, s.host, s.day, s.target_sessions, s.set_size, s.host_included ? 1 : 0);
  }
  {
    CsvFile f(out_dir / "anonymity_sets.csv", "anonymity-sets",
              "service,day,router,category,distance,distance_is_bound,included");
    for (std::size_t i = 0; i < result.correlation.series.size(); ++i) {
      const auto& s = result.correlation.series[i];
      for (const auto& e : result.correlation.reports[i].entries)
        f.row(s.service, s.day, e.identity.label.empty() ? e.identity.hex() : e.identity.label,
              to_string(e.category), e.distance, e.bounded ? 1 : 0, e.included ? 1 : 0);
    }
  }
  {
    CsvFile f(out_dir / "anonymity_plot.csv", "anonymity-plot", "service,day,set_size");
    for (const auto& s : result.correlation.series) f.row(s.service, s.day, s.set_size);
  }
}

}  // namespace i2plive
