#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "oswa/harness/experiment.hpp"

namespace oswa::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Series {
  std::string name;
  // x -> (mean, std)
  std::vector<std::tuple<double, double, double>> points;
};

// Minimal line plot with error bars; enough for the sweep summary figures.
void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& y_label,
                    const std::vector<Series>& series) {
  const double w = 640, h = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
  for (const auto& s : series)
    for (const auto& [x, m, sd] : s.points) {
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, m - sd);
      ymax = std::max(ymax, m + sd);
    }
  if (xmin > xmax) return;
  if (xmax == xmin) xmax = xmin + 1.0;
  const double pad = std::max(0.02, (ymax - ymin) * 0.1);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
  std::ofstream f(path, std::ios::trunc);
  f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='"
    << h << "'>\n<rect width='100%' height='100%' fill='white'/>\n";
  f << "<text x='" << w / 2 << "' y='24' text-anchor='middle' font-size='16'>"
    << title << "</text>\n";
  // axes
  f << "<line x1='" << ml << "' y1='" << h - mb << "' x2='" << w - mr
    << "' y2='" << h - mb << "' stroke='black'/>\n";
  f << "<line x1='" << ml << "' y1='" << mt << "' x2='" << ml << "' y2='"
    << h - mb << "' stroke='black'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double y = ymin + (ymax - ymin) * i / 5.0;
    char lbl[32];
    std::snprintf(lbl, sizeof(lbl), "%.2f", y);
    f << "<text x='" << ml - 8 << "' y='" << py(y) + 4
      << "' text-anchor='end' font-size='11'>" << lbl << "</text>\n";
    f << "<line x1='" << ml << "' y1='" << py(y) << "' x2='" << w - mr
      << "' y2='" << py(y) << "' stroke='#dddddd'/>\n";
  }
  std::set<double> xs;
  for (const auto& s : series)
    for (const auto& [x, m, sd] : s.points) xs.insert(x);
  for (double x : xs)
    f << "<text x='" << px(x) << "' y='" << h - mb + 18
      << "' text-anchor='middle' font-size='11'>" << x << "</text>\n";
  f << "<text x='" << ml - 50 << "' y='" << (mt + h - mb) / 2
    << "' font-size='12' transform='rotate(-90 " << ml - 50 << " "
    << (mt + h - mb) / 2 << ")'>" << y_label << "</text>\n";

  int ci = 0;
  double ly = mt + 6;
  for (const auto& s : series) {
    const char* color = colors[ci++ % 4];
    std::string poly;
    for (const auto& [x, m, sd] : s.points) {
      poly += fmt(px(x)) + "," + fmt(py(m)) + " ";
      // error bar
      f << "<line x1='" << px(x) << "' y1='" << py(m - sd) << "' x2='" << px(x)
        << "' y2='" << py(m + sd) << "' stroke='" << color << "'/>\n";
      f << "<circle cx='" << px(x) << "' cy='" << py(m) << "' r='3' fill='"
        << color << "'/>\n";
    }
    f << "<polyline points='" << poly << "' fill='none' stroke='" << color
      << "' stroke-width='1.5'/>\n";
    f << "<rect x='" << w - mr - 120 << "' y='" << ly - 9
      << "' width='12' height='4' fill='" << color << "'/>\n";
    f << "<text x='" << w - mr - 102 << "' y='" << ly
      << "' font-size='12'>" << s.name << "</text>\n";
    ly += 16;
  }
  f << "</svg>\n";
}

}  // namespace

void report(const std::string& results_dir) {
  std::vector<RealizationResult> results;
  if (fs::is_directory(results_dir)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(results_dir))
      if (e.path().extension() == ".json" &&
          e.path().filename().string().rfind("r_", 0) == 0)
        files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) results.push_back(read_result_file(p.string()));
  }
  if (results.empty())
    throw MissingDataError("no realization results under " + results_dir);

  std::sort(results.begin(), results.end(),
            [](const RealizationResult& a, const RealizationResult& b) {
              return std::tie(a.sweep_value, a.realization) <
                     std::tie(b.sweep_value, b.realization);
            });

  const fs::path out_dir = fs::path(results_dir).parent_path();

  // per-realization CSV
  {
    std::ofstream csv(out_dir / "realizations.csv", std::ios::trunc);
    csv << "sweep_value,arch,realization,auc,balanced_accuracy,"
           "closed_set_accuracy,gamma_summary,n_params\n";
    for (const auto& r : results) {
      for (const auto& [arch, ar] : r.archs) {
        double gamma_summary = std::numeric_limits<double>::quiet_NaN();
        if (!ar.gamma.empty()) {
          gamma_summary = 0.0;
          for (double g : ar.gamma) gamma_summary += g;
          gamma_summary /= static_cast<double>(ar.gamma.size());
        }
        csv << r.sweep_value << ',' << arch << ',' << r.realization << ','
            << fmt(ar.auc) << ',' << fmt(ar.balanced_accuracy) << ','
            << fmt(ar.closed_set_accuracy) << ',' << fmt(gamma_summary) << ','
            << ar.n_params << '\n';
      }
    }
  }

  const std::vector<SummaryRow> rows = summarize(results);
  {
    json points = json::array();
    for (const auto& row : rows)
      points.push_back({{"sweep_value", row.sweep_value},
                        {"arch", row.arch},
                        {"n_realizations", row.n_realizations},
                        {"auc_mean", row.auc_mean},
                        {"auc_std", row.auc_std},
                        {"balanced_accuracy_mean", row.acc_mean},
                        {"balanced_accuracy_std", row.acc_std}});
    json j{{"points", points}};
    std::ofstream f(out_dir / "summary.json", std::ios::trunc);
    f << j.dump(2) << "\n";
  }

  // one line per arch, mean +- std error bars
  std::map<std::string, Series> auc_series, acc_series;
  for (const auto& row : rows) {
    auto& sa = auc_series[row.arch];
    sa.name = row.arch;
    sa.points.emplace_back(row.sweep_value, row.auc_mean, row.auc_std);
    auto& sc = acc_series[row.arch];
    sc.name = row.arch;
    sc.points.emplace_back(row.sweep_value, row.acc_mean, row.acc_std);
  }
  std::vector<Series> auc_list, acc_list;
  for (auto& [_, s] : auc_series) auc_list.push_back(std::move(s));
  for (auto& [_, s] : acc_series) acc_list.push_back(std::move(s));
  write_svg_plot((out_dir / "fig_auc.svg").string(), "AUC vs sweep value",
                 "AUC", auc_list);
  write_svg_plot((out_dir / "fig_acc.svg").string(),
                 "Balanced accuracy vs sweep value", "balanced accuracy",
                 acc_list);
}

}  // namespace oswa::harness
