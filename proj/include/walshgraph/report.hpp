#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "walshgraph/common.hpp"
#include "walshgraph/experiments.hpp"

namespace walshgraph {

// =============================================================================
// Report emission
// =============================================================================
//
// Reports are plain CSV and JSON; floats are printed with 17 significant
// digits so that byte-identical inputs and seeds give byte-identical files.

inline std::string format_real(Real x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

struct RenewalRow {
  Real eps = 0.0;
  Real lambda = 0.0;
  VertexId vertex = 0;
  Real u = 0.0;
  Real limit = 0.0;
  Real abs_error = 0.0;
};

inline std::string renewal_csv(const std::vector<RenewalRow>& rows) {
  std::ostringstream out;
  out << "eps,lambda,vertex,U,limit,abs_error\n";
  for (const RenewalRow& r : rows)
    out << format_real(r.eps) << ',' << format_real(r.lambda) << ',' << r.vertex << ','
        << format_real(r.u) << ',' << format_real(r.limit) << ',' << format_real(r.abs_error)
        << '\n';
  return out.str();
}

inline std::vector<RenewalRow> parse_renewal_csv(const std::string& text) {
  std::vector<RenewalRow> rows;
  std::istringstream in(text);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    RenewalRow r;
    if (std::sscanf(line.c_str(), "%lf,%lf,%d,%lf,%lf,%lf", &r.eps, &r.lambda, &r.vertex, &r.u,
                    &r.limit, &r.abs_error) != 6)
      throw SchemaError("renewal CSV: bad row '" + line + "'");
    rows.push_back(r);
  }
  return rows;
}

inline nlohmann::json to_json(const OccupationCheck& oc) {
  nlohmann::json j;
  j["eps"] = oc.eps;
  j["t"] = oc.t;
  j["n"] = oc.n;
  j["vertex_fraction"] = oc.vertex_fraction;
  j["pass"] = oc.pass;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [edge, f] : oc.fraction) {
    nlohmann::json row;
    row["edge"] = edge;
    row["fraction"] = f;
    row["expected"] = oc.expected.at(edge);
    row["band"] = oc.band.at(edge);
    rows.push_back(std::move(row));
  }
  j["edges"] = std::move(rows);
  return j;
}

inline nlohmann::json to_json(const MarginalDistance& md) {
  nlohmann::json j;
  j["eps"] = md.eps;
  j["t"] = md.t;
  j["tolerance"] = md.tolerance;
  j["pass"] = md.pass;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& [edge, ks] : md.ks) {
    nlohmann::json row;
    row["edge"] = edge;
    row["ks"] = ks;
    row["count"] = md.count.at(edge);
    rows.push_back(std::move(row));
  }
  j["edges"] = std::move(rows);
  return j;
}

inline nlohmann::json to_json(const StatReport& report) {
  nlohmann::json j;
  j["pass"] = report.pass;
  j["occupations"] = nlohmann::json::array();
  for (const auto& oc : report.occupations) j["occupations"].push_back(to_json(oc));
  j["marginals"] = nlohmann::json::array();
  for (const auto& md : report.marginals) j["marginals"].push_back(to_json(md));
  return j;
}

inline nlohmann::json to_json(const MartingaleRecord& rec) {
  nlohmann::json j;
  j["flux"] = rec.flux;
  j["mean"] = rec.mean;
  j["se"] = rec.se;
  j["n"] = rec.n;
  j["flagged"] = rec.flagged;
  return j;
}

inline nlohmann::json to_json(const LaplaceMcRecord& rec) {
  const auto entry_json = [](const LaplaceMcRecord::Entry& e) {
    nlohmann::json j;
    j["ray"] = e.ray;
    j["estimate"] = e.estimate;
    j["se"] = e.se;
    j["expected"] = e.expected;
    j["z"] = e.z;
    return j;
  };
  nlohmann::json j;
  j["lambda"] = rec.lambda;
  j["n"] = rec.n;
  j["pass"] = rec.pass;
  j["exits"] = nlohmann::json::array();
  for (const auto& e : rec.exits) j["exits"].push_back(entry_json(e));
  j["occupations"] = nlohmann::json::array();
  for (const auto& e : rec.occupations) j["occupations"].push_back(entry_json(e));
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// -----------------------------------------------------------------------------
// SVG error plot
// -----------------------------------------------------------------------------

/// Static log-log plot of abs_error against eps, one polyline per
/// (lambda, vertex) series.
inline std::string renewal_error_svg(const std::vector<RenewalRow>& rows) {
  if (rows.empty()) throw Error("renewal_error_svg: no rows");
  const int width = 640, height = 480, margin = 60;
  Real min_x = kInfinity, max_x = -kInfinity, min_y = kInfinity, max_y = -kInfinity;
  for (const RenewalRow& r : rows) {
    if (!(r.eps > 0.0) || !(r.abs_error > 0.0)) continue;
    min_x = std::min(min_x, std::log10(r.eps));
    max_x = std::max(max_x, std::log10(r.eps));
    min_y = std::min(min_y, std::log10(r.abs_error));
    max_y = std::max(max_y, std::log10(r.abs_error));
  }
  if (!(min_x < max_x)) max_x = min_x + 1.0;
  if (!(min_y < max_y)) max_y = min_y + 1.0;
  const auto px = [&](Real lx) {
    return margin + (lx - min_x) / (max_x - min_x) * (width - 2 * margin);
  };
  const auto py = [&](Real ly) {
    return height - margin - (ly - min_y) / (max_y - min_y) * (height - 2 * margin);
  };

  std::map<std::pair<Real, VertexId>, std::vector<const RenewalRow*>> series;
  for (const RenewalRow& r : rows)
    if (r.eps > 0.0 && r.abs_error > 0.0) series[{r.lambda, r.vertex}].push_back(&r);

  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                  "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - margin / 3
      << "\" text-anchor=\"middle\" font-size=\"14\">log10 eps</text>\n";
  svg << "<text x=\"" << margin / 3 << "\" y=\"" << height / 2 << "\" text-anchor=\"middle\" "
      << "font-size=\"14\" transform=\"rotate(-90 " << margin / 3 << " " << height / 2
      << ")\">log10 abs_error</text>\n";
  int color = 0;
  int legend_y = margin;
  for (auto& [key, pts] : series) {
    std::sort(pts.begin(), pts.end(),
              [](const RenewalRow* a, const RenewalRow* b) { return a->eps < b->eps; });
    const char* stroke = kColors[color++ % 8];
    svg << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (const RenewalRow* r : pts)
      svg << px(std::log10(r->eps)) << ',' << py(std::log10(r->abs_error)) << ' ';
    svg << "\"/>\n";
    for (const RenewalRow* r : pts)
      svg << "<circle cx=\"" << px(std::log10(r->eps)) << "\" cy=\""
          << py(std::log10(r->abs_error)) << "\" r=\"3\" fill=\"" << stroke << "\"/>\n";
    svg << "<text x=\"" << width - margin + 5 << "\" y=\"" << legend_y
        << "\" font-size=\"11\" fill=\"" << stroke << "\">l=" << key.first << " v=" << key.second
        << "</text>\n";
    legend_y += 14;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace walshgraph
