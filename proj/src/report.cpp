#include "chgh/report.hpp"

#include <algorithm>
#include <sstream>

namespace chgh {

namespace {

size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (size_t j = 1; j <= b.size(); ++j) {
      size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

struct Panel {
  std::string skill;
  std::vector<double> demand;
  std::vector<double> supply;
  std::string predicted_demand;
  std::string predicted_supply;
};

// Minimal hand-rolled SVG: one panel per requested skill, demand and supply
// share curves over the full axis, prediction named in the caption.
std::string render_svg(const std::vector<Panel>& panels) {
  const int width = 640, panel_h = 220, margin = 46;
  const int plot_w = width - 2 * margin, plot_h = panel_h - 2 * margin;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
      << panels.size() * panel_h << "\">\n";
  int offset_y = 0;
  for (const auto& p : panels) {
    double vmax = 1e-9;
    for (double v : p.demand) vmax = std::max(vmax, v);
    for (double v : p.supply) vmax = std::max(vmax, v);
    const size_t n = p.demand.size();
    auto x_at = [&](size_t t) {
      return margin + (n > 1 ? plot_w * static_cast<double>(t) / (n - 1) : 0.0);
    };
    auto y_at = [&](double v) { return offset_y + margin + plot_h * (1.0 - v / vmax); };
    auto polyline = [&](const std::vector<double>& series, const char* color,
                        const char* dash) {
      svg << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
          << (dash ? std::string(" stroke-dasharray=\"") + dash + "\"" : "") << " points=\"";
      for (size_t t = 0; t < series.size(); ++t)
        svg << x_at(t) << ',' << y_at(series[t]) << (t + 1 < series.size() ? " " : "");
      svg << "\"/>\n";
    };
    svg << "  <rect x=\"" << margin << "\" y=\"" << offset_y + margin << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#999\"/>\n";
    polyline(p.demand, "#1f77b4", nullptr);
    polyline(p.supply, "#d62728", "4,3");
    svg << "  <text x=\"" << margin << "\" y=\"" << offset_y + margin - 24
        << "\" font-family=\"sans-serif\" font-size=\"14\">" << p.skill << "</text>\n";
    svg << "  <text x=\"" << margin << "\" y=\"" << offset_y + margin - 8
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555\">"
        << "next step: demand " << p.predicted_demand << ", supply " << p.predicted_supply
        << " &#8212; demand solid, supply dashed</text>\n";
    svg << "  <text x=\"" << margin - 6 << "\" y=\"" << offset_y + margin + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">"
        << format_double(vmax).substr(0, 6) << "</text>\n";
    svg << "  <text x=\"" << margin - 6 << "\" y=\"" << offset_y + margin + plot_h
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">0</text>\n";
    offset_y += panel_h;
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace

std::vector<std::string> near_matches(const std::string& query,
                                      const std::vector<std::string>& names, size_t max_out) {
  std::vector<std::pair<size_t, std::string>> scored;
  for (const auto& n : names) scored.emplace_back(edit_distance(query, n), n);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<std::string> out;
  for (const auto& [dist, name] : scored) {
    if (out.size() >= max_out) break;
    if (dist <= std::max<size_t>(3, query.size() / 2)) out.push_back(name);
  }
  return out;
}

void render_report(const ReportRequest& request, std::ostream& log) {
  namespace fs = std::filesystem;
  CorpusData data = load_corpus_dir(request.data_dir);
  auto net = load_checkpoint(request.checkpoint_dir, data);
  const ModelConfig& cfg = net->config();

  // Metrics table: ablation rows when available, otherwise this checkpoint.
  std::ostringstream table;
  if (request.ablation_csv && fs::exists(*request.ablation_csv)) {
    table << read_text_file(*request.ablation_csv);
  } else {
    EvalReport eval = evaluate_split(*net, data, "test");
    table << "variant,acc,f1,auc,jacc\n";
    table << variant_name(cfg.variant) << ','
          << format_double(0.5 * (eval.supply.accuracy + eval.demand.accuracy)) << ','
          << format_double(0.5 * (eval.supply.weighted_f1 + eval.demand.weighted_f1)) << ','
          << format_double(0.5 * (eval.supply.auc + eval.demand.auc)) << ','
          << format_double(eval.joint) << '\n';
  }
  atomic_write_file(request.table_path, table.str());
  log << "wrote " << request.table_path.string() << "\n";

  if (request.skills.empty()) return;

  std::string ext = request.image_path.extension().string();
  if (ext != ".svg")
    throw UserError("unsupported image extension \"" + ext + "\" (supported: .svg)");

  // Predictions for the final available step.
  const int last_target = data.n_steps() - 1;
  WindowBatch batch = make_batch(data, last_target, cfg.min_seq_len);
  nn::Graph g;
  ForwardResult fwd = net->forward(g, batch, /*training=*/false, nullptr);
  auto pred_s = argmax_rows(fwd.pred_supply.value());
  auto pred_d = argmax_rows(fwd.pred_demand.value());

  std::vector<Panel> panels;
  for (const auto& name : request.skills) {
    auto id = data.vocab.find(name);
    if (!id) {
      auto suggestions = near_matches(name, data.vocab.names());
      std::string msg = "unknown skill \"" + name + "\"";
      if (!suggestions.empty()) {
        msg += "; closest matches:";
        for (const auto& s : suggestions) msg += " " + s;
      }
      throw UserError(msg);
    }
    Panel panel;
    panel.skill = name;
    for (int t = 0; t < data.n_steps(); ++t) {
      panel.demand.push_back(data.demand.values(*id, t));
      panel.supply.push_back(data.supply.values(*id, t));
    }
    panel.predicted_demand = trend_class_name(pred_d[*id], cfg.n_classes);
    panel.predicted_supply = trend_class_name(pred_s[*id], cfg.n_classes);
    panels.push_back(std::move(panel));
  }
  atomic_write_file(request.image_path, render_svg(panels));
  log << "wrote " << request.image_path.string() << " (" << panels.size() << " panels)\n";
}

}  // namespace chgh
