#include "paudit/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "paudit/rng.hpp"

namespace paudit {

using nlohmann::json;

std::vector<CloudEntry> wordcloud_data(const EffectTable& table,
                                       int max_terms) {
  std::vector<const EffectResult*> significant;
  for (const auto& r : table.results) {
    if (!r.skipped && r.significant) significant.push_back(&r);
  }
  if (significant.empty()) return {};

  // Frequency terciles over the significant set.
  std::vector<std::size_t> by_freq(significant.size());
  std::iota(by_freq.begin(), by_freq.end(), 0);
  std::sort(by_freq.begin(), by_freq.end(), [&](std::size_t a, std::size_t b) {
    if (significant[a]->corpus_count != significant[b]->corpus_count) {
      return significant[a]->corpus_count < significant[b]->corpus_count;
    }
    return significant[a]->feature < significant[b]->feature;
  });
  std::vector<FreqBucket> buckets(significant.size());
  const std::size_t n = significant.size();
  for (std::size_t rank = 0; rank < n; ++rank) {
    FreqBucket b = FreqBucket::low;
    if (rank * 3 >= 2 * n) {
      b = FreqBucket::high;
    } else if (rank * 3 >= n) {
      b = FreqBucket::moderate;
    }
    buckets[by_freq[rank]] = b;
  }

  double max_abs = 0.0;
  for (const auto* r : significant) {
    max_abs = std::max(max_abs, std::fabs(r->effect));
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::fabs(significant[a]->effect) != std::fabs(significant[b]->effect)) {
      return std::fabs(significant[a]->effect) >
             std::fabs(significant[b]->effect);
    }
    return significant[a]->feature < significant[b]->feature;
  });

  std::vector<CloudEntry> out;
  int pos_taken = 0, neg_taken = 0;
  for (std::size_t i : order) {
    const auto* r = significant[i];
    const int sign = r->effect < 0.0 ? -1 : 1;
    int& taken = sign > 0 ? pos_taken : neg_taken;
    if (taken >= max_terms) continue;
    ++taken;
    CloudEntry e;
    e.term = r->feature;
    e.size_weight = max_abs > 0.0 ? std::fabs(r->effect) / max_abs : 1.0;
    e.bucket = buckets[i];
    e.sign = sign;
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<PlacedEntry> layout_cloud(const std::vector<CloudEntry>& entries,
                                      const CloudLayoutParams& params) {
  std::vector<PlacedEntry> placed;
  Rng rng(params.seed);
  const double cx = params.width / 2.0;
  const double cy = params.height / 2.0;

  auto overlaps = [&](double x, double y, double w, double h) {
    if (x < 0 || y < 0 || x + w > params.width || y + h > params.height) {
      return true;
    }
    for (const auto& p : placed) {
      if (x < p.box_x + p.box_w && p.box_x < x + w && y < p.box_y + p.box_h &&
          p.box_y < y + h) {
        return true;
      }
    }
    return false;
  };

  for (const auto& e : entries) {
    const double font =
        params.font_min + e.size_weight * (params.font_max - params.font_min);
    // Width estimate for a proportional font; keeps the layout text-metric
    // free and deterministic.
    const double w = 0.6 * font * double(e.term.size());
    const double h = font * 1.15;
    const double angle0 = rng.uniform01() * 6.28318530717958648;
    // sqrt spacing sweeps the canvas area-uniformly out to its corners.
    const double max_radius =
        0.5 * std::sqrt(params.width * params.width +
                        params.height * params.height);
    bool done = false;
    for (int step = 0; step < params.max_placement_steps && !done; ++step) {
      const double radius =
          max_radius * std::sqrt(double(step) / params.max_placement_steps);
      const double angle = angle0 + 0.5 * double(step);
      const double x = cx + radius * std::cos(angle) - w / 2.0;
      const double y = cy + radius * std::sin(angle) - h / 2.0;
      if (!overlaps(x, y, w, h)) {
        PlacedEntry p;
        p.entry = e;
        p.box_x = x;
        p.box_y = y;
        p.box_w = w;
        p.box_h = h;
        p.font_size = font;
        p.x = x;
        p.y = y + 0.85 * font;  // baseline inside the box
        placed.push_back(std::move(p));
        done = true;
      }
    }
    if (!done) {
      std::cerr << "wordcloud: no room for '" << e.term
                << "', truncating layout\n";
    }
  }
  return placed;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* bucket_color(FreqBucket b) {
  switch (b) {
    case FreqBucket::low: return "#808080";
    case FreqBucket::moderate: return "#1f77b4";
    case FreqBucket::high: return "#d62728";
  }
  return "#000000";
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string render_svg(const std::vector<CloudEntry>& entries,
                       const CloudLayoutParams& params) {
  if (entries.empty()) {
    throw std::invalid_argument("render_svg: no entries");
  }
  const auto placed = layout_cloud(entries, params);
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(params.width)
     << "\" height=\"" << fmt(params.height) << "\" viewBox=\"0 0 "
     << fmt(params.width) << " " << fmt(params.height) << "\">\n";
  for (const auto& p : placed) {
    os << "  <text x=\"" << fmt(p.x) << "\" y=\"" << fmt(p.y)
       << "\" font-size=\"" << fmt(p.font_size)
       << "\" font-family=\"sans-serif\" fill=\"" << bucket_color(p.entry.bucket)
       << "\">" << xml_escape(p.entry.term) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

TableFormat table_format_from_name(const std::string& name) {
  if (name == "csv") return TableFormat::csv;
  if (name == "json") return TableFormat::json;
  if (name == "markdown" || name == "md") return TableFormat::markdown;
  throw std::invalid_argument("unknown table format: " + name);
}

namespace {

std::string cell_text(const GridCell& c) {
  switch (c.state) {
    case GridCell::State::value: {
      std::ostringstream os;
      os.precision(6);
      os << c.value;
      return os.str();
    }
    case GridCell::State::ns: return "ns";
    case GridCell::State::absent: return "-";
  }
  return "-";
}

}  // namespace

std::string format_grid(const ResultGrid& grid, TableFormat format) {
  std::ostringstream os;
  switch (format) {
    case TableFormat::csv: {
      os << grid.name;
      for (const auto& c : grid.col_labels) os << ',' << c;
      os << '\n';
      for (std::size_t r = 0; r < grid.row_labels.size(); ++r) {
        os << grid.row_labels[r];
        for (std::size_t c = 0; c < grid.col_labels.size(); ++c) {
          os << ',' << cell_text(grid.cells[r][c]);
        }
        os << '\n';
      }
      break;
    }
    case TableFormat::json: {
      json j;
      j["name"] = grid.name;
      j["columns"] = grid.col_labels;
      json rows = json::object();
      for (std::size_t r = 0; r < grid.row_labels.size(); ++r) {
        json row = json::object();
        for (std::size_t c = 0; c < grid.col_labels.size(); ++c) {
          const auto& cell = grid.cells[r][c];
          if (cell.state == GridCell::State::value) {
            row[grid.col_labels[c]] = cell.value;
          } else if (cell.state == GridCell::State::ns) {
            row[grid.col_labels[c]] = "ns";
          } else {
            row[grid.col_labels[c]] = nullptr;
          }
        }
        rows[grid.row_labels[r]] = std::move(row);
      }
      j["rows"] = std::move(rows);
      os << j.dump(2) << '\n';
      break;
    }
    case TableFormat::markdown: {
      os << "| " << grid.name << " |";
      for (const auto& c : grid.col_labels) os << ' ' << c << " |";
      os << "\n|";
      for (std::size_t c = 0; c <= grid.col_labels.size(); ++c) os << "---|";
      os << '\n';
      for (std::size_t r = 0; r < grid.row_labels.size(); ++r) {
        os << "| " << grid.row_labels[r] << " |";
        for (const auto& c : grid.cells[r]) os << ' ' << cell_text(c) << " |";
        os << '\n';
      }
      break;
    }
  }
  return os.str();
}

std::vector<ReplicationDiffRow> replication_diff(
    const std::map<std::string, std::optional<double>>& live_values) {
  std::vector<ReplicationDiffRow> rows;
  for (const auto& ref : reference_values()) {
    ReplicationDiffRow row;
    row.table = ref.table;
    row.row = ref.row;
    row.col = ref.col;
    row.reference = ref.value;
    const std::string key = ref.table + "|" + ref.row + "|" + ref.col;
    auto it = live_values.find(key);
    if (it != live_values.end()) {
      row.live = it->second;
      row.live_provided = true;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string replication_diff_csv(const std::vector<ReplicationDiffRow>& rows) {
  std::ostringstream os;
  os.precision(6);
  os << "table,row,col,reference,live,diff\n";
  for (const auto& r : rows) {
    auto cell = [&](const std::optional<double>& v) {
      return v ? cell_text(GridCell::of(*v)) : std::string("ns");
    };
    os << r.table << ',' << r.row << ',' << r.col << ',' << cell(r.reference)
       << ',' << (r.live_provided ? cell(r.live) : std::string("missing"))
       << ',';
    if (r.reference && r.live) {
      os << (*r.live - *r.reference);
    } else {
      os << "-";
    }
    os << '\n';
  }
  return os.str();
}

std::string study_dir(const std::string& results_root, const std::string& study,
                      const std::string& run_id) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(results_root) / study / run_id;
  fs::create_directories(dir);
  return dir.string();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_manifest(const std::string& dir, const RunManifest& manifest) {
  json j;
  j["study"] = manifest.study;
  j["run_id"] = manifest.run_id;
  j["config_fingerprint"] = manifest.config_fingerprint;
  j["seed"] = manifest.seed;
  j["alpha"] = manifest.alpha;
  j["files"] = manifest.files;
  write_text_file(dir + "/manifest.json", j.dump(2) + "\n");
}

}  // namespace paudit
