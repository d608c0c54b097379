#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "paudit/bundled_data.hpp"
#include "paudit/stats.hpp"

namespace paudit {

enum class FreqBucket { low, moderate, high };

struct CloudEntry {
  std::string term;
  double size_weight = 0.0;  // |effect| normalized to [0, 1]
  FreqBucket bucket = FreqBucket::low;
  int sign = 1;
};

// Significant features of a table split by effect sign, sized by normalized
// |effect|, colored by corpus-frequency tercile over the significant set,
// truncated to max_terms per sign. Empty significant set -> empty list.
std::vector<CloudEntry> wordcloud_data(const EffectTable& table,
                                       int max_terms = 25);

struct CloudLayoutParams {
  double width = 800.0;
  double height = 500.0;
  double font_min = 11.0;
  double font_max = 46.0;
  std::uint64_t seed = 0;
  int max_placement_steps = 4000;
};

struct PlacedEntry {
  CloudEntry entry;
  double x = 0.0;  // text anchor (left baseline)
  double y = 0.0;
  double box_x = 0.0;  // bounding box
  double box_y = 0.0;
  double box_w = 0.0;
  double box_h = 0.0;
  double font_size = 0.0;
};

// Deterministic seeded spiral layout with non-overlapping boxes. Entries
// that cannot be placed are dropped with a stderr warning.
std::vector<PlacedEntry> layout_cloud(const std::vector<CloudEntry>& entries,
                                      const CloudLayoutParams& params);

// Standalone SVG; one text node per placed entry.
std::string render_svg(const std::vector<CloudEntry>& entries,
                       const CloudLayoutParams& params);

struct GridCell {
  enum class State { value, ns, absent };
  State state = State::absent;
  double value = 0.0;

  static GridCell of(double v) { return {State::value, v}; }
  static GridCell not_significant() { return {State::ns, 0.0}; }
};

// A labeled table; non-significant cells print as `ns`, structurally absent
// ones as `-`.
struct ResultGrid {
  std::string name;
  std::vector<std::string> row_labels;
  std::vector<std::string> col_labels;
  std::vector<std::vector<GridCell>> cells;
};

enum class TableFormat { csv, json, markdown };

TableFormat table_format_from_name(const std::string& name);
std::string format_grid(const ResultGrid& grid, TableFormat format);

// Diff of live results against the bundled published values; divergence is
// reported, never failed on. Keys are (table, row, col); absent live cells
// are reported as missing.
struct ReplicationDiffRow {
  std::string table;
  std::string row;
  std::string col;
  std::optional<double> reference;
  std::optional<double> live;       // nullopt -> measured but not significant
  bool live_provided = false;       // false -> the cell was never measured
};

std::vector<ReplicationDiffRow> replication_diff(
    const std::map<std::string, std::optional<double>>& live_values);
std::string replication_diff_csv(const std::vector<ReplicationDiffRow>& rows);

// results/<study>/<run-id>/ persistence.
struct RunManifest {
  std::string study;
  std::string run_id;
  std::string config_fingerprint;
  std::uint64_t seed = 0;
  double alpha = 0.05;
  std::vector<std::string> files;
};

std::string study_dir(const std::string& results_root, const std::string& study,
                      const std::string& run_id);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);
void write_manifest(const std::string& dir, const RunManifest& manifest);

}  // namespace paudit
