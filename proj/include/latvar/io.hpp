#pragma once
// File plumbing: CSV round trips for sparse functions and sequences, the
// flat key=value config format, JSON error records, and the run manifest
// whose hash is embedded in every output file.

#include <map>
#include <string>

#include "latvar/experiments.hpp"

namespace latvar {

// Schema: header x1..xn,re,im; one row per support point in sorted order.
// A nonempty manifest tag is written as a leading "# manifest=..." comment.
void write_grid_csv(const std::string& path, const GridFunction& f,
                    const std::string& manifest_tag = "");
void write_field_csv(const std::string& path, const SortedField& f,
                     const std::string& manifest_tag = "");
GridFunction read_grid_csv(const std::string& path);

// Schema: header x1..xn; one row per point.
void write_points_csv(const std::string& path, const std::vector<Point>& pts, int dim,
                      const std::string& manifest_tag = "");

// Schema: header lambda,value_re,value_im.
void write_sequence_csv(const std::string& path, const SampleSequence& seq,
                        const std::string& manifest_tag = "");
SampleSequence read_sequence_csv(const std::string& path);

// Flat key=value text: one pair per line, '#' comments, duplicate keys
// rejected.  Typed getters throw ValidationError on malformed values.
class KeyValueConfig {
 public:
  static KeyValueConfig from_string(const std::string& text);
  static KeyValueConfig from_file(const std::string& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::string require_string(const std::string& key) const;
  int64_t get_int(const std::string& key, int64_t fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<int64_t> get_int_list(const std::string& key) const;   // comma separated
  std::vector<double> get_double_list(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// experiment configuration from its key=value rendering (defaults filled in)
ExperimentConfig experiment_config_from_kv(const KeyValueConfig& kv);

struct RunManifest {
  int schema_version = 1;
  std::string tool_version;
  std::string subcommand;
  uint64_t seed = 1;
  std::map<std::string, std::string> config;
  std::vector<std::string> outputs;

  std::string to_json() const;  // stable bytes, sorted config keys
  uint64_t hash() const;        // fnv1a64 of to_json()
  std::string hash_hex() const;
};

// machine-readable one-line error record written to stderr by the CLI
std::string error_record_json(const std::string& kind, const std::string& message);

// full experiment report: {manifest, manifest_hash, metrics, references, pass}
std::string experiment_report_json(const RunManifest& manifest, const Report& report, bool pass);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace latvar
