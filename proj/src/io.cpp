#include "latvar/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace latvar {

namespace {

using ojson = nlohmann::ordered_json;

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  require(os.good(), "cannot open for writing: " + path);
  return os;
}

void write_csv_prelude(std::ofstream& os, const std::string& manifest_tag) {
  if (!manifest_tag.empty()) os << "# manifest=" << manifest_tag << "\n";
}

void write_point_row(std::ofstream& os, const Point& p) {
  for (int i = 0; i < p.n; ++i) {
    if (i) os << ",";
    os << p.c[static_cast<size_t>(i)];
  }
}

std::string coord_header(int dim) {
  std::string h;
  for (int i = 1; i <= dim; ++i) {
    if (i > 1) h += ",";
    h += "x" + std::to_string(i);
  }
  return h;
}

int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(trim(s), &pos);
    require(pos == trim(s).size(), "trailing characters in " + what);
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError("malformed integer in " + what + ": '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    size_t pos = 0;
    const double v = std::stod(trim(s), &pos);
    require(pos == trim(s).size(), "trailing characters in " + what);
    return v;
  } catch (const ValidationError&) {
    throw;
  } catch (const std::exception&) {
    throw ValidationError("malformed number in " + what + ": '" + s + "'");
  }
}

std::vector<std::string> read_csv_rows(const std::string& path, std::string& header) {
  std::ifstream is(path);
  require(is.good(), "cannot open for reading: " + path);
  std::vector<std::string> rows;
  std::string line;
  bool have_header = false;
  while (std::getline(is, line)) {
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!have_header) {
      header = t;
      have_header = true;
    } else {
      rows.push_back(t);
    }
  }
  require(have_header, "missing header row in " + path);
  return rows;
}

}  // namespace

void write_grid_csv(const std::string& path, const GridFunction& f,
                    const std::string& manifest_tag) {
  std::ofstream os = open_out(path);
  write_csv_prelude(os, manifest_tag);
  os << coord_header(f.dim()) << ",re,im\n";
  for (const Point& p : f.sorted_support()) {
    write_point_row(os, p);
    const cplx v = f.at(p);
    os << "," << fmt_double(v.real()) << "," << fmt_double(v.imag()) << "\n";
  }
  require(os.good(), "write failed: " + path);
}

void write_field_csv(const std::string& path, const SortedField& f,
                     const std::string& manifest_tag) {
  std::ofstream os = open_out(path);
  write_csv_prelude(os, manifest_tag);
  os << coord_header(f.dim()) << ",re,im\n";
  for (size_t i = 0; i < f.points.size(); ++i) {
    write_point_row(os, f.points[i]);
    os << "," << fmt_double(f.values[i].real()) << "," << fmt_double(f.values[i].imag()) << "\n";
  }
  require(os.good(), "write failed: " + path);
}

GridFunction read_grid_csv(const std::string& path) {
  std::string header;
  const std::vector<std::string> rows = read_csv_rows(path, header);
  const std::vector<std::string> cols = split(header, ',');
  require(cols.size() >= 3 && cols[cols.size() - 2] == "re" && cols.back() == "im",
          "grid csv header must end in re,im: " + path);
  const int dim = static_cast<int>(cols.size()) - 2;
  require(dim >= 1 && dim <= kMaxDim, "grid csv dimension out of range: " + path);
  GridFunction f(dim);
  for (const std::string& row : rows) {
    const std::vector<std::string> parts = split(row, ',');
    require(parts.size() == cols.size(), "row width mismatch in " + path);
    Point p = Point::zero(dim);
    for (int i = 0; i < dim; ++i) {
      p.c[static_cast<size_t>(i)] =
          static_cast<int32_t>(parse_int(parts[static_cast<size_t>(i)], path));
    }
    f.set(p, cplx{parse_double(parts[static_cast<size_t>(dim)], path),
                  parse_double(parts[static_cast<size_t>(dim) + 1], path)});
  }
  return f;
}

void write_points_csv(const std::string& path, const std::vector<Point>& pts, int dim,
                      const std::string& manifest_tag) {
  std::ofstream os = open_out(path);
  write_csv_prelude(os, manifest_tag);
  os << coord_header(dim) << "\n";
  for (const Point& p : pts) {
    write_point_row(os, p);
    os << "\n";
  }
  require(os.good(), "write failed: " + path);
}

void write_sequence_csv(const std::string& path, const SampleSequence& seq,
                        const std::string& manifest_tag) {
  std::ofstream os = open_out(path);
  write_csv_prelude(os, manifest_tag);
  os << "lambda,value_re,value_im\n";
  for (size_t i = 0; i < seq.size(); ++i) {
    os << fmt_double(seq.index[i]) << "," << fmt_double(seq.value[i].real()) << ","
       << fmt_double(seq.value[i].imag()) << "\n";
  }
  require(os.good(), "write failed: " + path);
}

SampleSequence read_sequence_csv(const std::string& path) {
  std::string header;
  const std::vector<std::string> rows = read_csv_rows(path, header);
  require(header == "lambda,value_re,value_im", "unexpected sequence csv header: " + path);
  SampleSequence seq;
  for (const std::string& row : rows) {
    const std::vector<std::string> parts = split(row, ',');
    require(parts.size() == 3, "row width mismatch in " + path);
    seq.index.push_back(parse_double(parts[0], path));
    seq.value.push_back(cplx{parse_double(parts[1], path), parse_double(parts[2], path)});
  }
  seq.validate();
  return seq;
}

KeyValueConfig KeyValueConfig::from_string(const std::string& text) {
  KeyValueConfig kv;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const size_t eq = t.find('=');
    require(eq != std::string::npos && eq > 0,
            "config line " + std::to_string(lineno) + " is not key=value");
    const std::string key = trim(t.substr(0, eq));
    const std::string val = trim(t.substr(eq + 1));
    require(!kv.entries_.count(key), "duplicate config key: " + key);
    kv.entries_[key] = val;
  }
  return kv;
}

KeyValueConfig KeyValueConfig::from_file(const std::string& path) {
  return from_string(read_text_file(path));
}

bool KeyValueConfig::has(const std::string& key) const { return entries_.count(key) > 0; }

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

std::string KeyValueConfig::require_string(const std::string& key) const {
  auto it = entries_.find(key);
  require(it != entries_.end(), "missing required config key: " + key);
  return it->second;
}

int64_t KeyValueConfig::get_int(const std::string& key, int64_t fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_int(it->second, "config key " + key);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : parse_double(it->second, "config key " + key);
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ValidationError("config key " + key + " must be true/false/0/1");
}

std::vector<int64_t> KeyValueConfig::get_int_list(const std::string& key) const {
  std::vector<int64_t> out;
  auto it = entries_.find(key);
  if (it == entries_.end() || trim(it->second).empty()) return out;
  for (const std::string& part : split(it->second, ',')) {
    out.push_back(parse_int(part, "config key " + key));
  }
  return out;
}

std::vector<double> KeyValueConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  auto it = entries_.find(key);
  if (it == entries_.end() || trim(it->second).empty()) return out;
  for (const std::string& part : split(it->second, ',')) {
    out.push_back(parse_double(part, "config key " + key));
  }
  return out;
}

ExperimentConfig experiment_config_from_kv(const KeyValueConfig& kv) {
  ExperimentConfig cfg;
  const std::vector<int64_t> coeffs = kv.get_int_list("form.coeffs");
  if (!coeffs.empty()) {
    cfg.form = IntegralForm::diagonal_form(coeffs,
                                           static_cast<int>(kv.get_int("form.degree", 2)));
  }
  cfg.cutoff = Cutoff(kv.get_double("cutoff.r1", cfg.cutoff.r1),
                      kv.get_double("cutoff.r2", cfg.cutoff.r2));
  cfg.variety = kv.get_bool("variety", cfg.variety);
  cfg.ratio = kv.get_double("ratio", cfg.ratio);
  cfg.start = kv.get_int("start", cfg.start);
  cfg.count = static_cast<int>(kv.get_int("count", cfg.count));
  cfg.values = RegularValueSet::progression(kv.get_int("values.offset", cfg.values.offset),
                                            kv.get_int("values.modulus", cfg.values.modulus));
  cfg.ensemble.kind = ensemble_kind_from_name(
      kv.get_string("ensemble.kind", ensemble_kind_name(cfg.ensemble.kind)));
  cfg.ensemble.members = static_cast<int>(kv.get_int("ensemble.members", cfg.ensemble.members));
  cfg.ensemble.support = static_cast<int>(kv.get_int("ensemble.support", cfg.ensemble.support));
  cfg.ensemble.box_radius =
      static_cast<int>(kv.get_int("ensemble.box_radius", cfg.ensemble.box_radius));
  cfg.ensemble.seed = static_cast<uint64_t>(kv.get_int("ensemble.seed", 1));
  cfg.r = kv.get_double("r", cfg.r);
  cfg.p = kv.get_double("p", cfg.p);
  cfg.jump_grid = kv.get_double_list("jump_grid");
  cfg.window = kv.get_int("window", cfg.window);
  cfg.cases = static_cast<int>(kv.get_int("cases", cfg.cases));
  cfg.probes = static_cast<int>(kv.get_int("probes", cfg.probes));
  return cfg;
}

std::string RunManifest::to_json() const {
  ojson j;
  j["schema_version"] = schema_version;
  j["tool_version"] = tool_version;
  j["subcommand"] = subcommand;
  j["seed"] = seed;
  ojson cfg = ojson::object();
  for (const auto& [k, v] : config) cfg[k] = v;  // std::map keeps keys sorted
  j["config"] = cfg;
  j["outputs"] = outputs;
  return j.dump(2);
}

uint64_t RunManifest::hash() const { return fnv1a64(to_json()); }

std::string RunManifest::hash_hex() const {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash()));
  return buf;
}

std::string error_record_json(const std::string& kind, const std::string& message) {
  ojson j;
  j["error"] = kind;
  j["message"] = message;
  return j.dump();
}

std::string experiment_report_json(const RunManifest& manifest, const Report& report, bool pass) {
  ojson j;
  j["manifest"] = ojson::parse(manifest.to_json());
  j["manifest_hash"] = manifest.hash_hex();
  ojson metrics;
  metrics["experiment"] = report.experiment;
  metrics["lambdas"] = report.lambdas;
  metrics["ratios"] = report.ratios;
  metrics["max_ratio"] = report.max_ratio;
  metrics["median_ratio"] = report.median_ratio;
  metrics["q90_ratio"] = report.q90_ratio;
  metrics["notes"] = report.notes;
  j["metrics"] = metrics;
  ojson refs;
  refs["c"] = report.c_constant;
  refs["eta"] = report.eta_constant;
  refs["r_range_ok"] = report.r_range_ok;
  j["references"] = refs;
  j["pass"] = pass;
  return j.dump(2);
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os = open_out(path);
  os << text;
  require(os.good(), "write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream is(path);
  require(is.good(), "cannot open for reading: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace latvar
