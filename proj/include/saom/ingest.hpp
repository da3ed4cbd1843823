#ifndef SAOM_INGEST_HPP
#define SAOM_INGEST_HPP

#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "saom/errors.hpp"
#include "saom/network.hpp"

namespace saom {

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

inline std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace detail

// Whitespace-separated n x n 0/1 matrix, one row per line. Blank lines
// and '#' comment lines are skipped.
inline DirectedNetwork read_adjacency(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(path + ": cannot open");
  std::vector<std::vector<int>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::vector<int> row;
    for (const std::string& tok : detail::split_ws(t)) {
      if (tok == "0")
        row.push_back(0);
      else if (tok == "1")
        row.push_back(1);
      else
        throw IngestError(path + ":" + std::to_string(lineno) + ": expected 0 or 1, got '" + tok + "'");
    }
    rows.push_back(std::move(row));
  }
  const int n = static_cast<int>(rows.size());
  if (n < 2) throw IngestError(path + ": adjacency matrix needs at least 2 rows");
  for (int i = 0; i < n; ++i)
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != n)
      throw IngestError(path + ": matrix is not square (row " + std::to_string(i + 1) + " has " +
                        std::to_string(rows[static_cast<std::size_t>(i)].size()) + " entries, expected " +
                        std::to_string(n) + ")");
  DirectedNetwork net(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) {
        if (i == j)
          throw IngestError(path + ": diagonal entry (" + std::to_string(i + 1) + "," +
                            std::to_string(j + 1) + ") is 1; self-ties are not allowed");
        net.set_tie(i, j, true);
      }
  return net;
}

inline void write_adjacency(const std::string& path, const DirectedNetwork& net) {
  std::ofstream out(path);
  if (!out) throw IngestError(path + ": cannot write");
  const int n = net.size();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j) out << ' ';
      out << (net.tie(i, j) ? '1' : '0');
    }
    out << '\n';
  }
}

// One actor label per line.
inline std::vector<std::string> read_actor_labels(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IngestError(path + ": cannot open");
  std::vector<std::string> labels;
  std::string line;
  while (std::getline(in, line)) {
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    labels.push_back(t);
  }
  if (labels.size() < 2) throw IngestError(path + ": need at least 2 actor labels");
  return labels;
}

// Two-column `actor_id,value` file with a header row. Every actor must
// appear exactly once.
inline std::vector<double> read_covariate_values(const std::string& path,
                                                 const std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) throw IngestError(path + ": cannot open");
  std::map<std::string, int> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index[labels[i]] = static_cast<int>(i);

  std::vector<double> values(labels.size());
  std::vector<bool> seen(labels.size(), false);
  std::string line;
  int lineno = 0;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!header_skipped) {
      header_skipped = true;  // first data-ish line is the header
      continue;
    }
    const std::size_t comma = t.find(',');
    if (comma == std::string::npos)
      throw IngestError(path + ":" + std::to_string(lineno) + ": expected 'actor_id,value'");
    const std::string id = detail::trim(t.substr(0, comma));
    const std::string val = detail::trim(t.substr(comma + 1));
    auto it = index.find(id);
    if (it == index.end())
      throw IngestError(path + ":" + std::to_string(lineno) + ": unknown actor id '" + id + "'");
    if (seen[static_cast<std::size_t>(it->second)])
      throw IngestError(path + ":" + std::to_string(lineno) + ": duplicate actor id '" + id + "'");
    try {
      std::size_t used = 0;
      values[static_cast<std::size_t>(it->second)] = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
    } catch (const std::exception&) {
      throw IngestError(path + ":" + std::to_string(lineno) + ": bad numeric value '" + val + "'");
    }
    seen[static_cast<std::size_t>(it->second)] = true;
  }
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (!seen[i]) throw IngestError(path + ": no value for actor '" + labels[i] + "'");
  return values;
}

inline void write_covariate(const std::string& path, const std::vector<std::string>& labels,
                            const std::vector<double>& values) {
  std::ofstream out(path);
  if (!out) throw IngestError(path + ": cannot write");
  out << "actor_id,value\n";
  out.precision(17);
  for (std::size_t i = 0; i < labels.size(); ++i) out << labels[i] << ',' << values[i] << '\n';
}

struct CovariateDef {
  std::string name;
  std::string file;
  bool center = false;
  std::optional<std::pair<double, double>> declared_range;  // raw scale
};

// Builds the observed panel: >= 2 waves of equal size, covariates
// centered/range-checked as declared. Simulation start states may pass
// min_waves = 1.
inline NetworkPanel ingest_panel(const std::vector<std::string>& wave_files,
                                 const std::vector<CovariateDef>& covariate_defs,
                                 const std::optional<std::string>& actors_file,
                                 std::size_t min_waves = 2) {
  if (wave_files.size() < min_waves)
    throw IngestError("a panel needs at least " + std::to_string(min_waves) + " wave file(s)");
  if (wave_files.empty()) throw IngestError("no wave files given");
  std::vector<DirectedNetwork> waves;
  waves.reserve(wave_files.size());
  for (const std::string& f : wave_files) waves.push_back(read_adjacency(f));
  const int n = waves.front().size();
  for (std::size_t m = 1; m < waves.size(); ++m)
    if (waves[m].size() != n)
      throw IngestError(wave_files[m] + ": wave has " + std::to_string(waves[m].size()) +
                        " actors, expected " + std::to_string(n));

  std::vector<std::string> labels;
  if (actors_file) {
    labels = read_actor_labels(*actors_file);
    if (static_cast<int>(labels.size()) != n)
      throw IngestError(*actors_file + ": " + std::to_string(labels.size()) +
                        " labels for " + std::to_string(n) + " actors");
  } else {
    for (int i = 0; i < n; ++i) labels.push_back(std::to_string(i + 1));
  }

  CovariateSet covs;
  for (const CovariateDef& def : covariate_defs) {
    if (covs.count(def.name)) throw IngestError("duplicate covariate '" + def.name + "'");
    std::vector<double> values = read_covariate_values(def.file, labels);
    covs.emplace(def.name,
                 ActorCovariate::from_values(std::move(values), def.center, def.declared_range));
  }
  return NetworkPanel(std::move(waves), std::move(covs), std::move(labels));
}

// Writes a panel as wave_1.txt .. wave_K.txt plus one covariate file per
// covariate (values on the analysis scale, uncentered on write) and a
// panel.cfg snippet that re-ingests to the identical panel.
inline void write_panel(const std::string& dir, const NetworkPanel& panel) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  std::ostringstream cfg;
  cfg.precision(17);
  cfg << "[panel]\n";
  for (int m = 0; m < panel.n_waves(); ++m) {
    const std::string f = "wave_" + std::to_string(m + 1) + ".txt";
    write_adjacency((fs::path(dir) / f).string(), panel.wave(m));
    cfg << "wave = " << f << "\n";
  }
  {
    std::ofstream out((fs::path(dir) / "actors.txt").string());
    for (const std::string& l : panel.actor_labels()) out << l << '\n';
  }
  cfg << "actors = actors.txt\n";
  for (const auto& [name, cov] : panel.covariates()) {
    const std::string f = "covariate_" + name + ".txt";
    write_covariate((fs::path(dir) / f).string(), panel.actor_labels(), cov.values());
    cfg << "\n[covariate " << name << "]\nfile = " << f << "\n";
    cfg << "range = " << cov.range_min() << " " << cov.range_max() << "\n";
  }
  std::ofstream out((fs::path(dir) / "panel.cfg").string());
  out << cfg.str();
}

}  // namespace saom

#endif
