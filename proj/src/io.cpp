#include "otcert/io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "otcert/errors.hpp"

namespace otcert {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim spaces
    std::size_t b = field.find_first_not_of(" \t\r");
    std::size_t e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw input_error(where + ": cannot parse number '" + s + "'");
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line))
    throw input_error(path.string() + ": empty file, header required");
  t.header = split_csv_line(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != t.header.size())
      throw input_error(path.string() + ":" + std::to_string(lineno) +
                        ": expected " + std::to_string(t.header.size()) +
                        " columns");
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields)
      row.push_back(
          parse_double(f, path.string() + ":" + std::to_string(lineno)));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace

DiscreteMeasure read_measure_csv(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  if (t.header.size() < 2 || t.header.back() != "weight")
    throw input_error(path.string() +
                      ": header must be x1,...,xn,weight");
  const int n = int(t.header.size()) - 1;
  std::vector<Vec> pts;
  std::vector<double> w;
  pts.reserve(t.rows.size());
  w.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    Vec p(n);
    for (int i = 0; i < n; ++i) p[i] = row[i];
    pts.push_back(std::move(p));
    w.push_back(row[n]);
  }
  return DiscreteMeasure(std::move(pts), std::move(w));
}

void write_measure_csv(const std::filesystem::path& path,
                       const DiscreteMeasure& m) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path.string() + "'");
  out.precision(17);
  for (int i = 0; i < m.dim(); ++i) out << "x" << (i + 1) << ",";
  out << "weight\n";
  for (int k = 0; k < m.size(); ++k) {
    for (int i = 0; i < m.dim(); ++i) out << m.points[k][i] << ",";
    out << m.weights[k] << "\n";
  }
}

SupportSample read_pairs_csv(const std::filesystem::path& path) {
  CsvTable t = read_csv(path);
  bool has_mass = !t.header.empty() && t.header.back() == "mass";
  int coords = int(t.header.size()) - (has_mass ? 1 : 0);
  if (coords < 2 || coords % 2 != 0)
    throw input_error(path.string() +
                      ": header must be x1..xn,y1..yn[,mass]");
  const int n = coords / 2;
  SupportSample s;
  s.pairs.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    SupportPair p;
    p.x = Vec(n);
    p.y = Vec(n);
    for (int i = 0; i < n; ++i) p.x[i] = row[i];
    for (int i = 0; i < n; ++i) p.y[i] = row[n + i];
    if (has_mass) {
      p.mass = row[2 * n];
      if (!(p.mass > 0.0))
        throw input_error(path.string() + ": pair masses must be positive");
    }
    s.pairs.push_back(std::move(p));
  }
  if (s.pairs.empty())
    throw input_error(path.string() + ": no pairs in file");
  return s;
}

void write_pairs_csv(const std::filesystem::path& path,
                     const SupportSample& sample) {
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path.string() + "'");
  out.precision(17);
  const int n = sample.dim();
  for (int i = 0; i < n; ++i) out << "x" << (i + 1) << ",";
  for (int i = 0; i < n; ++i) out << "y" << (i + 1) << ",";
  out << "mass\n";
  for (const auto& p : sample.pairs) {
    for (int i = 0; i < n; ++i) out << p.x[i] << ",";
    for (int i = 0; i < n; ++i) out << p.y[i] << ",";
    out << p.mass << "\n";
  }
}

TransportPlan read_plan_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw input_error(path.string() + ": invalid JSON: " + e.what());
  }
  if (!j.contains("source_file") || !j.contains("target_file") ||
      !j.contains("entries"))
    throw input_error(path.string() +
                      ": plan JSON needs source_file, target_file, entries");
  auto resolve = [&](const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.is_relative()) fp = path.parent_path() / fp;
    return fp;
  };
  auto src = std::make_shared<DiscreteMeasure>(
      read_measure_csv(resolve(j["source_file"].get<std::string>())));
  auto tgt = std::make_shared<DiscreteMeasure>(
      read_measure_csv(resolve(j["target_file"].get<std::string>())));
  std::vector<PlanEntry> entries;
  for (const auto& e : j["entries"]) {
    if (!e.is_array() || e.size() != 3)
      throw input_error(path.string() + ": entries must be [i,j,mass]");
    entries.push_back({e[0].get<int>(), e[1].get<int>(), e[2].get<double>()});
  }
  return TransportPlan(std::move(src), std::move(tgt), std::move(entries));
}

void write_plan_json(const std::filesystem::path& path,
                     const TransportPlan& plan, const std::string& source_file,
                     const std::string& target_file) {
  nlohmann::json j;
  j["source_file"] = source_file;
  j["target_file"] = target_file;
  auto entries = nlohmann::json::array();
  for (const auto& e : plan.entries)
    entries.push_back(nlohmann::json::array({e.i, e.j, e.mass}));
  j["entries"] = std::move(entries);
  std::ofstream out(path);
  if (!out) throw input_error("cannot write '" + path.string() + "'");
  out << j.dump(2) << "\n";
}

}  // namespace otcert
