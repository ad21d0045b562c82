#include "maxboot/error.hpp"
#include "maxboot/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace maxboot {

namespace {

using nlohmann::json;

constexpr const char* kCsvHeader = "design,rho,n,d,method,alpha,rate,mc_se,trials,seed,predicted,seconds";

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

double rounded(double x) { return std::stod(num(x)); }

/// RFC 4180 field quoting.
std::string quoted(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  bool in_quotes = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (in_quotes) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur.push_back('"');
        ++i;
      } else if (c == '"') {
        in_quotes = false;
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (in_quotes) throw ValidationError("unterminated quoted field: " + line);
  out.push_back(cur);
  return out;
}

double to_double(const std::string& s, const char* field) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("malformed ") + field + " value '" + s + "'");
  }
}

long long to_int(const std::string& s, const char* field) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("malformed ") + field + " value '" + s + "'");
  }
}

std::uint64_t to_u64(const std::string& s, const char* field) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError(std::string("malformed ") + field + " value '" + s + "'");
  }
}

std::string csv(const RejectionReport& r) {
  std::ostringstream os;
  os << kCsvHeader << '\n';
  for (const auto& row : r.rows) {
    os << quoted(row.design) << ',' << num(row.rho) << ',' << row.n << ',' << row.d << ',' << quoted(row.method) << ','
       << num(row.alpha) << ',' << num(row.rate) << ',' << num(row.mc_se) << ',' << row.trials << ',' << row.seed
       << ',' << (row.predicted ? num(*row.predicted) : "") << ',' << num(row.seconds) << '\n';
  }
  return os.str();
}

json row_json(const ReportRow& row) {
  json j;
  j["design"] = row.design;
  j["rho"] = rounded(row.rho);
  j["n"] = row.n;
  j["d"] = row.d;
  j["method"] = row.method;
  j["alpha"] = rounded(row.alpha);
  j["rate"] = rounded(row.rate);
  j["mc_se"] = rounded(row.mc_se);
  j["trials"] = row.trials;
  j["seed"] = row.seed;
  j["predicted"] = row.predicted ? json(rounded(*row.predicted)) : json(nullptr);
  j["seconds"] = rounded(row.seconds);
  return j;
}

RejectionReport parse_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ValidationError("empty report");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw ValidationError("unexpected report header: " + line);
  RejectionReport r;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    const auto f = split(line, ',');
    if (f.size() != 12) throw ValidationError("report row has " + std::to_string(f.size()) + " fields: " + line);
    ReportRow row;
    row.design = f[0];
    row.rho = to_double(f[1], "rho");
    row.n = static_cast<int>(to_int(f[2], "n"));
    row.d = static_cast<int>(to_int(f[3], "d"));
    row.method = f[4];
    row.alpha = to_double(f[5], "alpha");
    row.rate = to_double(f[6], "rate");
    row.mc_se = to_double(f[7], "mc_se");
    row.trials = static_cast<int>(to_int(f[8], "trials"));
    row.seed = to_u64(f[9], "seed");
    if (!f[10].empty()) row.predicted = to_double(f[10], "predicted");
    row.seconds = to_double(f[11], "seconds");
    r.rows.push_back(std::move(row));
  }
  return r;
}

RejectionReport parse_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report JSON: ") + e.what());
  }
  RejectionReport r;
  try {
    r.marginal = j.value("marginal", "");
    if (j.contains("notes")) r.notes = j.at("notes").get<std::vector<std::string>>();
    for (const auto& e : j.at("rows")) {
      ReportRow row;
      row.design = e.at("design").get<std::string>();
      row.rho = e.at("rho").get<double>();
      row.n = e.at("n").get<int>();
      row.d = e.at("d").get<int>();
      row.method = e.at("method").get<std::string>();
      row.alpha = e.at("alpha").get<double>();
      row.rate = e.at("rate").get<double>();
      row.mc_se = e.at("mc_se").get<double>();
      row.trials = e.at("trials").get<int>();
      row.seed = e.at("seed").get<std::uint64_t>();
      if (e.contains("predicted") && !e.at("predicted").is_null()) row.predicted = e.at("predicted").get<double>();
      row.seconds = e.at("seconds").get<double>();
      r.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed report JSON: ") + e.what());
  }
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return os.str();
}

}  // namespace

ReportFormat parse_format(const std::string& token) {
  if (token == "csv") return ReportFormat::csv;
  if (token == "json") return ReportFormat::json;
  throw ValidationError("unknown format '" + token + "' (csv | json)");
}

std::string format_report(const RejectionReport& report, ReportFormat format) {
  if (format == ReportFormat::csv) return csv(report);
  json j;
  j["marginal"] = report.marginal;
  j["notes"] = report.notes;
  j["rows"] = json::array();
  for (const auto& row : report.rows) j["rows"].push_back(row_json(row));
  return j.dump(2) + "\n";
}

RejectionReport parse_report(const std::string& text, ReportFormat format) {
  return format == ReportFormat::csv ? parse_csv(text) : parse_json(text);
}

void emit_report(const RejectionReport& report, ReportFormat format, const std::string& path) {
  const std::string text = format_report(report, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failure on '" + path + "'");
}

RejectionReport read_report(const std::string& path, ReportFormat format) {
  return parse_report(read_file(path), format);
}

std::string format_predictions(const ExperimentConfig& cfg, const std::vector<PredictionRow>& rows,
                               ReportFormat format) {
  if (format == ReportFormat::csv) {
    std::ostringstream os;
    os << "design,rho,n,d,method,alpha,gamma,predicted,q_term,r_term\n";
    for (const auto& r : rows)
      os << design_token(cfg.design) << ',' << num(cfg.rho) << ',' << cfg.n << ',' << cfg.d << ',' << quoted(r.method) << ','
         << num(r.alpha) << ',' << num(r.gamma) << ',' << num(r.predicted) << ',' << num(r.q_term) << ','
         << num(r.r_term) << '\n';
    return os.str();
  }
  json j = json::array();
  for (const auto& r : rows) {
    j.push_back({{"design", design_token(cfg.design)},
                 {"rho", rounded(cfg.rho)},
                 {"n", cfg.n},
                 {"d", cfg.d},
                 {"method", r.method},
                 {"alpha", rounded(r.alpha)},
                 {"gamma", rounded(r.gamma)},
                 {"predicted", rounded(r.predicted)},
                 {"q_term", rounded(r.q_term)},
                 {"r_term", rounded(r.r_term)}});
  }
  return j.dump(2) + "\n";
}

ExperimentConfig config_from_json(const std::string& text, ExperimentConfig base) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("config JSON must be an object");
  static const std::vector<std::string> known{"design", "rho",    "n",       "d",      "marginal", "methods",
                                              "b",      "alpha",  "alphas",  "trials", "seed",     "threads",
                                              "budget", "aux_rows", "timing", "predict"};
  try {
    for (const auto& [key, value] : j.items())
      if (std::find(known.begin(), known.end(), key) == known.end())
        throw ValidationError("unknown config key '" + key + "'");
    if (j.contains("design")) base.design = parse_design(j["design"].get<std::string>());
    if (j.contains("rho")) base.rho = j["rho"].get<double>();
    if (j.contains("n")) base.n = j["n"].get<int>();
    if (j.contains("d")) base.d = j["d"].get<int>();
    if (j.contains("marginal")) base.marginal = parse_marginal(j["marginal"].get<std::string>());
    if (j.contains("methods")) base.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("b")) base.b = j["b"].get<int>();
    if (j.contains("alpha")) base.alphas = {j["alpha"].get<double>()};
    if (j.contains("alphas")) base.alphas = j["alphas"].get<std::vector<double>>();
    if (j.contains("trials")) base.trials = j["trials"].get<int>();
    if (j.contains("seed")) base.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) {
      const auto& t = j["threads"];
      base.threads = t.is_string() && t.get<std::string>() == "auto" ? 0 : t.get<int>();
    }
    if (j.contains("budget")) base.budget = j["budget"].get<double>();
    if (j.contains("aux_rows")) base.aux_rows = j["aux_rows"].get<long long>();
    if (j.contains("timing")) base.timing = j["timing"].get<bool>();
    if (j.contains("predict")) base.with_prediction = j["predict"].get<bool>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("bad config value: ") + e.what());
  }
  return base;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  return config_from_json(read_file(path), std::move(base));
}

}  // namespace maxboot
