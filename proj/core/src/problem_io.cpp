#include "boundsci/problem_io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "boundsci/errors.hpp"

namespace boundsci {

namespace {

constexpr const char* kHeader[] = {"label", "theta_L", "theta_U", "se_L",
                                   "se_U",  "rho",     "alpha",   "rho_known_zero"};
constexpr std::size_t kColumns = std::size(kHeader);

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

double parse_real(std::string_view text, const char* column) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw InputError(std::string("bad number in column ") + column + ": '" + std::string(text) +
                     "'");
  }
  return value;
}

bool parse_flag(std::string_view text) {
  text = trim(text);
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false" || text.empty()) return false;
  throw InputError("bad flag in column rho_known_zero: '" + std::string(text) + "'");
}

std::string quote_if_needed(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

std::string fmt(const char* format, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, value);
  return buf;
}

nlohmann::json interval_json(const Interval& ci) {
  return {{"lower", ci.lower}, {"upper", ci.upper}, {"empty", ci.empty}};
}

}  // namespace

std::vector<std::string> split_csv_record(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  if (quoted) throw InputError("unterminated quoted field");
  return fields;
}

ProblemFile read_problem_csv(std::istream& in) {
  ProblemFile file;
  std::string line;
  std::size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty() || view.front() == '#') continue;

    if (!have_header) {
      const auto fields = split_csv_record(view);
      bool ok = fields.size() == kColumns;
      for (std::size_t i = 0; ok && i < kColumns; ++i) ok = trim(fields[i]) == kHeader[i];
      if (!ok) {
        throw InputError("line " + std::to_string(line_no) +
                         ": expected header label,theta_L,theta_U,se_L,se_U,rho,alpha,"
                         "rho_known_zero");
      }
      have_header = true;
      continue;
    }

    try {
      const auto fields = split_csv_record(view);
      if (fields.size() != kColumns) {
        throw InputError("expected " + std::to_string(kColumns) + " fields, got " +
                         std::to_string(fields.size()));
      }
      InferenceProblem p;
      p.label = std::string(trim(fields[0]));
      p.theta_L_hat = parse_real(fields[1], "theta_L");
      p.theta_U_hat = parse_real(fields[2], "theta_U");
      p.se_L = parse_real(fields[3], "se_L");
      p.se_U = parse_real(fields[4], "se_U");
      if (!(p.se_L > 0.0) || !(p.se_U > 0.0)) throw InputError("nonpositive standard error");
      p.rho_hat = Correlation(parse_real(fields[5], "rho"));
      p.alpha = parse_real(fields[6], "alpha");
      p.rho_known_zero = parse_flag(fields[7]);
      p.validate();
      file.problems.push_back(std::move(p));
      file.lines.push_back(line_no);
    } catch (const std::exception& e) {
      file.errors.push_back({line_no, e.what()});
    }
  }
  if (!have_header) throw InputError("problem file has no header");
  return file;
}

ProblemFile read_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_problem_csv(in);
}

void write_problem_csv(std::ostream& out, std::span<const InferenceProblem> problems) {
  out << "label,theta_L,theta_U,se_L,se_U,rho,alpha,rho_known_zero\n";
  for (const auto& p : problems) {
    out << quote_if_needed(p.label) << ',' << fmt("%.17g", p.theta_L_hat) << ','
        << fmt("%.17g", p.theta_U_hat) << ',' << fmt("%.17g", p.se_L) << ','
        << fmt("%.17g", p.se_U) << ',' << fmt("%.17g", p.rho_hat.value()) << ','
        << fmt("%.17g", p.alpha) << ',' << (p.rho_known_zero ? 1 : 0) << '\n';
  }
}

std::optional<double> report_relative_length(const ReportRow& row) {
  if (!row.ci_ti || row.ci_ti->empty) return std::nullopt;
  try {
    return relative_excess_length(row.report.ci_ma, *row.ci_ti,
                                  row.problem.theta_U_hat - row.problem.theta_L_hat);
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

void write_report_csv(std::ostream& out, std::span<const ReportRow> rows) {
  out << "label,theta_L,theta_U,ci_ma_lo,ci_ma_hi,ci_ti_lo,ci_ti_hi,c_hat,rel_length\n";
  for (const auto& row : rows) {
    out << quote_if_needed(row.problem.label) << ',' << fmt("%.10g", row.problem.theta_L_hat)
        << ',' << fmt("%.10g", row.problem.theta_U_hat) << ','
        << fmt("%.10g", row.report.ci_ma.lower) << ',' << fmt("%.10g", row.report.ci_ma.upper)
        << ',';
    if (row.ci_ti && !row.ci_ti->empty) {
      out << fmt("%.10g", row.ci_ti->lower) << ',' << fmt("%.10g", row.ci_ti->upper);
    } else {
      out << ',';
    }
    out << ',' << fmt("%.10g", row.report.c_hat) << ',';
    if (const auto rel = report_relative_length(row)) out << fmt("%.6f", *rel);
    out << '\n';
  }
}

void write_report_json(std::ostream& out, std::span<const ReportRow> rows) {
  auto doc = nlohmann::json::array();
  for (const auto& row : rows) {
    const auto& p = row.problem;
    const auto& r = row.report;
    nlohmann::json item = {
        {"label", p.label},
        {"theta_L", p.theta_L_hat},
        {"theta_U", p.theta_U_hat},
        {"se_L", p.se_L},
        {"se_U", p.se_U},
        {"rho", p.rho_hat.value()},
        {"alpha", p.alpha},
        {"rho_known_zero", p.rho_known_zero},
        {"mode", r.mode == CoverageMode::set ? "set" : "point"},
        {"c_hat", r.c_hat},
        {"theta_star_hat", r.theta_star_hat},
        {"sigma_star_se", r.sigma_star_se},
        {"ci_ma", interval_json(r.ci_ma)},
        {"ci_theta_set", interval_json(r.ci_theta_set)},
        {"ci_pseudo", interval_json(r.ci_pseudo)},
    };
    if (row.ci_ti) item["ci_ti"] = interval_json(*row.ci_ti);
    if (const auto rel = report_relative_length(row)) item["rel_length"] = *rel;
    doc.push_back(std::move(item));
  }
  out << doc.dump(2) << '\n';
}

}  // namespace boundsci
