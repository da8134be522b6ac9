#include <gtest/gtest.h>

#include <json.hpp>
#include <sstream>

#include "boundsci/errors.hpp"
#include "boundsci/problem_io.hpp"

using namespace boundsci;

namespace {

constexpr const char* kHeader = "label,theta_L,theta_U,se_L,se_U,rho,alpha,rho_known_zero\n";

ProblemFile parse(const std::string& text) {
  std::istringstream in(text);
  return read_problem_csv(in);
}

}  // namespace

TEST(SplitCsvRecord, QuotesAndEscapes) {
  EXPECT_EQ(split_csv_record("a,b,,c"), (std::vector<std::string>{"a", "b", "", "c"}));
  EXPECT_EQ(split_csv_record("\"x, y\",2"), (std::vector<std::string>{"x, y", "2"}));
  EXPECT_EQ(split_csv_record("\"say \"\"hi\"\"\",1"),
            (std::vector<std::string>{"say \"hi\"", "1"}));
  EXPECT_EQ(split_csv_record("a,b\r"), (std::vector<std::string>{"a", "b"}));
  EXPECT_THROW(split_csv_record("\"open,1"), InputError);
}

TEST(ReadProblemCsv, ParsesRowsAndSkipsComments) {
  const auto f = parse(std::string("# problems\n\n") + kHeader +
                       "trivial,0,0,1,1,0,0.05,1\n"
                       "# middle comment\n"
                       "\"wide, inverted\",2.5,-1,0.5,2,0.3,0.1,false\n");
  ASSERT_TRUE(f.errors.empty());
  ASSERT_EQ(f.problems.size(), 2u);
  EXPECT_EQ(f.lines, (std::vector<std::size_t>{4, 6}));
  EXPECT_EQ(f.problems[0].label, "trivial");
  EXPECT_TRUE(f.problems[0].rho_known_zero);
  const auto& p = f.problems[1];
  EXPECT_EQ(p.label, "wide, inverted");
  EXPECT_EQ(p.theta_L_hat, 2.5);
  EXPECT_EQ(p.theta_U_hat, -1.0);
  EXPECT_EQ(p.se_L, 0.5);
  EXPECT_EQ(p.se_U, 2.0);
  EXPECT_EQ(p.rho_hat.value(), 0.3);
  EXPECT_EQ(p.alpha, 0.1);
  EXPECT_FALSE(p.rho_known_zero);
}

TEST(ReadProblemCsv, CollectsRowErrorsWithLineNumbers) {
  const auto f = parse(std::string(kHeader) +
                       "ok,0,1,1,1,0,0.05,0\n"
                       "zero_se,0,1,0,1,0,0.05,0\n"
                       "bad_number,0,abc,1,1,0,0.05,0\n"
                       "short,0,1\n"
                       "bad_rho,0,1,1,1,1.5,0.05,0\n"
                       "bad_alpha,0,1,1,1,0,0.7,0\n"
                       "bad_flag,0,1,1,1,0,0.05,maybe\n");
  ASSERT_EQ(f.problems.size(), 1u);
  ASSERT_EQ(f.errors.size(), 6u);
  EXPECT_EQ(f.errors[0].line, 3u);
  EXPECT_NE(f.errors[0].message.find("nonpositive standard error"), std::string::npos);
  EXPECT_EQ(f.errors[1].line, 4u);
  EXPECT_NE(f.errors[1].message.find("theta_U"), std::string::npos);
  EXPECT_EQ(f.errors[2].line, 5u);
  EXPECT_EQ(f.errors[5].line, 8u);
}

TEST(ReadProblemCsv, RejectsMissingOrWrongHeader) {
  EXPECT_THROW(parse(""), InputError);
  EXPECT_THROW(parse("# only comments\n"), InputError);
  EXPECT_THROW(parse("name,lo,hi\n"), InputError);
  EXPECT_THROW(read_problem_file("/nonexistent/problems.csv"), InputError);
}

TEST(WriteProblemCsv, RoundTripsExactly) {
  std::vector<InferenceProblem> problems(2);
  problems[0].label = "a, \"quoted\"";
  problems[0].theta_L_hat = 0.1 + 0.2;
  problems[0].theta_U_hat = 1.0 / 3.0;
  problems[0].se_L = 0.0137;
  problems[0].se_U = 2.0 / 7.0;
  problems[0].rho_hat = Correlation(-0.123456789);
  problems[0].alpha = 0.01;
  problems[1].label = "b";
  problems[1].rho_known_zero = true;
  std::ostringstream out;
  write_problem_csv(out, problems);
  const auto back = parse(out.str());
  ASSERT_TRUE(back.errors.empty());
  ASSERT_EQ(back.problems.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& a = problems[i];
    const auto& b = back.problems[i];
    EXPECT_EQ(a.label, b.label);
    EXPECT_EQ(a.theta_L_hat, b.theta_L_hat);
    EXPECT_EQ(a.theta_U_hat, b.theta_U_hat);
    EXPECT_EQ(a.se_L, b.se_L);
    EXPECT_EQ(a.se_U, b.se_U);
    EXPECT_EQ(a.rho_hat.value(), b.rho_hat.value());
    EXPECT_EQ(a.alpha, b.alpha);
    EXPECT_EQ(a.rho_known_zero, b.rho_known_zero);
  }
}

TEST(ReportWriters, CsvAndJson) {
  InferenceProblem p;
  p.label = "trivial";
  p.rho_known_zero = true;
  ReportRow row{p, build_ci_ma(p), build_ci_ti(p)};
  InferenceProblem q = p;
  q.label = "no_ti";
  ReportRow row2{q, build_ci_ma(q), std::nullopt};
  const std::vector<ReportRow> rows = {row, row2};

  std::ostringstream csv;
  write_report_csv(csv, rows);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "label,theta_L,theta_U,ci_ma_lo,ci_ma_hi,ci_ti_lo,ci_ti_hi,c_hat,rel_length");
  std::getline(in, line);
  EXPECT_EQ(line.rfind("trivial,0,0,-1.644853627,1.644853627,-1.99983", 0), 0u) << line;
  std::getline(in, line);
  EXPECT_EQ(line, "no_ti,0,0,-1.644853627,1.644853627,,,1.644853627,");

  std::ostringstream js;
  write_report_json(js, rows);
  const auto doc = nlohmann::json::parse(js.str());
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[0]["label"], "trivial");
  EXPECT_NEAR(doc[0]["ci_ma"]["upper"].get<double>(), 1.6448536269514722, 1e-12);
  EXPECT_NEAR(doc[0]["ci_pseudo"]["upper"].get<double>(), 1.3859, 1e-4);
  EXPECT_TRUE(doc[0].contains("ci_ti"));
  EXPECT_TRUE(doc[0].contains("rel_length"));
  EXPECT_NEAR(doc[0]["rel_length"].get<double>(), 1.644853627 / 1.99983, 1e-4);
  EXPECT_FALSE(doc[1].contains("ci_ti"));
  EXPECT_EQ(doc[1]["mode"], "point");
}
