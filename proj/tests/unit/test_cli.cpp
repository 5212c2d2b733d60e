#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace ehdg::cli {
namespace {

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ehdg_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string usage_key(const std::vector<std::string>& args, const char* env = nullptr) {
  try {
    parse_config(args, env);
  } catch (const UsageError& e) {
    return e.key();
  }
  return "<none>";
}

TEST(ParseConfig, ExampleSettings) {
  const RunConfig c = parse_config({"solve", "case=transport2d-smooth", "nel=32", "p=4", "tol=1e-10"});
  EXPECT_EQ(c.command, Command::solve);
  EXPECT_EQ(c.case_id, "transport2d-smooth");
  EXPECT_EQ(c.nel, 32u);
  EXPECT_EQ(c.p, 4);
  EXPECT_EQ(c.tol, 1e-10);
}

TEST(ParseConfig, DefaultsFilled) {
  const RunConfig c = parse_config({"solve", "case=transport2d-smooth"});
  EXPECT_EQ(c.nel, 16u);
  EXPECT_EQ(c.p, 1);
  EXPECT_EQ(c.tol, 1e-10);
  EXPECT_FALSE(c.stopping.has_value());
  EXPECT_EQ(c.max_iter, 0u);
  EXPECT_EQ(c.out, ".");
}

TEST(ParseConfig, BadValuesNameTheKey) {
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth", "p=-1"}), "p");
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth", "nel=abc"}), "nel");
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth", "nel=0"}), "nel");
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth", "tol=-1e-3"}), "tol");
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth", "dt=0"}), "dt");
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth", "stopping=never"}), "stopping");
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth", "colour=red"}), "colour");
  EXPECT_EQ(usage_key({"solve", "case=nonexistent"}), "case");
  EXPECT_EQ(usage_key({"solve", "nel=4"}), "case");
  EXPECT_EQ(usage_key({"study"}), "case");
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth", "nels=4,x"}), "nels");
  EXPECT_EQ(usage_key({"solve", "case=transport2d-smooth"}, "zero"), kWorkersEnv);
  EXPECT_EQ(usage_key({"jump"}), "command line");
  EXPECT_EQ(usage_key({}), "command line");
}

TEST(ParseConfig, TablesAndVerifyNeedNoCase) {
  EXPECT_EQ(parse_config({"tables"}).command, Command::tables);
  EXPECT_EQ(parse_config({"verify"}).command, Command::verify);
}

TEST(ParseConfig, FileThenEnvironmentThenCommandLine) {
  const fs::path dir = scratch_dir("precedence");
  const fs::path cfg = dir / "run.cfg";
  {
    std::ofstream f(cfg);
    f << "# steady smooth case\n"
      << "case = transport2d-smooth\n"
      << "\n"
      << "nel=8   # per axis\n"
      << "p=2\n"
      << "workers=2\n"
      << "stopping=trace-residual\n";
  }
  const RunConfig a = parse_config({"solve", "--config", cfg.string()});
  EXPECT_EQ(a.nel, 8u);
  EXPECT_EQ(a.p, 2);
  EXPECT_EQ(a.workers, 2);
  EXPECT_EQ(a.stopping, StoppingMode::trace_residual);

  const RunConfig b = parse_config({"solve", "--config", cfg.string(), "p=3"}, "5");
  EXPECT_EQ(b.p, 3);
  EXPECT_EQ(b.workers, 5);

  const RunConfig c = parse_config({"solve", "-c", cfg.string(), "p=3", "--p", "4", "workers=1"}, "5");
  EXPECT_EQ(c.p, 4);
  EXPECT_EQ(c.workers, 1);
  EXPECT_TRUE(c.is_set("p"));
  EXPECT_FALSE(c.is_set("dt"));
}

TEST(ParseConfig, ConfigFileErrorsNameTheKey) {
  RunConfig c;
  try {
    apply_config_text(c, "nel=4\nmax_iter=-3\n");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_EQ(e.key(), "max_iter");
  }
  try {
    apply_config_text(c, "just words\n");
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_EQ(e.key(), "just words");
  }
  EXPECT_EQ(usage_key({"solve", "--config", "/nonexistent/ehdg.cfg"}), "command line");
}

TEST(ParseConfig, Lists) {
  const RunConfig c = parse_config({"study", "case=transport2d-smooth", "nels=2, 4,8", "orders=1,3"});
  EXPECT_EQ(c.nels, (std::vector<std::size_t>{2, 4, 8}));
  EXPECT_EQ(c.orders, (std::vector<int>{1, 3}));
}

TEST(Run, SolveWritesLogAndField) {
  const fs::path dir = scratch_dir("solve");
  RunConfig c = parse_config({"solve", "case=transport2d-smooth", "nel=4", "p=2", "out=" + dir.string()});
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kExitOk) << err.str();
  const std::string log = slurp(dir / "convergence_log.csv");
  EXPECT_EQ(log.substr(0, log.find('\n')), "iteration,error_vs_exact,successive_diff,skeleton_norm");
  const std::string field = slurp(dir / "field.txt");
  EXPECT_NE(field.find("dim 2\n"), std::string::npos);
  EXPECT_NE(field.find("nel 4 4\n"), std::string::npos);
  EXPECT_NE(field.find("p 2\n"), std::string::npos);
  // Header lines plus one row per element.
  std::size_t rows = 0;
  std::istringstream in(field);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && std::isdigit(static_cast<unsigned char>(line[0]))) ++rows;
  }
  EXPECT_EQ(rows, 16u);
}

TEST(Run, NonConvergenceExitStatusKeepsTheLog) {
  const fs::path dir = scratch_dir("nonconv");
  RunConfig c = parse_config({"solve", "case=transport2d-smooth", "nel=8", "max_iter=3", "out=" + dir.string()});
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kExitNonConvergence);
  const std::string log = slurp(dir / "convergence_log.csv");
  EXPECT_EQ(std::count(log.begin(), log.end(), '\n'), 4);
}

TEST(Run, ShallowSolveWritesSteps) {
  const fs::path dir = scratch_dir("shallow");
  RunConfig c = parse_config({"solve", "case=shallow-standing-wave", "nel=4", "steps=3", "out=" + dir.string()});
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kExitOk) << err.str();
  const std::string steps = slurp(dir / "steps.csv");
  EXPECT_EQ(steps.substr(0, steps.find('\n')), "step,time,iterations,l2_error");
  EXPECT_EQ(std::count(steps.begin(), steps.end(), '\n'), 4);
  EXPECT_NE(slurp(dir / "field.txt").find("fields phi u v"), std::string::npos);
}

TEST(Run, ErrorDifferenceWithoutExactSolutionIsAUsageError) {
  const fs::path dir = scratch_dir("noexact");
  RunConfig c = parse_config(
      {"solve", "case=transport2d-discontinuous", "nel=2", "stopping=error-difference", "out=" + dir.string()});
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kExitUsage);
}

TEST(Run, VerifyPassesOnTwoByTwo) {
  RunConfig c = parse_config({"verify"});
  std::ostringstream out, err;
  EXPECT_EQ(run(c, out, err), kExitOk) << out.str() << err.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos);
  EXPECT_NE(out.str().find("PASS transport3d-gaussian oracle-equivalence"), std::string::npos);
}

TEST(Run, StudyAndTablesCsvAreDeterministic) {
  auto produce = [](const std::string& name, int workers) {
    const fs::path dir = scratch_dir(name);
    std::ostringstream out, err;
    RunConfig study = parse_config({"study", "case=transport2d-smooth", "nels=2,4", "orders=1,2", "max_iter=2000",
                                    "workers=" + std::to_string(workers), "out=" + dir.string()});
    EXPECT_EQ(run(study, out, err), kExitOk) << err.str();
    RunConfig tables = parse_config({"tables", "nels=2", "orders=1", "steps=2", "max_iter=2000",
                                     "workers=" + std::to_string(workers), "out=" + dir.string()});
    EXPECT_EQ(run(tables, out, err), kExitOk) << err.str();
    return slurp(dir / "rate_table.csv") + slurp(dir / "table1.csv") + slurp(dir / "table2.csv");
  };
  const std::string a = produce("det_a", 1);
  const std::string b = produce("det_b", 1);
  const std::string c = produce("det_c", 3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_NE(a.find("case,nel,p,l2_error,order,iterations"), std::string::npos);
  EXPECT_NE(a.find("case,nel,p,iterations"), std::string::npos);
  EXPECT_NE(a.find("case,nel,p,dt,iterations"), std::string::npos);
  EXPECT_NE(a.find("transport3d-steady,8,1,"), std::string::npos);
}

TEST(MainEntry, ExitCodes) {
  std::ostringstream out, err;
  std::vector<std::string> help{"ehdg", "--help"};
  std::vector<char*> argv;
  for (auto& s : help) argv.push_back(s.data());
  EXPECT_EQ(main_entry(static_cast<int>(argv.size()), argv.data(), out, err), kExitOk);
  EXPECT_NE(out.str().find("solve"), std::string::npos);

  std::vector<std::string> bad{"ehdg", "solve", "case=transport2d-smooth", "p=-1"};
  argv.clear();
  for (auto& s : bad) argv.push_back(s.data());
  EXPECT_EQ(main_entry(static_cast<int>(argv.size()), argv.data(), out, err), kExitUsage);
  EXPECT_NE(err.str().find("p:"), std::string::npos);
}

}  // namespace
}  // namespace ehdg::cli
