#include <doctest.h>

#include <cmath>
#include <sstream>

#include "deltaloop/harness.hpp"
#include "deltaloop/oracle.hpp"

using namespace deltaloop;
using namespace deltaloop::harness;

namespace {

struct Outcome {
  int code;
  std::string csv;
  std::string log;
};

Outcome run(const std::string& cmd, const Json& cfg, RunOptions o = {}) {
  std::ostringstream out, log;
  const int code = execute(cmd, cfg, o, out, log);
  return {code, out.str(), log.str()};
}

// Data rows (non-comment lines after the column header), split on commas.
std::vector<std::vector<std::string>> rows_of(const std::string& csv) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream is(csv);
  std::string line;
  bool header = true;
  while (std::getline(is, line)) {
    if (line.starts_with("#")) continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(cells);
  }
  return rows;
}

std::string header_of(const std::string& csv) {
  std::istringstream is(csv);
  std::string line;
  while (std::getline(is, line))
    if (!line.starts_with("#")) return line;
  return {};
}

const Json kCircle = {{"preset", "circle"}, {"R", 1.0}, {"M", 256}};
const Json kEllipse = {{"preset", "ellipse"}, {"a", 2.0}, {"b", 1.0}, {"M", 512}};

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("number formatting and grids") {
    CHECK(fmt(0.1) == "0.10000000000000001");
    CHECK(fmt(-2.0) == "-2");
    CHECK(fmt(std::nan("")) == "nan");
    CHECK(grid_from_config(Json(3.0)) == std::vector<double>{3.0});
    const auto g = grid_from_config(Json{{"from", 0.0}, {"to", 1.0}, {"count", 5}});
    REQUIRE(g.size() == 5);
    CHECK(g[4] == 1.0);
    CHECK(g[1] == 0.25);
    CHECK_THROWS_AS(grid_from_config(Json{{"from", 0.0}, {"to", 1.0}, {"count", 1}}), ConfigError);
    CHECK_THROWS_AS(grid_from_config(Json("x")), ConfigError);
  }

  TEST_CASE("curve definitions") {
    CHECK(curve_from_config(kCircle).length() == doctest::Approx(2 * M_PI).epsilon(1e-12));
    CHECK(curve_from_config(Json{{"preset", "wiggly"}, {"M", 256}}).total_curvature() ==
          doctest::Approx(-2 * M_PI).epsilon(1e-9));
    // Pure mean curvature -2 pi / L is the circle of radius L / 2 pi.
    const auto k = curve_from_config(Json{{"curvature", {{"L", 4 * M_PI}, {"gamma_coeffs", {{"mean", -0.5}}}}}, {"M", 256}});
    CHECK(k.area() == doctest::Approx(4 * M_PI).epsilon(1e-9));
    Json samples = Json::array();
    for (int i = 0; i < 200; ++i) {
      const double t = 2 * M_PI * i / 200;
      samples.push_back({1.5 * std::cos(t), std::sin(t)});
    }
    const auto s = curve_from_config(Json{{"samples", samples}, {"M", 256}});
    CHECK(s.area() == doctest::Approx(1.5 * M_PI).epsilon(1e-3));
    CHECK_THROWS_AS(curve_from_config(Json{{"preset", "square"}}), ConfigError);
    CHECK_THROWS_AS(curve_from_config(Json{{"M", 64}}), ConfigError);
  }

  TEST_CASE("output carries version, command and config") {
    const Json cfg{{"curve", kCircle}, {"B", Json::array({0.0, 1.0})}, {"n", 2}};
    const auto o = run("spectrum", cfg);
    REQUIRE(o.code == kOk);
    CHECK(o.csv.starts_with("# deltaloop "));
    CHECK(o.csv.find("# command: spectrum") != std::string::npos);
    CHECK(o.csv.find("# config: " + cfg.dump()) != std::string::npos);
    CHECK(header_of(o.csv) == "B,phi,mu_1,mu_2,I_1,I_2");
    const auto r = rows_of(o.csv);
    REQUIRE(r.size() == 2);
    CHECK(std::stod(r[0][2]) == doctest::Approx(-0.25).epsilon(1e-10));
    CHECK(std::stod(r[1][2]) == doctest::Approx(0.0).epsilon(1e-10));
  }

  TEST_CASE("spectrum is symmetric in B and deterministic across job counts") {
    const Json cfg{{"curve", kEllipse}, {"B", {{"from", -1.0}, {"to", 1.0}, {"count", 9}}}, {"n", 3}};
    const auto a = run("spectrum", cfg);
    RunOptions four;
    four.jobs = 4;
    const auto b = run("spectrum", cfg, four);
    REQUIRE(a.code == kOk);
    CHECK(a.csv == b.csv);
    const auto r = rows_of(a.csv);
    for (std::size_t i = 0; i < r.size(); ++i)
      for (int j = 2; j < 5; ++j)
        CHECK(std::stod(r[i][static_cast<std::size_t>(j)]) ==
              doctest::Approx(std::stod(r[r.size() - 1 - i][static_cast<std::size_t>(j)])).epsilon(1e-10));
  }

  TEST_CASE("current command") {
    const auto c = run("current", Json{{"curve", kCircle}, {"phi", {{"from", 0.0}, {"to", 1.0}, {"count", 11}}}});
    REQUIRE(c.code == kOk);
    CHECK(header_of(c.csv) == "phi,B,mu_1,I_1");
    const auto r = rows_of(c.csv);
    REQUIRE(r.size() == 11);
    // I_1 = 2 (round(phi) - phi) on the unit circle.
    CHECK(std::stod(r[2][3]) == doctest::Approx(-0.4).epsilon(1e-6));
    CHECK(std::stod(r[0][3]) == doctest::Approx(std::stod(r[10][3])).epsilon(1e-8));
    const auto w = c.csv.find("# witness mu_1 max-min ");
    REQUIRE(w != std::string::npos);
    CHECK(std::stod(c.csv.substr(w + 23)) == doctest::Approx(0.25).epsilon(1e-10));

    const auto e = run("current", Json{{"curve", kEllipse}, {"phi", {{"from", 0.0}, {"to", 1.0}, {"count", 21}}}});
    REQUIRE(e.code == kOk);
    const auto pos = e.csv.find("# witness mu_1 max-min ");
    REQUIRE(pos != std::string::npos);
    CHECK(std::stod(e.csv.substr(pos + 23)) > 1e-3);
  }

  TEST_CASE("geometry, transverse and oracle tables") {
    const auto g = run("geometry", Json{{"curve", kCircle}});
    REQUIRE(g.code == kOk);
    CHECK(rows_of(g.csv).size() == 256);
    CHECK(g.csv.find("# total_curvature -6.28318530717958") != std::string::npos);

    const auto t = run("transverse", Json{{"a", Json::array({0.5, 1.0})}, {"beta", 20.0}, {"gamma_plus", 1.0}});
    REQUIRE(t.code == kOk);
    const auto tr = rows_of(t.csv);
    REQUIRE(tr.size() == 2);
    // beta a = 10 and 20 meet both preconditions.
    for (const auto& r : tr) {
      CHECK(r.back() == "1");
      CHECK(std::stod(r[5]) < std::stod(r[3]));
      CHECK(std::stod(r[3]) < std::stod(r[6]));
      CHECK(std::stod(r[7]) < std::stod(r[4]));
      CHECK(std::stod(r[4]) < std::stod(r[8]));
    }
    const auto bad = run("transverse", Json{{"a", 0.2}, {"beta", 10.0}});
    REQUIRE(bad.code == kOk);
    CHECK(rows_of(bad.csv)[0].back() == "0");

    const auto o = run("oracle", Json{{"R", 1.0}, {"beta", 5.0}, {"m", Json::array({0, 1, 2})}});
    REQUIRE(o.code == kOk);
    const auto orow = rows_of(o.csv);
    REQUIRE(orow.size() == 3);
    CHECK(std::stod(orow[0][4]) == doctest::Approx(oracle::circle_delta_2d(1.0, 5.0, 0).energy).epsilon(1e-14));
    CHECK(std::stod(orow[0][4]) < std::stod(orow[1][4]));
    CHECK(std::stod(orow[1][4]) < std::stod(orow[2][4]));
  }

  TEST_CASE("bracket command and exit codes") {
    const auto ok = run("bracket", Json{{"curve", kCircle}, {"B", 1.0}, {"beta", Json::array({40.0, 80.0, 160.0})},
                                        {"a_coeff", 3.0}});
    REQUIRE(ok.code == kOk);
    CHECK(header_of(ok.csv) ==
          "B,beta,a,j,tau_minus,tau_plus,zeta_minus,zeta_plus,mu_minus,mu_plus,N_B,M_B,preconds_ok,count_guarantee");
    const auto r = rows_of(ok.csv);
    REQUIRE(r.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      const double beta = std::stod(r[i][1]);
      CHECK(std::stod(r[i][4]) <= -beta * beta / 4);
      CHECK(std::stod(r[i][5]) >= -beta * beta / 4);
      if (i > 0) CHECK(std::stoi(r[i][13]) >= std::stoi(r[i - 1][13]));
    }

    const auto refused = run("bracket", Json{{"curve", kCircle}, {"B", 1.0}, {"beta", 40.0}});
    CHECK(refused.code == kPrecondition);
    CHECK(refused.log.find("1/(2 gamma_plus)") != std::string::npos);
    CHECK(refused.log.find("minimal admissible beta") != std::string::npos);
    CHECK(refused.csv.empty());

    const auto lax = run("bracket", Json{{"curve", kCircle}, {"B", 1.0}, {"beta", 40.0}, {"strict", false}});
    REQUIRE(lax.code == kOk);
    CHECK(lax.csv.find("# beta 40: violated") != std::string::npos);

    CHECK(run("bracket", Json{{"B", 1.0}, {"beta", 40.0}}).code == kUsage);
    CHECK(run("nonsense", Json::object()).code == kUsage);
    CHECK(run("spectrum", Json{{"curve", kCircle}, {"B", "x"}}).code == kUsage);
  }

  TEST_CASE("solve2d command") {
    Json cfg{{"curve", kCircle}, {"B", 0.0},  {"beta", 5.0}, {"h_sequence", Json::array({0.08, 0.04, 0.02})},
             {"box", Json::array({-3, 3, -3, 3})}, {"k", 2}};
    const auto s = run("solve2d", cfg);
    REQUIRE(s.code == kOk);
    CHECK(header_of(s.csv) ==
          "kind,B,beta,h,box,lambda_1,lambda_2,residual_1,residual_2,p_1,p_2,eps_disc_1,eps_disc_2");
    const auto r = rows_of(s.csv);
    REQUIRE(r.size() == 4);
    CHECK(r[3][0] == "extrapolated");
    CHECK(std::stod(r[3][5]) == doctest::Approx(oracle::circle_delta_2d(1.0, 5.0, 0).energy).epsilon(0.005));

    RunOptions seeded;
    seeded.seed_set = true;
    seeded.seed = 42;
    cfg["h"] = 0.04;
    cfg.erase("h_sequence");
    const auto a = run("solve2d", cfg, seeded);
    const auto b = run("solve2d", cfg, seeded);
    REQUIRE(a.code == kOk);
    CHECK(a.csv == b.csv);
    CHECK(a.csv.find("\"seed\":42") != std::string::npos);

    cfg["beta"] = 60.0;
    CHECK(run("solve2d", cfg).code == kPrecondition);
    cfg["beta"] = 5.0;
    cfg["h_sequence"] = Json::array({0.08, 0.04});
    cfg["box"] = Json::array({-3, 3, -3, 3, 1});
    CHECK(run("solve2d", cfg).code == kUsage);
  }

  TEST_CASE("asymptotics with the oracle switch") {
    const auto a = run("asymptotics", Json{{"curve", kCircle}, {"B", 0.0}, {"beta", Json::array({20.0, 40.0, 80.0})},
                                           {"oracle", true}});
    REQUIRE(a.code == kOk);
    const auto r = rows_of(a.csv);
    REQUIRE(r.size() == 3);
    double prev = 1e300;
    for (const auto& row : r) {
      CHECK(row[7] == "oracle");
      const double e = std::abs(std::stod(row[5]));
      CHECK(e < prev);
      prev = e;
    }
    CHECK(run("asymptotics", Json{{"curve", kEllipse}, {"B", 0.0}, {"beta", 20.0}, {"oracle", true}}).code == kUsage);
  }
}
