#include "fixtures.hpp"

#include <doctest.h>

#include "io.hpp"

#include <gne/rng.hpp>

#include <sstream>

using gne::Index;
using gne::Vector;

namespace {

void check_same_game(const gne::GameInstance<double>& a, const gne::GameInstance<double>& b) {
  REQUIRE(a.num_agents() == b.num_agents());
  REQUIRE(a.total_dim() == b.total_dim());
  CHECK(a.coupling_matrix() == b.coupling_matrix());
  CHECK(a.coupling_bound() == b.coupling_bound());
  CHECK(a.lower() == b.lower());
  CHECK(a.upper() == b.upper());
  REQUIRE(a.graph().num_edges() == b.graph().num_edges());
  for (Index l = 0; l < a.graph().num_edges(); ++l) {
    CHECK(a.graph().edge(l).source == b.graph().edge(l).source);
    CHECK(a.graph().edge(l).sink == b.graph().edge(l).sink);
  }
  gne::Rng rng(8);
  for (int t = 0; t < 5; ++t) {
    const Vector<double> x = Vector<double>::NullaryExpr(a.total_dim(), [&] { return rng.uniform(0.0, 10.0); });
    CHECK(gne::pseudo_gradient<double>(a, x) == gne::pseudo_gradient<double>(b, x));
  }
}

}  // namespace

TEST_CASE("game JSON round trip") {
  SUBCASE("cournot") {
    const auto game = fixtures::cournot(42);
    const auto j = gne::io::game_to_json(game);
    CHECK(j["agents"].size() == 8);
    CHECK(j.contains("price"));
    const auto back = gne::io::game_from_json(gne::io::Json::parse(j.dump()));
    check_same_game(game, back);
    CHECK(gne::io::game_to_json(back) == j);
  }
  SUBCASE("equality coupling keeps its market matrix") {
    const auto game = gne::generate_instance<double>(gne::sweep_spec(10, 3, 2)).game;
    check_same_game(game, gne::io::game_from_json(gne::io::game_to_json(game)));
  }
  SUBCASE("no price") {
    const auto game = fixtures::three_agent_game();
    check_same_game(game, gne::io::game_from_json(gne::io::game_to_json(game)));
  }
}

TEST_CASE("malformed game JSON is rejected") {
  auto j = gne::io::game_to_json(fixtures::two_agent_game());
  j["agents"][0]["lower"] = gne::io::Json::array({0.0, 1.0});
  CHECK_THROWS_AS(gne::io::game_from_json(j), gne::Error);
  auto k = gne::io::game_to_json(fixtures::two_agent_game());
  k["edges"] = gne::io::Json::array({gne::io::Json::array({0, 5})});
  CHECK_THROWS_AS(gne::io::game_from_json(k), gne::Error);
  CHECK_THROWS_AS(gne::io::game_from_json(gne::io::Json::object()), gne::Error);
}

TEST_CASE("trace CSV") {
  gne::MetricsTrace<double> trace;
  gne::MetricsRow<double> row;
  row.iter = 0;
  row.disagreement = 0.1;
  row.violation = 1.0 / 3.0;
  row.kkt_primal = 2.5e-7;
  row.kkt_dual = 0;
  trace.rows.push_back(row);
  row.iter = 5;
  row.rel_dist_to_opt = 0.125;
  trace.rows.push_back(row);
  const std::string csv = gne::io::trace_csv(trace);
  std::istringstream is(csv);
  std::string line;
  std::getline(is, line);
  CHECK(line == "iter,rel_dist_to_opt,disagreement,violation,kkt_primal,kkt_dual");
  std::getline(is, line);
  CHECK(line == "0,nan,0.10000000000000001,0.33333333333333331,2.4999999999999999e-07,0");
  std::getline(is, line);
  CHECK(line.rfind("5,0.125,", 0) == 0);
  CHECK(std::stod(gne::io::format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("schedule CSV round trip") {
  const std::vector<gne::ScheduleEntry> sched{{0, {1}}, {1, {0, 3}}, {2, {2}}, {1, {0, 0}}};
  std::ostringstream os;
  gne::io::write_schedule_csv(os, sched);
  CHECK(os.str().rfind("k,agent,delays\n0,0,1\n1,1,0,3\n", 0) == 0);
  std::istringstream is(os.str());
  CHECK(gne::io::read_schedule_csv(is) == sched);

  std::istringstream bad("k,agent,delays\n0,0,x\n");
  CHECK_THROWS_AS(gne::io::read_schedule_csv(bad), gne::InvalidParameter);
  std::istringstream gap("k,agent,delays\n0,0,1\n2,1,0\n");
  CHECK_THROWS_AS(gne::io::read_schedule_csv(gap), gne::InvalidParameter);
}

TEST_CASE("missing files") {
  CHECK_THROWS_AS(gne::io::read_file("/nonexistent/game.json"), gne::InvalidParameter);
  CHECK_THROWS_AS(gne::io::load_game("/nonexistent/game.json"), gne::InvalidParameter);
}
