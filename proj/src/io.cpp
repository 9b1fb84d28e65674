#include "io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gne::io {

namespace {

Json vec_json(const Vector<double>& v) {
  Json a = Json::array();
  for (Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

Json mat_json(const Matrix<double>& M) {
  Json a = Json::array();
  for (Index r = 0; r < M.rows(); ++r) {
    Json row = Json::array();
    for (Index c = 0; c < M.cols(); ++c) row.push_back(M(r, c));
    a.push_back(row);
  }
  return a;
}

Vector<double> json_vec(const Json& j, const std::string& what) {
  if (!j.is_array()) throw InvalidParameter(what + ": expected an array");
  Vector<double> v(static_cast<Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw InvalidParameter(what + ": expected numbers");
    v(static_cast<Index>(k)) = j[k].get<double>();
  }
  return v;
}

Matrix<double> json_mat(const Json& j, Index rows, Index cols, const std::string& what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) throw InvalidParameter(what + ": expected " + std::to_string(rows) + " rows");
  Matrix<double> M(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const Json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw InvalidParameter(what + ": row " + std::to_string(r) + " needs " + std::to_string(cols) + " entries");
    }
    for (Index c = 0; c < cols; ++c) {
      if (!row[static_cast<std::size_t>(c)].is_number()) throw InvalidParameter(what + ": expected numbers");
      M(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
  }
  return M;
}

bool is_diagonal(const Matrix<double>& M) {
  for (Index r = 0; r < M.rows(); ++r)
    for (Index c = 0; c < M.cols(); ++c)
      if (r != c && M(r, c) != 0.0) return false;
  return true;
}

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw InvalidParameter(where + ": missing \"" + key + "\"");
  return j.at(key);
}

}  // namespace

Json game_to_json(const GameInstance<double>& game) {
  const auto& cost = game.cost();
  if (!cost.quadratic) throw InvalidParameter("only quadratic cost models can be serialized");
  const auto& qc = *cost.quadratic;
  Json j;
  j["agents"] = Json::array();
  for (Index i = 0; i < game.num_agents(); ++i) {
    const auto ii = static_cast<std::size_t>(i);
    Json a;
    a["n"] = game.dim(i);
    a["lower"] = vec_json(game.box(i).lower);
    a["upper"] = vec_json(game.box(i).upper);
    a["A"] = mat_json(game.block(i));
    a["b"] = vec_json(game.share(i));
    if (is_diagonal(qc.Q[ii])) {
      a["Q"] = vec_json(qc.Q[ii].diagonal());
    } else {
      a["Q"] = mat_json(qc.Q[ii]);
    }
    a["q"] = vec_json(qc.q[ii]);
    const auto& S = qc.market[ii];
    const bool same = S.rows() == game.block(i).rows() && S.cols() == game.block(i).cols() && S == game.block(i);
    if (qc.markets() > 0 && !same) a["market"] = mat_json(S);
    j["agents"].push_back(a);
  }
  j["edges"] = Json::array();
  for (const auto& e : game.graph().edges()) j["edges"].push_back({e.source, e.sink});
  if (qc.markets() > 0) j["price"] = {{"P", vec_json(qc.price_intercept)}, {"D", vec_json(qc.price_slope)}};
  return j;
}

GameInstance<double> game_from_json(const Json& j) {
  const Json& agents = field(j, "agents", "game");
  if (!agents.is_array() || agents.empty()) throw InvalidParameter("game: \"agents\" must be a non-empty array");
  const auto N = static_cast<Index>(agents.size());

  Vector<double> P = Vector<double>::Zero(0);
  Vector<double> D = Vector<double>::Zero(0);
  if (j.contains("price")) {
    P = json_vec(field(j["price"], "P", "price"), "price.P");
    D = json_vec(field(j["price"], "D", "price"), "price.D");
    if (P.size() != D.size()) throw InvalidParameter("price: P and D lengths differ");
  }
  const Index p = P.size();

  std::vector<BoxSet<double>> boxes;
  std::vector<Matrix<double>> blocks;
  std::vector<Vector<double>> shares;
  QuadraticCost<double> cost;
  cost.price_intercept = P;
  cost.price_slope = D;
  std::vector<Index> dims;
  Index m = -1;
  for (Index i = 0; i < N; ++i) {
    const std::string where = "agent " + std::to_string(i);
    const Json& a = agents[static_cast<std::size_t>(i)];
    const Json& nj = field(a, "n", where);
    if (!nj.is_number_integer() || nj.get<Index>() < 1) throw InvalidParameter(where + ": \"n\" must be a positive integer");
    const Index ni = nj.get<Index>();
    dims.push_back(ni);
    Vector<double> lo = json_vec(field(a, "lower", where), where + ".lower");
    Vector<double> hi = json_vec(field(a, "upper", where), where + ".upper");
    if (lo.size() != ni || hi.size() != ni) throw InvalidParameter(where + ": bounds must have length n");
    boxes.emplace_back(lo, hi);
    Vector<double> b = json_vec(field(a, "b", where), where + ".b");
    if (m < 0) m = b.size();
    if (b.size() != m) throw InvalidParameter(where + ": \"b\" length differs from other agents");
    shares.push_back(b);
    blocks.push_back(m == 0 ? Matrix<double>::Zero(0, ni) : json_mat(field(a, "A", where), m, ni, where + ".A"));

    const Json& Qj = field(a, "Q", where);
    if (!Qj.is_array()) throw InvalidParameter(where + ": \"Q\" must be an array");
    if (!Qj.empty() && Qj[0].is_array()) {
      cost.Q.push_back(json_mat(Qj, ni, ni, where + ".Q"));
    } else {
      Vector<double> qd = json_vec(Qj, where + ".Q");
      if (qd.size() != ni) throw InvalidParameter(where + ": diagonal \"Q\" must have length n");
      cost.Q.push_back(qd.asDiagonal());
    }
    Vector<double> q = json_vec(field(a, "q", where), where + ".q");
    if (q.size() != ni) throw InvalidParameter(where + ": \"q\" must have length n");
    cost.q.push_back(q);
    if (a.contains("market")) {
      cost.market.push_back(json_mat(a["market"], p, ni, where + ".market"));
    } else if (p > 0) {
      if (m != p) throw InvalidParameter(where + ": \"market\" is required when A and the price have different row counts");
      cost.market.push_back(blocks.back());
    } else {
      cost.market.push_back(Matrix<double>::Zero(0, ni));
    }
  }

  std::vector<std::pair<Index, Index>> edges;
  if (j.contains("edges")) {
    const Json& ej = j["edges"];
    if (!ej.is_array()) throw InvalidParameter("game: \"edges\" must be an array");
    for (const auto& e : ej) {
      if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() || !e[1].is_number_integer()) {
        throw InvalidParameter("game: each edge must be a pair of integers");
      }
      edges.emplace_back(e[0].get<Index>(), e[1].get<Index>());
    }
  }
  AffineCoupling<double> coupling{std::move(blocks), std::move(shares)};
  auto model = make_quadratic_cost<double>(dims, std::move(cost));
  return GameInstance<double>(std::move(boxes), std::move(coupling), CommGraph(N, edges), std::move(model));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidParameter("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidParameter("cannot write " + path);
  out << content;
}

GameInstance<double> load_game(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw InvalidParameter(path + ": " + e.what());
  }
  return game_from_json(j);
}

void save_game(const GameInstance<double>& game, const std::string& path) { write_file(path, game_to_json(game).dump(2) + "\n"); }

Json steps_to_json(const StepConfig<double>& cfg) {
  return {{"rho", cfg.rho},     {"delta", cfg.delta}, {"tau", vec_json(cfg.tau)}, {"epsilon", vec_json(cfg.epsilon)}, {"theta", cfg.theta},
          {"eta", cfg.eta},     {"chi", cfg.chi},     {"alpha", cfg.alpha},      {"ell", cfg.ell}};
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_trace_csv(std::ostream& os, const MetricsTrace<double>& trace) {
  os << "iter,rel_dist_to_opt,disagreement,violation,kkt_primal,kkt_dual\n";
  for (const auto& r : trace.rows) {
    os << r.iter << ',' << format_double(r.rel_dist_to_opt) << ',' << format_double(r.disagreement) << ',' << format_double(r.violation) << ','
       << format_double(r.kkt_primal) << ',' << format_double(r.kkt_dual) << '\n';
  }
}

std::string trace_csv(const MetricsTrace<double>& trace) {
  std::ostringstream ss;
  write_trace_csv(ss, trace);
  return ss.str();
}

void write_schedule_csv(std::ostream& os, const std::vector<ScheduleEntry>& schedule) {
  os << "k,agent,delays\n";
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    os << k << ',' << schedule[k].agent;
    for (int d : schedule[k].delays) os << ',' << d;
    os << '\n';
  }
}

std::vector<ScheduleEntry> read_schedule_csv(std::istream& is) {
  std::vector<ScheduleEntry> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || (lineno == 1 && line.rfind("k,", 0) == 0)) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<long long> values;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stoll(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw InvalidParameter("schedule line " + std::to_string(lineno) + ": not an integer: " + cell);
      }
    }
    if (values.size() < 2) throw InvalidParameter("schedule line " + std::to_string(lineno) + ": needs k and agent");
    if (values[0] != static_cast<long long>(out.size())) throw InvalidParameter("schedule line " + std::to_string(lineno) + ": k out of sequence");
    ScheduleEntry e;
    e.agent = static_cast<Index>(values[1]);
    for (std::size_t c = 2; c < values.size(); ++c) e.delays.push_back(static_cast<int>(values[c]));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace gne::io
