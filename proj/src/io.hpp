#pragma once

#include <gne/async_engine.hpp>
#include <gne/game.hpp>
#include <gne/metrics.hpp>
#include <gne/schedule.hpp>
#include <gne/splitting.hpp>

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace gne::io {

using Json = nlohmann::json;

/// Game instance <-> JSON. Layout:
///   {"agents": [{"n", "lower", "upper", "A", "b", "Q", "q", "market"?}],
///    "edges": [[i, j], ...], "price": {"P": [...], "D": [...]}}
/// Indices are 0-based; "b" is the agent's share of the global bound; "Q" is
/// either the diagonal or a full matrix; "market" defaults to "A".
Json game_to_json(const GameInstance<double>& game);
GameInstance<double> game_from_json(const Json& j);

GameInstance<double> load_game(const std::string& path);
void save_game(const GameInstance<double>& game, const std::string& path);

Json steps_to_json(const StepConfig<double>& cfg);

/// Columns iter,rel_dist_to_opt,disagreement,violation,kkt_primal,kkt_dual.
void write_trace_csv(std::ostream& os, const MetricsTrace<double>& trace);
std::string trace_csv(const MetricsTrace<double>& trace);

/// Rows k,agent,delay_1,...,delay_deg (delays in ascending neighbor order).
void write_schedule_csv(std::ostream& os, const std::vector<ScheduleEntry>& schedule);
std::vector<ScheduleEntry> read_schedule_csv(std::istream& is);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// %.17g, so values round-trip exactly.
std::string format_double(double v);

}  // namespace gne::io
