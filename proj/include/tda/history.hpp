#pragma once

#include <map>
#include <string>

#include "tda/trainer.hpp"

namespace tda {

/// Shortest-roundtrip decimal formatting (%.17g trimmed); every float in
/// the artifacts goes through this so reruns produce byte-identical files.
std::string format_double(double v);

/// Writes config echo comment lines, a header, one row per recorded step
/// (kind=step) and one per epoch (kind=epoch). Cells that do not apply to
/// a row kind stay empty.
void write_history_csv(const std::string& path, const RunHistory& history,
                       const std::map<std::string, std::string>& config_echo);

/// Plain "key = value" lines, sorted by key; parseable as a config file.
std::string render_config_echo(const std::map<std::string, std::string>& config_echo);
void write_config_echo(const std::string& path,
                       const std::map<std::string, std::string>& config_echo);

}  // namespace tda
