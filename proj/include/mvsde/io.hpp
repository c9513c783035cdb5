#pragma once

#include "mvsde/malliavin.hpp"
#include "mvsde/measure.hpp"
#include "mvsde/paths.hpp"

#include <string>
#include <vector>

namespace mvsde {

/// Shortest round-trip decimal rendering.  Output bytes depend only on the
/// value, never on locale or formatting state, which is what makes CSV
/// files comparable byte for byte across runs and thread counts.
std::string format_double(double v);

/// Comma-separated table with a header row.  Rows of doubles only.
std::string render_csv(const std::vector<std::string>& columns,
                       const std::vector<std::vector<double>>& rows);

/// Same table as whitespace-separated columns with a '#' header line,
/// ready for gnuplot's `plot ... using` syntax.
std::string render_gnuplot(const std::vector<std::string>& columns,
                           const std::vector<std::vector<double>>& rows);

/// particle, node, time, coordinates.
std::string paths_to_csv(const ParticlePaths& paths);

/// node, time, atom, coordinates.
std::string flow_to_csv(const MeasureFlow& flow);

/// source node s, node t, time, component (row-major d x m), value.
std::string limit_field_to_csv(const MalliavinLimitField& field);

/// source particle j, source node s, particle i, node t, time, component, value.
std::string ips_field_to_csv(const MalliavinIpsField& field);

/// Creates parent directories as needed; throws on failure.
void write_text_file(const std::string& path, const std::string& content);

} // namespace mvsde
