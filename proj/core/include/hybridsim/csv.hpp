#pragma once

#include "hybridsim/convergence.hpp"
#include "hybridsim/engine.hpp"
#include "hybridsim/hybrid_path.hpp"

#include <fstream>
#include <string>
#include <vector>

namespace hybridsim {

/// Shortest decimal representation that round-trips the exact double, so
/// CSV output is byte-deterministic and parses back bit-for-bit.
std::string format_double(double v);

/// Every CSV starts with a schema-version comment line, then a header row.
inline constexpr const char* kCsvSchemaPrefix = "# hybridsim-csv v1 ";

class CsvWriter {
public:
    CsvWriter(const std::string& file, const std::string& kind,
              const std::vector<std::string>& columns);
    void cell(const std::string& s);
    void cell(double v) { cell(format_double(v)); }
    void cell(int v) { cell(std::to_string(v)); }
    void cell(std::uint64_t v) { cell(std::to_string(v)); }
    void end_row();
    void close();

private:
    std::ofstream os_;
    std::string file_;
    bool row_open_ = false;
};

/// Path export: one row per merged grid/event time with columns
/// time, side, mode, x_1..x_p. Event times (discrete or Euclidean) emit two
/// rows, the left limit (side=pre) then the value (side=post); all other
/// times emit a single side=post row.
void write_path_csv(const HybridPath& path, const std::string& file);

/// Rebuilds a HybridPath from its CSV export. Grid content, event logs and
/// hold evaluation are preserved exactly (the CSV numeric format round-trips
/// doubles), so functionals recompute to the same values.
HybridPath load_path_csv(const std::string& file);

/// Audit trail export: atom_index, time, mode_before, q_total, u, mode_after.
void write_audit_csv(const std::vector<AuditRecord>& audit, const std::string& file);

/// Convergence report export: one row per level.
void write_convergence_csv(const ConvergenceReport& report, const std::string& file);

/// Human-readable study summary: fitted slope and trend-test verdicts.
void write_convergence_summary(const ConvergenceReport& report, const std::string& file);

} // namespace hybridsim
