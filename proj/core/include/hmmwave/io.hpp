#ifndef HMMWAVE_IO_HPP
#define HMMWAVE_IO_HPP

#include <string>
#include <vector>

#include "hmmwave/trajectory.hpp"

namespace hmmwave {

// Shortest round-trippable decimal form.
std::string format_double(double v);

// Write-to-temp then rename: readers never see a partial file.
void write_file_atomic(const std::string& path, const std::string& content);

// CSV text from a header and string rows.
std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows);

// Snapshot CSV: columns t, i[, j[, k]], u.
std::string snapshot_csv(const Trajectory& traj, const Snapshot& snap);

}  // namespace hmmwave

#endif
