#include "hmmwave/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

namespace hmmwave {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io: cannot open '" + tmp.string() + "' for writing");
        out << content;
        out.flush();
        if (!out) throw Error("io: short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

std::string csv_text(const std::vector<std::string>& header,
                     const std::vector<std::vector<std::string>>& rows) {
    std::string out;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out += ',';
        out += header[c];
    }
    out += '\n';
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += row[c];
        }
        out += '\n';
    }
    return out;
}

std::string snapshot_csv(const Trajectory& traj, const Snapshot& snap) {
    const PeriodicGrid& g = traj.grid;
    std::string out = "t";
    const char* idx_names[3] = {"i", "j", "k"};
    for (int d = 0; d < g.dim; ++d) {
        out += ',';
        out += idx_names[d];
    }
    out += ",u\n";
    std::string t = format_double(snap.time);
    for (int k = 0; k < ((g.dim == 3) ? g.n : 1); ++k)
        for (int j = 0; j < ((g.dim >= 2) ? g.n : 1); ++j)
            for (int i = 0; i < g.n; ++i) {
                out += t;
                out += ',';
                out += std::to_string(i);
                if (g.dim >= 2) {
                    out += ',';
                    out += std::to_string(j);
                }
                if (g.dim == 3) {
                    out += ',';
                    out += std::to_string(k);
                }
                out += ',';
                out += format_double(snap.u[g.index(i, j, k)]);
                out += '\n';
            }
    return out;
}

}  // namespace hmmwave
