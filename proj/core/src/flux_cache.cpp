#include "hmmwave/flux_cache.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "hmmwave/parallel.hpp"

namespace hmmwave {

namespace {
constexpr double kKeyGranularity = 1e12;  // coordinates rounded at 1e-12
}

void FluxTable::configure(const CoefficientField& field, bool dedup) {
    dim_ = field.dimension();
    dedup_ = dedup;
    eps_ = field.epsilon();
    fast_periodic_ = field.fast_scale_periodic();
    dependent_ = field.dependent_axes();
}

Point FluxTable::canonical_point(const Point& x) const {
    Point c{};
    for (int ax = 0; ax < dim_; ++ax) {
        if (!dependent_[ax]) continue;
        double v = x[ax];
        if (fast_periodic_) {
            v -= eps_ * std::floor(v / eps_);
            if (v >= eps_ * (1.0 - 1e-9)) v = 0.0;
        }
        c[ax] = v;
    }
    return c;
}

FluxTable::Key FluxTable::key_of(const Point& canonical) const {
    Key k{};
    for (int ax = 0; ax < dim_; ++ax) k[ax] = std::llround(canonical[ax] * kKeyGranularity);
    return k;
}

const FluxBasis& FluxTable::basis_at(const Point& x) const {
    if (entries_.empty()) throw Error("flux table: empty");
    if (dedup_) return entries_.begin()->second.basis;
    auto it = entries_.find(key_of(canonical_point(x)));
    if (it == entries_.end())
        throw Error("flux table: no entry for the requested point (dedup off)");
    return it->second.basis;
}

Point FluxTable::eval(const Point& x, const Point& p) const {
    const FluxBasis& b = basis_at(x);
    Point f{};
    for (int i = 0; i < dim_; ++i)
        for (int ax = 0; ax < dim_; ++ax) f[ax] += p[i] * b.columns[i][ax];
    return f;
}

void FluxTable::export_csv(std::ostream& out) const {
    std::vector<const Entry*> ordered;
    ordered.reserve(entries_.size());
    for (const auto& [k, e] : entries_) ordered.push_back(&e);
    std::sort(ordered.begin(), ordered.end(), [](const Entry* a, const Entry* b) {
        return std::lexicographical_compare(a->point.begin(), a->point.end(), b->point.begin(),
                                            b->point.end());
    });
    out << "x0,x1,x2,basis,f0,f1,f2\n";
    char buf[512];
    for (const Entry* e : ordered) {
        for (int i = 0; i < dim_; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d,%.17g,%.17g,%.17g\n",
                          e->point[0], e->point[1], e->point[2], i, e->basis.columns[i][0],
                          e->basis.columns[i][1], e->basis.columns[i][2]);
            out << buf;
        }
    }
}

FluxTable FluxTable::import_csv(std::istream& in, const CoefficientField& field, bool dedup) {
    FluxTable t;
    t.configure(field, dedup);
    std::string line;
    if (!std::getline(in, line)) throw Error("flux table: empty CSV stream");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string cell;
        std::array<double, 7> vals{};
        for (double& v : vals) {
            if (!std::getline(row, cell, ',')) throw Error("flux table: malformed CSV row");
            v = std::stod(cell);
        }
        Point pt{vals[0], vals[1], vals[2]};
        int basis = static_cast<int>(vals[3]);
        if (basis < 0 || basis >= t.dim_) throw Error("flux table: basis index out of range");
        Entry& e = t.entries_[t.key_of(pt)];
        e.point = pt;
        e.basis.columns[basis] = {vals[4], vals[5], vals[6]};
    }
    return t;
}

bool should_dedup(const CoefficientField& field, double macro_h) {
    if (!field.fast_scale_periodic()) return false;
    double ratio = macro_h / field.epsilon();
    return std::fabs(ratio - std::round(ratio)) <= 1e-10 * ratio;
}

FluxTable precompute(const std::vector<Point>& face_points, const MicroParams& params,
                     const CoefficientField& field, bool dedup) {
    if (face_points.empty()) throw Error("flux table: no face points given");
    FluxTable t;
    t.configure(field, dedup);
    const int d = t.dim_;

    std::vector<Point> points;
    if (dedup) {
        points.push_back(t.canonical_point(face_points[0]));
    } else {
        std::unordered_map<FluxTable::Key, bool, FluxTable::KeyHash> seen;
        for (const Point& fp : face_points) {
            Point cp = t.canonical_point(fp);
            auto [it, inserted] = seen.emplace(t.key_of(cp), true);
            (void)it;
            if (inserted) points.push_back(cp);
        }
    }

    struct Task {
        std::size_t point;
        int basis;
    };
    std::vector<Task> tasks;
    tasks.reserve(points.size() * d);
    for (std::size_t pi = 0; pi < points.size(); ++pi)
        for (int i = 0; i < d; ++i) tasks.push_back({pi, i});

    std::vector<FluxBasis> results(points.size());
    std::vector<std::string> failures(tasks.size());
    parallel_for_blocks(static_cast<std::int64_t>(tasks.size()), [&](std::int64_t ti) {
        const Task& task = tasks[ti];
        Point e{};
        e[task.basis] = 1.0;
        try {
            MicroProblemSpec spec = assemble(points[task.point], e, params, field);
            results[task.point].columns[task.basis] = solve_and_average(spec, field);
        } catch (const std::exception& ex) {
            failures[ti] = ex.what();
        }
    });
    for (std::size_t ti = 0; ti < tasks.size(); ++ti) {
        if (!failures[ti].empty()) {
            const Point& pt = points[tasks[ti].point];
            throw Error("flux table: micro solve failed at point (" + std::to_string(pt[0]) +
                        ", " + std::to_string(pt[1]) + ", " + std::to_string(pt[2]) +
                        "): " + failures[ti]);
        }
    }

    for (std::size_t pi = 0; pi < points.size(); ++pi) {
        FluxTable::Entry e;
        e.point = points[pi];
        e.basis = results[pi];
        t.entries_.emplace(t.key_of(points[pi]), std::move(e));
    }
    t.solve_count_ = static_cast<std::int64_t>(points.size()) * d;
    return t;
}

}  // namespace hmmwave
