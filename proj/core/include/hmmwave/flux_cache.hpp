#ifndef HMMWAVE_FLUX_CACHE_HPP
#define HMMWAVE_FLUX_CACHE_HPP

#include <cstdint>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "hmmwave/coefficient.hpp"
#include "hmmwave/micro.hpp"
#include "hmmwave/types.hpp"

namespace hmmwave {

// Basis fluxes at one point: columns[i] = F(x, e_i).
struct FluxBasis {
    std::array<Point, 3> columns{};
};

// Precomputed basis fluxes keyed by canonical face coordinates. The micro map
// is linear in the gradient, so any query is a combination of d stored
// columns. Canonicalization drops coordinates the field does not depend on
// and reduces fast-scale-periodic coordinates mod eps; with the dedup flag a
// single entry serves every face.
class FluxTable {
  public:
    using Key = std::array<std::int64_t, 3>;

    Point eval(const Point& x, const Point& p) const;
    const FluxBasis& basis_at(const Point& x) const;

    bool dedup() const { return dedup_; }
    std::size_t entry_count() const { return entries_.size(); }
    std::int64_t solve_count() const { return solve_count_; }
    int dimension() const { return dim_; }

    // CSV persistence: one row per (point, basis index).
    void export_csv(std::ostream& out) const;
    static FluxTable import_csv(std::istream& in, const CoefficientField& field, bool dedup);

    Point canonical_point(const Point& x) const;

    friend FluxTable precompute(const std::vector<Point>& face_points,
                                const MicroParams& params, const CoefficientField& field,
                                bool dedup);

  private:
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::uint64_t h = 1469598103934665603ull;
            for (std::int64_t v : k) {
                h ^= static_cast<std::uint64_t>(v);
                h *= 1099511628211ull;
            }
            return static_cast<std::size_t>(h);
        }
    };
    struct Entry {
        Point point{};
        FluxBasis basis{};
    };

    Key key_of(const Point& canonical) const;
    void configure(const CoefficientField& field, bool dedup);

    int dim_ = 1;
    bool dedup_ = false;
    double eps_ = 0.0;
    bool fast_periodic_ = false;
    std::array<bool, 3> dependent_{true, false, false};
    std::unordered_map<Key, Entry, KeyHash> entries_;
    std::int64_t solve_count_ = 0;
};

// True when one set of d basis solves serves every macro face: the field is
// pure fast scale and the macro spacing is an integer multiple of eps.
bool should_dedup(const CoefficientField& field, double macro_h);

// Runs d micro solves per distinct canonical point (one point in dedup mode).
FluxTable precompute(const std::vector<Point>& face_points, const MicroParams& params,
                     const CoefficientField& field, bool dedup);

}  // namespace hmmwave

#endif
