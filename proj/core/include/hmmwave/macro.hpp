#ifndef HMMWAVE_MACRO_HPP
#define HMMWAVE_MACRO_HPP

#include <atomic>
#include <functional>
#include <memory>

#include "hmmwave/flux_cache.hpp"
#include "hmmwave/trajectory.hpp"

namespace hmmwave {

// Supplies the macro flux F(x, P) at face centers. Linear providers expose
// basis columns that the stepper resolves once per face; non-linear providers
// are called per face per step.
class FluxProvider {
  public:
    virtual ~FluxProvider() = default;
    virtual bool linear() const { return true; }
    virtual FluxBasis basis(const Point& face_point) const;
    virtual Point flux(const Point& face_point, const Point& p) const;
};

// F(x, P) = Abar(x) P from a closed-form homogenized coefficient.
class ExactFluxProvider final : public FluxProvider {
  public:
    ExactFluxProvider(int dim, HomogenizedReference reference);
    ExactFluxProvider(int dim, const Matrix3& matrix);
    FluxBasis basis(const Point& face_point) const override;

  private:
    int dim_;
    HomogenizedReference ref_;
};

// Table lookups (the production path).
class CachedFluxProvider final : public FluxProvider {
  public:
    explicit CachedFluxProvider(const FluxTable& table) : table_(&table) {}
    FluxBasis basis(const Point& face_point) const override {
        return table_->basis_at(face_point);
    }

  private:
    const FluxTable* table_;
};

// One fresh micro solve per flux query; the reference the cache is checked
// against, and the fallback when nothing can be precomputed.
class DirectMicroProvider final : public FluxProvider {
  public:
    DirectMicroProvider(MicroParams params, const CoefficientField& field)
        : params_(std::move(params)), field_(&field) {}
    bool linear() const override { return false; }
    Point flux(const Point& face_point, const Point& p) const override;
    std::int64_t solve_count() const { return solves_.load(); }

  private:
    MicroParams params_;
    const CoefficientField* field_;
    mutable std::atomic<std::int64_t> solves_{0};
};

struct MacroRunConfig {
    int dim = 1;
    int n = 0;               // macro cells per axis; H = 1/n over [0,1]^d
    double coeff_bound = 0;  // wave-speed bound for the time step rule
    double cfl = 0.5;        // dT = cfl * H / sqrt(dim * bound), snapped to T
    double dt_target = 0.0;  // when positive, replaces the cfl rule
    double T = 1.0;
    std::function<double(const Point&)> f;
    std::function<double(const Point&)> g;
    std::int64_t snapshot_stride = 0;  // 0 = initial and final only
};

// Appendix gradient stencil at the face (m, side * e_axis / 2): two-point
// difference along the face axis, averaged centered differences transverse.
Point gradient_stencil(const std::vector<double>& u, const PeriodicGrid& grid,
                       const std::array<int, 3>& m, int axis, int side);

// One central-difference step of the flux-form macro scheme.
void hmm_step(WaveState& state, const FluxProvider& provider, const PeriodicGrid& grid,
              double dt);

// Full macro run: two-level start (provider evaluated at t=0), leapfrog to T.
Trajectory run_macro(const MacroRunConfig& config, const FluxProvider& provider);

}  // namespace hmmwave

#endif
