#pragma once

#include "mkvlab/measure_space.hpp"
#include "mkvlab/model.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mkvlab {

/// Treatment of u-frame coordinates whose diffusion vanishes at 0 when a step jumps across 0.
enum class RootPolicy {
    /// Set the coordinate to 0 when the full step crosses 0 but the drift-only step does not.
    absorb,
    /// Plain Euler-Maruyama.
    none,
};

struct SimConfig {
    double t0 = 0.0;
    double T = 1.0;
    double dt = 1e-3;
    std::size_t N = 1000;
    std::uint64_t seed = 0;
    std::string scheme = "euler_maruyama";
    /// Keep every k-th step in the ensemble (the final time is always a recorded node).
    std::size_t record_every = 1;
    RootPolicy root_policy = RootPolicy::absorb;
    /// 0: MKVLAB_THREADS or hardware concurrency. Never affects results.
    std::size_t threads = 0;

    void validate() const;
    [[nodiscard]] std::size_t steps() const;
    [[nodiscard]] double time_at(std::size_t step) const { return t0 + dt * static_cast<double>(step); }
};

/// Law flow sampled on a time grid; piecewise constant (left endpoint) in between.
struct MeasureFlowGrid {
    std::vector<double> grid;
    std::vector<EmpiricalMeasure> measures;

    static MeasureFlowGrid point_mass(std::vector<double> grid, std::size_t dim, std::size_t n);
    void validate() const;
    /// Index of the node in force at time t.
    [[nodiscard]] std::size_t locate(double t) const;
};

/// Initial law; every variant is drawn from the particle's own counter stream, so two samplers
/// with the same seed are coupled through common uniforms.
struct InitialSampler {
    enum class Kind { constant, normal, uniform, points };
    Kind kind = Kind::constant;
    std::vector<double> a;       // constant value | mean | lower bound
    std::vector<double> b;       // standard deviation | upper bound
    std::vector<double> points;  // row-major, cycled by particle index

    static InitialSampler constant(std::vector<double> x0);
    void validate(std::size_t m) const;
    void sample(std::uint64_t seed, std::size_t particle, std::span<double> out) const;
};

struct BlowUp {
    std::size_t particle = 0;
    std::size_t step = 0;
    double time = 0.0;
    double value = 0.0;
};

/// N trajectories on a shared recorded grid. states[(node * N + particle) * m + coord].
struct PathEnsemble {
    std::vector<double> grid;
    std::size_t N = 0;
    std::size_t m = 0;
    std::vector<double> states;
    std::uint64_t seed = 0;
    /// Particle i uses counter stream id i.
    std::string model_fingerprint;
    std::optional<BlowUp> blow_up;

    [[nodiscard]] std::size_t nodes() const { return grid.size(); }
    [[nodiscard]] double at(std::size_t node, std::size_t particle, std::size_t coord = 0) const {
        return states[(node * N + particle) * m + coord];
    }
    [[nodiscard]] std::span<const double> node_states(std::size_t node) const {
        return {states.data() + node * N * m, N * m};
    }
    [[nodiscard]] EmpiricalMeasure measure_at(std::size_t node) const;
    [[nodiscard]] MeasureFlowGrid to_flow() const;
};

/// Euler-Maruyama for the SDE with the measure argument frozen to `flow`.
PathEnsemble simulate_frozen(const ModelSpec& model, const MeasureFlowGrid& flow, const InitialSampler& xi,
                             const SimConfig& cfg);

/// Interacting particle system: the measure argument is the empirical law of the current states.
PathEnsemble simulate_particle_system(const ModelSpec& model, const InitialSampler& xi, const SimConfig& cfg);

/// Two particle systems driven by identical Brownian increments and coupled initial draws.
std::pair<PathEnsemble, PathEnsemble> simulate_coupled(const ModelSpec& model_a, const ModelSpec& model_b,
                                                        const InitialSampler& xi_a, const InitialSampler& xi_b,
                                                        const SimConfig& cfg);

/// Thrown by callers that require a complete ensemble; carries the blow-up location.
class BlowUpError : public std::runtime_error {
public:
    explicit BlowUpError(const BlowUp& b);
    BlowUp where;
};

/// Throws BlowUpError if the ensemble was truncated.
void require_complete(const PathEnsemble& ens);

}  // namespace mkvlab
