#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lipfield/damage.hpp"
#include "lipfield/equilibrium.hpp"
#include "lipfield/lip_mesh.hpp"
#include "lipfield/material.hpp"
#include "lipfield/mesh.hpp"

namespace lipfield {

/// Component selector of a boundary entry: x, y or both.
enum class Component { x, y, xy };

struct FixSpec {
    std::string tag;
    Component comp = Component::xy;
    double value = 0.0;
};

/// u_comp = scale * load factor on every node of the tag.
struct LoadSpec {
    std::string tag;
    Component comp = Component::x;
    double scale = 1.0;
};

/// Fixes the node nearest to `at`.
struct PinSpec {
    Point2 at;
    Component comp = Component::xy;
};

struct RigidSpec {
    std::string tag;
    std::array<RigidParam, 3> params{};  // ux, uy, theta
    std::optional<Point2> center;        // centroid of the tag nodes by default
};

struct BoundarySpec {
    std::vector<FixSpec> fix;
    std::vector<LoadSpec> load;
    std::vector<PinSpec> pin;
    std::vector<RigidSpec> rigid;
};

/// Resolves tags against the mesh. Repeated identical prescriptions on a dof
/// (shared corner nodes) collapse to one; conflicting ones throw ConstraintError.
ConstraintSet build_constraints(const FeMesh& mesh, const BoundarySpec& spec);

struct SimulationConfig {
    std::filesystem::path mesh;
    MaterialParams material;
    BoundarySpec boundary;
    std::vector<double> loads;  // imposed-displacement factors, in order

    std::string reaction_tag;  // defaults to the first load tag
    Component reaction_comp = Component::x;

    std::vector<Point2> crack_path;  // polyline for the crack-length estimate
    double crack_threshold = 0.99;

    double tol_d = 1e-4;  // sup-norm of the damage change between iterations
    double tol_F = 1e-8;  // relative change of F between iterations
    int max_stagger = 200;
    DamageTolerances damage;

    std::filesystem::path out_dir;  // empty: no field output
    int output_every = 1;
    bool validate = false;  // compare against bruteforce bounds and the unpatched minimizer

    /// Throws std::invalid_argument on non-finite loads or non-positive tolerances.
    void check() const;
};

/// Uniform program u_max * i / steps, i = 1..steps.
std::vector<double> uniform_loads(double u_max, int steps);

struct StepRecord {
    int step = 0;
    double load = 0.0;
    double reaction = 0.0;     // N/mm
    int iterations = 0;        // staggered iterations
    double free_energy = 0.0;  // elastic energy, N mm / mm
    double dissipated = 0.0;   // sum A Yc h(d), N mm / mm
    double crack_length = 0.0;  // mm
    double d_min = 0.0;
    double d_max = 0.0;
    /// F after every half-step (u solve, then damage update), ending with the final u solve.
    std::vector<double> potential_history;
    double last_increment = 0.0;  // sup-norm of the last damage change
};

/// Oracle comparisons logged in validation mode.
struct ValidationReport {
    int step = 0;
    int iteration = 0;
    double bounds_gap = 0.0;   // dijkstra vs bruteforce envelopes
    double patch_gap = 0.0;    // patched vs unpatched minimizer
};

/// Arc length from the path origin to the farthest cracked sample; 0 when
/// there is none. A sample is cracked when a Lip-mesh vertex no farther than
/// the nearest vertex plus half the shortest Lip edge carries d >= threshold,
/// so a band one vertex row off the path still counts. The path is sampled at
/// a quarter of the shortest Lip edge.
double crack_length(std::span<const double> d, const LipMesh& lip, double threshold,
                    std::span<const Point2> path);

/// Mesh, Lip-mesh and state of a quasi-static run.
class Simulation {
public:
    Simulation(FeMesh mesh, SimulationConfig config);
    Simulation(const Simulation&) = delete;
    Simulation& operator=(const Simulation&) = delete;

    const FeMesh& mesh() const { return mesh_; }
    const LipMesh& lip() const { return lip_; }
    const SimulationConfig& config() const { return config_; }
    const Eigen::VectorXd& displacement() const { return u_; }
    const std::vector<double>& damage() const { return d_; }
    const std::vector<ValidationReport>& validation() const { return validation_; }

    /// Staggered iteration at `load` from the committed state. The state is
    /// committed only on success; SolverError carries the F history otherwise.
    StepRecord step(double load);

    /// Incremental potential sum A_e (phi(eps_e, d_e) + Yc h(d_e)).
    double potential(const Eigen::VectorXd& u, std::span<const double> d) const;
    double dissipated_energy(std::span<const double> d) const;

private:
    FeMesh mesh_;
    SimulationConfig config_;
    LipMesh lip_;
    EdgeGraph graph_;
    ConstraintSet constraints_;
    DisplacementSolver solver_;
    std::vector<int> reaction_nodes_;
    int reaction_comp_ = 0;
    Eigen::VectorXd u_;
    std::vector<double> d_;
    int steps_done_ = 0;
    std::vector<ValidationReport> validation_;

    void validate_damage_step(std::span<const Strain2D> strains, std::span<const double> d_n,
                              std::span<const double> d_new, int iteration);
};

using StepObserver = std::function<void(const Simulation&, const StepRecord&)>;

/// Runs the load program of the config; the observer sees every committed step.
std::vector<StepRecord> run_simulation(Simulation& sim, const StepObserver& observer = {});

}  // namespace lipfield
