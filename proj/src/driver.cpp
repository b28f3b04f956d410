#include "lipfield/driver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "lipfield/bounds.hpp"
#include "lipfield/errors.hpp"

namespace lipfield {

namespace {

std::vector<int> components(Component c) {
    switch (c) {
        case Component::x: return {0};
        case Component::y: return {1};
        case Component::xy: return {0, 1};
    }
    return {};
}

// Collects Dirichlet prescriptions per dof so that shared nodes are entered once.
class DirichletTable {
public:
    void add(int node, int comp, double value, double scale) {
        const auto key = std::make_pair(node, comp);
        const auto it = entries_.find(key);
        if (it == entries_.end()) {
            entries_.emplace(key, DirichletEntry{node, comp, value, scale});
            order_.push_back(key);
            return;
        }
        if (it->second.value != value || it->second.load_scale != scale) {
            std::ostringstream msg;
            msg << "conflicting prescriptions on node " << node << " component " << (comp == 0 ? 'x' : 'y');
            throw ConstraintError(msg.str());
        }
    }
    void apply(ConstraintSet& c) const {
        for (const auto& key : order_) c.add_dirichlet(entries_.at(key));
    }

private:
    std::map<std::pair<int, int>, DirichletEntry> entries_;
    std::vector<std::pair<int, int>> order_;
};

}  // namespace

ConstraintSet build_constraints(const FeMesh& mesh, const BoundarySpec& spec) {
    DirichletTable table;
    for (const FixSpec& f : spec.fix)
        for (int node : mesh.nodes_with_tag(mesh.resolve_tag(f.tag)))
            for (int c : components(f.comp)) table.add(node, c, f.value, 0.0);
    for (const LoadSpec& l : spec.load)
        for (int node : mesh.nodes_with_tag(mesh.resolve_tag(l.tag)))
            for (int c : components(l.comp)) table.add(node, c, 0.0, l.scale);
    for (const PinSpec& p : spec.pin) {
        const int node = mesh.nearest_node(p.at);
        for (int c : components(p.comp)) table.add(node, c, 0.0, 0.0);
    }
    ConstraintSet set;
    table.apply(set);
    for (const RigidSpec& r : spec.rigid) {
        RigidLink link;
        link.nodes = mesh.nodes_with_tag(mesh.resolve_tag(r.tag));
        link.params = r.params;
        if (r.center) {
            link.center = *r.center;
        } else {
            Point2 c{};
            for (int n : link.nodes) c = c + mesh.nodes()[n];
            link.center = (1.0 / static_cast<double>(link.nodes.size())) * c;
        }
        set.add_rigid_link(std::move(link));
    }
    return set;
}

void SimulationConfig::check() const {
    for (double f : loads)
        if (!std::isfinite(f)) throw std::invalid_argument("load factors must be finite");
    if (!(tol_d > 0.0) || !(tol_F > 0.0)) throw std::invalid_argument("staggered tolerances must be positive");
    if (max_stagger < 1) throw std::invalid_argument("max_stagger must be at least 1");
    if (output_every < 1) throw std::invalid_argument("output_every must be at least 1");
    if (!(crack_threshold > 0.0 && crack_threshold <= 1.0))
        throw std::invalid_argument("crack_threshold must lie in (0, 1]");
    if (reaction_comp == Component::xy) throw std::invalid_argument("the reaction component must be x or y");
    material.validate();
}

std::vector<double> uniform_loads(double u_max, int steps) {
    if (steps < 0) throw std::invalid_argument("load_steps must be non-negative");
    std::vector<double> loads(steps);
    for (int i = 0; i < steps; ++i) loads[i] = u_max * (i + 1) / steps;
    return loads;
}

double crack_length(std::span<const double> d, const LipMesh& lip, double threshold, std::span<const Point2> path) {
    if (path.size() < 2 || lip.num_vertices() == 0) return 0.0;
    double h = std::numeric_limits<double>::infinity();
    for (const LipEdge& e : lip.edges()) h = std::min(h, e.length);
    const double ds = 0.25 * h;
    const auto& verts = lip.vertices();
    auto cracked = [&](Point2 p) {
        double nearest2 = std::numeric_limits<double>::infinity();
        for (const Point2& q : verts) nearest2 = std::min(nearest2, dot(q - p, q - p));
        const double reach = std::sqrt(nearest2) + 0.5 * h;
        for (std::size_t v = 0; v < verts.size(); ++v)
            if (d[v] >= threshold && norm(verts[v] - p) <= reach) return true;
        return false;
    };
    double length = 0.0;
    double s0 = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
        const Point2 a = path[i], b = path[i + 1];
        const double seg = norm(b - a);
        const int n = std::max(1, static_cast<int>(std::ceil(seg / ds)));
        for (int k = (i == 0 ? 0 : 1); k <= n; ++k) {
            const double t = static_cast<double>(k) / n;
            if (cracked(a + t * (b - a))) length = s0 + t * seg;
        }
        s0 += seg;
    }
    return length;
}

Simulation::Simulation(FeMesh mesh, SimulationConfig config)
    : mesh_(std::move(mesh)),
      config_((config.check(), std::move(config))),
      lip_(build_lip_mesh(mesh_)),
      graph_(lip_),
      constraints_(build_constraints(mesh_, config_.boundary)),
      solver_(mesh_, config_.material, constraints_),
      u_(Eigen::VectorXd::Zero(2 * static_cast<Eigen::Index>(mesh_.num_nodes()))),
      d_(mesh_.num_elements(), 0.0) {
    std::string tag = config_.reaction_tag;
    if (tag.empty()) {
        if (config_.boundary.load.empty()) {
            reaction_comp_ = -1;
        } else {
            tag = config_.boundary.load.front().tag;
            reaction_comp_ = config_.boundary.load.front().comp == Component::y ? 1 : 0;
        }
    } else {
        reaction_comp_ = config_.reaction_comp == Component::y ? 1 : 0;
    }
    if (reaction_comp_ >= 0) reaction_nodes_ = mesh_.nodes_with_tag(mesh_.resolve_tag(tag));
}

double Simulation::dissipated_energy(std::span<const double> d) const {
    double D = 0.0;
    for (std::size_t e = 0; e < mesh_.num_elements(); ++e)
        D += mesh_.areas()[e] * config_.material.Yc * dissipation_h(d[e]);
    return D;
}

double Simulation::potential(const Eigen::VectorXd& u, std::span<const double> d) const {
    return strain_energy(mesh_, u, d, config_.material) + dissipated_energy(d);
}

void Simulation::validate_damage_step(std::span<const Strain2D> strains, std::span<const double> d_n,
                                      std::span<const double> d_new, int iteration) {
    const MaterialParams& mat = config_.material;
    const std::vector<double> d_loc = local_field_update(strains, d_n, mat, config_.damage.local);
    const BoundsPair fast = dijkstra_bounds(d_loc, graph_, mat.l);
    const BoundsPair slow = bruteforce_bounds(d_loc, graph_, mat.l);
    ValidationReport r;
    r.step = steps_done_ + 1;
    r.iteration = iteration;
    for (std::size_t v = 0; v < d_loc.size(); ++v) {
        r.bounds_gap = std::max(r.bounds_gap, std::abs(fast.lower[v] - slow.lower[v]));
        r.bounds_gap = std::max(r.bounds_gap, std::abs(fast.upper[v] - slow.upper[v]));
    }
    DamageTolerances full = config_.damage;
    full.patching = false;
    const std::vector<double> oracle = damage_step(strains, mesh_.areas(), d_n, lip_, graph_, mat, full);
    for (std::size_t v = 0; v < oracle.size(); ++v) r.patch_gap = std::max(r.patch_gap, std::abs(oracle[v] - d_new[v]));
    validation_.push_back(r);
}

StepRecord Simulation::step(double load) {
    const MaterialParams& mat = config_.material;
    const std::vector<double>& d_n = d_;
    StepRecord rec;
    rec.step = steps_done_ + 1;
    rec.load = load;

    Eigen::VectorXd u = u_;
    std::vector<double> d = d_n;
    double previous_F = std::numeric_limits<double>::quiet_NaN();
    bool converged = false;
    for (int it = 1; it <= config_.max_stagger && !converged; ++it) {
        rec.iterations = it;
        u = solver_.solve(d, load, &u);
        rec.potential_history.push_back(potential(u, d));

        const std::vector<Strain2D> strains = element_strains(mesh_, u);
        std::vector<double> d_new = damage_step(strains, mesh_.areas(), d_n, lip_, graph_, mat, config_.damage);
        if (config_.validate) validate_damage_step(strains, d_n, d_new, it);
        const double F = potential(u, d_new);
        rec.potential_history.push_back(F);

        double inc = 0.0;
        for (std::size_t v = 0; v < d.size(); ++v) inc = std::max(inc, std::abs(d_new[v] - d[v]));
        d = std::move(d_new);
        rec.last_increment = inc;
        const bool small_change = inc <= config_.tol_d;
        const bool flat = std::isfinite(previous_F) &&
                          std::abs(previous_F - F) <= config_.tol_F * std::max(std::abs(F), 1e-300);
        converged = small_change || flat;
        previous_F = F;
    }
    if (!converged) {
        std::ostringstream msg;
        msg << "staggered iteration did not converge at load " << load << " after " << config_.max_stagger
            << " iterations (last damage change " << rec.last_increment << "); F history:";
        const std::size_t n = rec.potential_history.size();
        for (std::size_t i = n > 8 ? n - 8 : 0; i < n; ++i) msg << ' ' << rec.potential_history[i];
        throw SolverError(msg.str());
    }
    u = solver_.solve(d, load, &u);
    rec.potential_history.push_back(potential(u, d));

    rec.free_energy = strain_energy(mesh_, u, d, mat);
    rec.dissipated = dissipated_energy(d);
    if (reaction_comp_ >= 0) {
        const Point2 r = reaction_force(mesh_, u, d, mat, reaction_nodes_);
        rec.reaction = reaction_comp_ == 0 ? r.x : r.y;
    }
    const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
    rec.d_min = d.empty() ? 0.0 : *lo;
    rec.d_max = d.empty() ? 0.0 : *hi;
    rec.crack_length = crack_length(d, lip_, config_.crack_threshold, config_.crack_path);

    u_ = std::move(u);
    d_ = std::move(d);
    ++steps_done_;
    return rec;
}

std::vector<StepRecord> run_simulation(Simulation& sim, const StepObserver& observer) {
    std::vector<StepRecord> records;
    records.reserve(sim.config().loads.size());
    for (double load : sim.config().loads) {
        records.push_back(sim.step(load));
        if (observer) observer(sim, records.back());
    }
    return records;
}

}  // namespace lipfield
