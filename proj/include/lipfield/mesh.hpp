#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "lipfield/geometry.hpp"

namespace lipfield {

class MeshError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TaggedEdge {
    std::array<int, 2> nodes{};
    int tag = 0;
};

/// Raw mesh content as stored in a file: no validation, no derived data.
struct MeshData {
    std::vector<Point2> nodes;
    std::vector<Tri> triangles;
    std::vector<TaggedEdge> lines;
    std::map<int, std::string> physical_names;
};

/// Closed boundary polyline, oriented with the domain on its left.
struct BoundaryLoop {
    std::vector<int> nodes;
    bool is_hole = false;
    double signed_area = 0.0;
};

/// Linear-triangle finite-element mesh.
///
/// Construction validates the content: positive areas (clockwise triangles are
/// reordered), conformity, no duplicated interior nodes. Coincident nodes are
/// accepted only when both lie on the boundary (slits, split crack paths).
class FeMesh {
public:
    explicit FeMesh(MeshData data);

    std::size_t num_nodes() const { return nodes_.size(); }
    std::size_t num_elements() const { return triangles_.size(); }

    const std::vector<Point2>& nodes() const { return nodes_; }
    const std::vector<Tri>& triangles() const { return triangles_; }
    const std::vector<double>& areas() const { return areas_; }
    const std::vector<Point2>& centroids() const { return centroids_; }

    /// Topological boundary edges (used by exactly one triangle), oriented with
    /// the element on the left; tag 0 when the file did not tag the edge.
    const std::vector<TaggedEdge>& boundary_edges() const { return boundary_edges_; }
    const std::vector<BoundaryLoop>& boundary_loops() const { return loops_; }
    const std::map<int, std::string>& physical_names() const { return names_; }

    double bbox_diagonal() const { return bbox_diagonal_; }
    double total_area() const;

    /// Sorted unique nodes of all boundary edges carrying `tag`. Throws on an
    /// unknown tag.
    std::vector<int> nodes_with_tag(int tag) const;
    bool has_tag(int tag) const;
    /// Tag from its physical name, or from its decimal spelling.
    int resolve_tag(const std::string& name_or_number) const;

    int nearest_node(Point2 p) const;

    /// Raw content suitable for write_msh.
    MeshData data() const;

private:
    std::vector<Point2> nodes_;
    std::vector<Tri> triangles_;
    std::vector<double> areas_;
    std::vector<Point2> centroids_;
    std::vector<TaggedEdge> boundary_edges_;
    std::vector<TaggedEdge> tagged_lines_;
    std::vector<BoundaryLoop> loops_;
    std::map<int, std::string> names_;
    double bbox_diagonal_ = 0.0;
};

/// Reads the ASCII MSH 2.2 subset: $MeshFormat, $PhysicalNames, $Nodes,
/// $Elements with 3-node triangles (type 2), 2-node lines (type 1) and points
/// (type 15, ignored). Nodes not used by any triangle are dropped.
FeMesh read_mesh(const std::filesystem::path& path);
MeshData parse_msh(std::istream& in);

void write_msh(std::ostream& out, const MeshData& data);
void write_msh(const std::filesystem::path& path, const MeshData& data);

}  // namespace lipfield
