#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "lipfield/lip_mesh.hpp"
#include "lipfield/mesh.hpp"
#include "meshgen.hpp"

using namespace lipfield;

namespace {

const char* two_triangles = R"($MeshFormat
2.2 0 8
$EndMeshFormat
$PhysicalNames
2
1 1 "bottom"
2 7 "body"
$EndPhysicalNames
$Nodes
4
1 0 0 0
2 2 0 0
3 2 1 0
4 0 1 0
$EndNodes
$Elements
4
1 1 2 1 1 1 2
2 2 2 7 1 1 2 3
3 2 2 7 1 1 4 3
4 15 2 1 1 1
$EndElements
)";

}  // namespace

TEST(Mesh, ParsesMsh22) {
    std::istringstream in(two_triangles);
    const FeMesh mesh(parse_msh(in));
    EXPECT_EQ(mesh.num_nodes(), 4u);
    EXPECT_EQ(mesh.num_elements(), 2u);
    // second triangle was clockwise in the file
    for (double a : mesh.areas()) EXPECT_DOUBLE_EQ(a, 1.0);
    EXPECT_DOUBLE_EQ(mesh.total_area(), 2.0);
    EXPECT_EQ(mesh.resolve_tag("bottom"), 1);
    EXPECT_EQ(mesh.resolve_tag("1"), 1);
    EXPECT_EQ(mesh.nodes_with_tag(1), (std::vector<int>{0, 1}));
    EXPECT_THROW(mesh.nodes_with_tag(9), MeshError);
    EXPECT_THROW(mesh.resolve_tag("top"), MeshError);
    EXPECT_NEAR(mesh.bbox_diagonal(), std::sqrt(5.0), 1e-15);
    EXPECT_EQ(mesh.boundary_edges().size(), 4u);
    ASSERT_EQ(mesh.boundary_loops().size(), 1u);
    EXPECT_FALSE(mesh.boundary_loops()[0].is_hole);
}

TEST(Mesh, ParseErrorsNameTheLine) {
    std::istringstream in("$MeshFormat\n2.2 0 8\n$EndMeshFormat\n$Nodes\n2\n1 0 0\n");
    try {
        parse_msh(in);
        FAIL() << "expected MeshError";
    } catch (const MeshError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
    }
    std::istringstream none("");
    EXPECT_THROW(parse_msh(none), MeshError);
}

TEST(Mesh, RejectsMissingNodeAndZeroArea) {
    MeshData d;
    d.nodes = {{0, 0}, {1, 0}, {0, 1}};
    d.triangles = {{0, 1, 5}};
    EXPECT_THROW(FeMesh{d}, MeshError);
    d.triangles = {{0, 1, 1}};
    EXPECT_THROW(FeMesh{d}, MeshError);
    d.nodes = {{0, 0}, {1, 0}, {2, 0}};
    d.triangles = {{0, 1, 2}};
    EXPECT_THROW(FeMesh{d}, MeshError);
}

TEST(Mesh, RejectsHangingNode) {
    MeshData d;
    d.nodes = {{0, 0}, {2, 0}, {1, 1}, {0.5, 0.5}, {1, 0}};
    d.triangles = {{0, 1, 2}, {0, 4, 3}};
    EXPECT_THROW(FeMesh{d}, MeshError);
}

TEST(Mesh, WriteReadRoundTrip) {
    const MeshData src = meshgen::plate_with_hole(1.0, 0.2, 4, 3);
    std::stringstream buf;
    write_msh(buf, src);
    const FeMesh a(src);
    const FeMesh b(parse_msh(buf));
    ASSERT_EQ(a.num_nodes(), b.num_nodes());
    ASSERT_EQ(a.num_elements(), b.num_elements());
    for (std::size_t i = 0; i < a.num_nodes(); ++i) EXPECT_EQ(a.nodes()[i], b.nodes()[i]);
    EXPECT_EQ(a.nodes_with_tag(meshgen::hole), b.nodes_with_tag(meshgen::hole));
}

TEST(Mesh, PlateWithHoleLoopsAndArea) {
    const FeMesh mesh(meshgen::plate_with_hole(1.0, 0.2, 8, 6));
    EXPECT_EQ(mesh.num_elements(), 2u * 32u * 6u);
    ASSERT_EQ(mesh.boundary_loops().size(), 2u);
    int holes = 0;
    for (const auto& loop : mesh.boundary_loops()) holes += loop.is_hole ? 1 : 0;
    EXPECT_EQ(holes, 1);
    // polygonal hole: area of the inscribed 32-gon
    const double hole_area = 0.5 * 32 * 0.04 * std::sin(2.0 * std::numbers::pi / 32);
    EXPECT_NEAR(mesh.total_area(), 1.0 - hole_area, 1e-12);
}

TEST(Mesh, SlitKeepsCoincidentBoundaryNodes) {
    const FeMesh mesh(meshgen::slit_strip(2.0, 0.5, 0.5, 8, 2));
    const auto up = mesh.nodes_with_tag(meshgen::crack_upper);
    const auto lo = mesh.nodes_with_tag(meshgen::crack_lower);
    EXPECT_EQ(up.size(), 3u);
    EXPECT_EQ(lo.size(), 3u);
    ASSERT_EQ(mesh.boundary_loops().size(), 1u);
    EXPECT_NEAR(mesh.total_area(), 2.0, 1e-14);
}

TEST(Mesh, NearestNode) {
    const FeMesh mesh(meshgen::structured_rectangle(0, 0, 1, 1, 4, 4));
    EXPECT_EQ(mesh.nodes()[mesh.nearest_node({0.26, 0.49})], (Point2{0.25, 0.5}));
}

TEST(LipMesh, GradientOfLinearFieldIsExact) {
    const LipMesh lip = structured_lip_mesh(0, 0, 2, 1, 5, 3);
    std::vector<double> f(lip.num_vertices());
    for (std::size_t v = 0; v < f.size(); ++v) f[v] = 3.0 * lip.vertices()[v].x - 0.5 * lip.vertices()[v].y + 1.0;
    for (std::size_t t = 0; t < lip.num_triangles(); ++t) {
        const Point2 g = lip.gradient(f, t);
        EXPECT_NEAR(g.x, 3.0, 1e-12);
        EXPECT_NEAR(g.y, -0.5, 1e-12);
    }
    EXPECT_EQ(lip.num_triangles(), 30u);
    EXPECT_EQ(lip.edges().size(), 6u * 3u + 5u * 4u + 15u);
}

TEST(LipMesh, VerticesAreElementCentroids) {
    const FeMesh mesh(meshgen::plate_with_hole(1.0, 0.2, 6, 5));
    const LipMesh lip = build_lip_mesh(mesh);
    ASSERT_EQ(lip.num_vertices(), mesh.num_elements());
    for (std::size_t e = 0; e < mesh.num_elements(); ++e) EXPECT_EQ(lip.vertices()[e], mesh.centroids()[e]);
}

TEST(LipMesh, DoesNotBridgeHoleOrSlit) {
    auto crosses = [](const FeMesh& mesh, const LipMesh& lip) {
        int n = 0;
        for (const LipEdge& e : lip.edges())
            for (const TaggedEdge& b : mesh.boundary_edges())
                if (predicates::segments_intersect(lip.vertices()[e.a], lip.vertices()[e.b],
                                                   mesh.nodes()[b.nodes[0]], mesh.nodes()[b.nodes[1]]))
                    ++n;
        return n;
    };
    const FeMesh plate(meshgen::plate_with_hole(1.0, 0.2, 6, 5));
    EXPECT_EQ(crosses(plate, build_lip_mesh(plate)), 0);
    const FeMesh slit(meshgen::slit_strip(2.0, 0.5, 1.0, 16, 4));
    const LipMesh lip = build_lip_mesh(slit);
    EXPECT_EQ(crosses(slit, lip), 0);
    // but the ligament ahead of the slit is still connected
    const EdgeGraph g(lip);
    const std::vector<int> src{0};
    for (double d : graph_distances(g, src)) EXPECT_TRUE(std::isfinite(d));
}

TEST(LipMesh, GraphDistancesOnGrid) {
    const LipMesh lip = structured_lip_mesh(0, 0, 1, 1, 4, 4);
    const EdgeGraph g(lip);
    const std::vector<int> src{0};
    const auto dist = graph_distances(g, src);
    for (std::size_t v = 0; v < dist.size(); ++v) {
        const Point2 p = lip.vertices()[v];
        EXPECT_GE(dist[v], norm(p) - 1e-14);
        EXPECT_LE(dist[v], p.x + p.y + 1e-14);
    }
}
