#include "lipfield/mesh.hpp"

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace lipfield {

namespace {

std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

struct EdgeUse {
    int count = 0;
    int a = -1, b = -1;  // direction as traversed by the first triangle
    int tri = -1;
};

}  // namespace

FeMesh::FeMesh(MeshData data) : names_(std::move(data.physical_names)) {
    const int n_in = static_cast<int>(data.nodes.size());
    if (data.triangles.empty()) throw MeshError("mesh has no triangles");

    // Drop nodes that no triangle uses.
    std::vector<int> remap(n_in, -1);
    for (std::size_t e = 0; e < data.triangles.size(); ++e) {
        for (int v : data.triangles[e]) {
            if (v < 0 || v >= n_in)
                throw MeshError("element " + std::to_string(e) + " references missing node " + std::to_string(v));
            remap[v] = 0;
        }
    }
    for (int i = 0; i < n_in; ++i) {
        if (remap[i] == 0) {
            remap[i] = static_cast<int>(nodes_.size());
            nodes_.push_back(data.nodes[i]);
        }
    }

    double xmin = std::numeric_limits<double>::max(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const Point2& p : nodes_) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
    }
    bbox_diagonal_ = std::hypot(xmax - xmin, ymax - ymin);

    triangles_.reserve(data.triangles.size());
    areas_.reserve(data.triangles.size());
    centroids_.reserve(data.triangles.size());
    const double area_floor = 1e-15 * bbox_diagonal_ * bbox_diagonal_;
    for (std::size_t e = 0; e < data.triangles.size(); ++e) {
        Tri t{remap[data.triangles[e][0]], remap[data.triangles[e][1]], remap[data.triangles[e][2]]};
        const Point2 a = nodes_[t[0]], b = nodes_[t[1]], c = nodes_[t[2]];
        const int o = predicates::orient(a, b, c);
        double area = signed_area(a, b, c);
        if (o == 0 || std::abs(area) <= area_floor)
            throw MeshError("zero-area element " + std::to_string(e));
        if (o < 0) {
            std::swap(t[1], t[2]);
            area = -area;
        }
        triangles_.push_back(t);
        areas_.push_back(area);
        centroids_.push_back(centroid(a, b, c));
    }

    // Conformity: every edge used once (boundary) or twice in opposite directions.
    std::unordered_map<std::uint64_t, EdgeUse> uses;
    uses.reserve(3 * triangles_.size());
    for (std::size_t e = 0; e < triangles_.size(); ++e) {
        const Tri& t = triangles_[e];
        for (int i = 0; i < 3; ++i) {
            const int a = t[i], b = t[(i + 1) % 3];
            EdgeUse& u = uses[edge_key(a, b)];
            if (u.count == 0) {
                u.a = a;
                u.b = b;
                u.tri = static_cast<int>(e);
            } else if (u.count == 1) {
                if (u.a == a)
                    throw MeshError("non-conforming mesh: elements " + std::to_string(u.tri) + " and " +
                                    std::to_string(e) + " overlap");
            } else {
                throw MeshError("non-conforming mesh: edge of element " + std::to_string(e) +
                                " shared by more than two elements");
            }
            ++u.count;
        }
    }

    std::unordered_map<std::uint64_t, int> line_tags;
    for (const TaggedEdge& line : data.lines) {
        for (int v : line.nodes) {
            if (v < 0 || v >= n_in || remap[v] < 0)
                throw MeshError("boundary line references node " + std::to_string(v) + " outside the triangulation");
        }
        line_tags[edge_key(remap[line.nodes[0]], remap[line.nodes[1]])] = line.tag;
    }

    std::vector<char> on_boundary(nodes_.size(), 0);
    for (const auto& [key, u] : uses) {
        if (u.count != 1) continue;
        auto it = line_tags.find(key);
        boundary_edges_.push_back(TaggedEdge{{u.a, u.b}, it == line_tags.end() ? 0 : it->second});
        on_boundary[u.a] = on_boundary[u.b] = 1;
    }
    std::sort(boundary_edges_.begin(), boundary_edges_.end(),
              [](const TaggedEdge& l, const TaggedEdge& r) { return l.nodes < r.nodes; });

    // Keep the file's tagged lines, including interior ones, for tag lookups.
    for (const TaggedEdge& line : data.lines) {
        tagged_lines_.push_back(TaggedEdge{{remap[line.nodes[0]], remap[line.nodes[1]]}, line.tag});
    }

    // Coincident nodes are only legitimate on the boundary (slits, split crack paths).
    std::vector<int> order(nodes_.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) { return nodes_[i].x < nodes_[j].x; });
    const double dup_tol = 1e-12 * bbox_diagonal_;
    for (std::size_t s = 0; s < order.size(); ++s) {
        for (std::size_t k = s + 1; k < order.size(); ++k) {
            const Point2 p = nodes_[order[s]], q = nodes_[order[k]];
            if (q.x - p.x > dup_tol) break;
            if (distance(p, q) <= dup_tol && !(on_boundary[order[s]] && on_boundary[order[k]]))
                throw MeshError("duplicate nodes " + std::to_string(order[s]) + " and " + std::to_string(order[k]));
        }
    }

    // Hanging nodes show up as boundary nodes lying inside another boundary edge.
    std::vector<int> bnodes;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
        if (on_boundary[i]) bnodes.push_back(static_cast<int>(i));
    std::sort(bnodes.begin(), bnodes.end(), [&](int i, int j) { return nodes_[i].x < nodes_[j].x; });
    for (const TaggedEdge& be : boundary_edges_) {
        const Point2 a = nodes_[be.nodes[0]], b = nodes_[be.nodes[1]];
        const double lo = std::min(a.x, b.x), hi = std::max(a.x, b.x);
        const double ylo = std::min(a.y, b.y), yhi = std::max(a.y, b.y);
        auto it = std::lower_bound(bnodes.begin(), bnodes.end(), lo,
                                   [&](int i, double x) { return nodes_[i].x < x; });
        for (; it != bnodes.end() && nodes_[*it].x <= hi; ++it) {
            const Point2 c = nodes_[*it];
            if (c.y < ylo || c.y > yhi || c == a || c == b) continue;
            if (predicates::orient(a, b, c) == 0)
                throw MeshError("non-conforming mesh: hanging node " + std::to_string(*it));
        }
    }

    // Chain boundary edges into closed loops.
    std::unordered_multimap<int, int> outgoing;
    for (std::size_t i = 0; i < boundary_edges_.size(); ++i) outgoing.emplace(boundary_edges_[i].nodes[0], static_cast<int>(i));
    std::vector<char> used(boundary_edges_.size(), 0);
    for (std::size_t s = 0; s < boundary_edges_.size(); ++s) {
        if (used[s]) continue;
        BoundaryLoop loop;
        int cur = static_cast<int>(s);
        const int start_node = boundary_edges_[s].nodes[0];
        while (true) {
            used[cur] = 1;
            loop.nodes.push_back(boundary_edges_[cur].nodes[0]);
            const int head = boundary_edges_[cur].nodes[1];
            if (head == start_node) break;
            int nxt = -1;
            auto range = outgoing.equal_range(head);
            for (auto it = range.first; it != range.second; ++it) {
                if (!used[it->second]) {
                    nxt = it->second;
                    break;
                }
            }
            if (nxt < 0) throw MeshError("boundary is not a set of closed loops near node " + std::to_string(head));
            cur = nxt;
        }
        double area2 = 0.0;
        for (std::size_t i = 0; i < loop.nodes.size(); ++i) {
            const Point2 p = nodes_[loop.nodes[i]], q = nodes_[loop.nodes[(i + 1) % loop.nodes.size()]];
            area2 += cross(p, q);
        }
        loop.signed_area = 0.5 * area2;
        loop.is_hole = loop.signed_area < 0.0;
        loops_.push_back(std::move(loop));
    }
}

double FeMesh::total_area() const { return std::accumulate(areas_.begin(), areas_.end(), 0.0); }

bool FeMesh::has_tag(int tag) const {
    return std::any_of(tagged_lines_.begin(), tagged_lines_.end(), [tag](const TaggedEdge& e) { return e.tag == tag; });
}

std::vector<int> FeMesh::nodes_with_tag(int tag) const {
    std::vector<int> out;
    for (const TaggedEdge& e : tagged_lines_) {
        if (e.tag != tag) continue;
        out.push_back(e.nodes[0]);
        out.push_back(e.nodes[1]);
    }
    if (out.empty()) throw MeshError("unknown boundary tag " + std::to_string(tag));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

int FeMesh::resolve_tag(const std::string& name_or_number) const {
    for (const auto& [tag, name] : names_) {
        if (name == name_or_number) return tag;
    }
    int tag = 0;
    const char* first = name_or_number.data();
    const char* last = first + name_or_number.size();
    auto [ptr, ec] = std::from_chars(first, last, tag);
    if (ec != std::errc() || ptr != last) throw MeshError("unknown boundary tag '" + name_or_number + "'");
    if (!has_tag(tag)) throw MeshError("unknown boundary tag " + name_or_number);
    return tag;
}

int FeMesh::nearest_node(Point2 p) const {
    int best = 0;
    double best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        const double d = distance(nodes_[i], p);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

MeshData FeMesh::data() const {
    MeshData out;
    out.nodes = nodes_;
    out.triangles = triangles_;
    out.lines = tagged_lines_;
    out.physical_names = names_;
    return out;
}

// ---------------------------------------------------------------------------
// MSH 2.2 ASCII

namespace {

std::string next_token_line(std::istream& in, int& line_no) {
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") != std::string::npos) return line;
    }
    return {};
}

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
    throw MeshError("MSH parse error at line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

MeshData parse_msh(std::istream& in) {
    MeshData data;
    std::unordered_map<long, int> node_index;
    int line_no = 0;
    bool have_format = false, have_nodes = false, have_elements = false;

    for (std::string line = next_token_line(in, line_no); !line.empty(); line = next_token_line(in, line_no)) {
        if (line == "$MeshFormat") {
            std::istringstream ss(next_token_line(in, line_no));
            std::string version;
            int file_type = -1, data_size = 0;
            ss >> version >> file_type >> data_size;
            if (version != "2.2") parse_fail(line_no, "unsupported MSH version '" + version + "' (expected 2.2)");
            if (file_type != 0) parse_fail(line_no, "binary MSH files are not supported");
            if (next_token_line(in, line_no) != "$EndMeshFormat") parse_fail(line_no, "expected $EndMeshFormat");
            have_format = true;
        } else if (line == "$PhysicalNames") {
            int count = 0;
            if (!(std::istringstream(next_token_line(in, line_no)) >> count)) parse_fail(line_no, "bad physical name count");
            for (int i = 0; i < count; ++i) {
                std::istringstream ss(next_token_line(in, line_no));
                int dim = 0, tag = 0;
                std::string name;
                if (!(ss >> dim >> tag >> std::quoted(name))) parse_fail(line_no, "malformed physical name");
                data.physical_names[tag] = name;
            }
            if (next_token_line(in, line_no) != "$EndPhysicalNames") parse_fail(line_no, "expected $EndPhysicalNames");
        } else if (line == "$Nodes") {
            long count = 0;
            if (!(std::istringstream(next_token_line(in, line_no)) >> count) || count < 0)
                parse_fail(line_no, "bad node count");
            data.nodes.reserve(count);
            for (long i = 0; i < count; ++i) {
                std::istringstream ss(next_token_line(in, line_no));
                long id = 0;
                double x = 0, y = 0, z = 0;
                if (!(ss >> id >> x >> y >> z)) parse_fail(line_no, "malformed node record");
                if (!node_index.emplace(id, static_cast<int>(data.nodes.size())).second)
                    parse_fail(line_no, "duplicate node id " + std::to_string(id));
                data.nodes.push_back({x, y});
            }
            if (next_token_line(in, line_no) != "$EndNodes") parse_fail(line_no, "expected $EndNodes");
            have_nodes = true;
        } else if (line == "$Elements") {
            if (!have_nodes) parse_fail(line_no, "$Elements before $Nodes");
            long count = 0;
            if (!(std::istringstream(next_token_line(in, line_no)) >> count) || count < 0)
                parse_fail(line_no, "bad element count");
            for (long i = 0; i < count; ++i) {
                std::istringstream ss(next_token_line(in, line_no));
                long id = 0;
                int type = 0, ntags = 0;
                if (!(ss >> id >> type >> ntags) || ntags < 0) parse_fail(line_no, "malformed element record");
                std::vector<long> tags(ntags);
                for (long& t : tags)
                    if (!(ss >> t)) parse_fail(line_no, "malformed element tags");
                int nnodes = 0;
                switch (type) {
                    case 1: nnodes = 2; break;
                    case 2: nnodes = 3; break;
                    case 15: nnodes = 1; break;
                    default:
                        parse_fail(line_no, "unsupported element type " + std::to_string(type) + " (element " +
                                                std::to_string(id) + ")");
                }
                std::array<int, 3> nodes{};
                for (int k = 0; k < nnodes; ++k) {
                    long nid = 0;
                    if (!(ss >> nid)) parse_fail(line_no, "missing element node");
                    auto it = node_index.find(nid);
                    if (it == node_index.end())
                        parse_fail(line_no, "element " + std::to_string(id) + " references unknown node " + std::to_string(nid));
                    nodes[k] = it->second;
                }
                if (type == 2)
                    data.triangles.push_back({nodes[0], nodes[1], nodes[2]});
                else if (type == 1)
                    data.lines.push_back(TaggedEdge{{nodes[0], nodes[1]}, ntags > 0 ? static_cast<int>(tags[0]) : 0});
            }
            if (next_token_line(in, line_no) != "$EndElements") parse_fail(line_no, "expected $EndElements");
            have_elements = true;
        } else if (line.size() > 1 && line[0] == '$') {
            const std::string end = "$End" + line.substr(1);
            std::string skip;
            do {
                skip = next_token_line(in, line_no);
                if (skip.empty()) parse_fail(line_no, "unterminated section " + line);
            } while (skip != end);
        } else {
            parse_fail(line_no, "unexpected content '" + line + "'");
        }
    }
    if (!have_format) throw MeshError("MSH parse error: missing $MeshFormat section");
    if (!have_nodes || !have_elements) throw MeshError("MSH parse error: missing $Nodes or $Elements section");
    return data;
}

FeMesh read_mesh(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MeshError("cannot open mesh file " + path.string());
    return FeMesh(parse_msh(in));
}

void write_msh(std::ostream& out, const MeshData& data) {
    out << "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n";
    if (!data.physical_names.empty()) {
        out << "$PhysicalNames\n" << data.physical_names.size() << "\n";
        for (const auto& [tag, name] : data.physical_names) out << 1 << ' ' << tag << " \"" << name << "\"\n";
        out << "$EndPhysicalNames\n";
    }
    out << "$Nodes\n" << data.nodes.size() << "\n";
    out << std::setprecision(17);
    for (std::size_t i = 0; i < data.nodes.size(); ++i)
        out << i + 1 << ' ' << data.nodes[i].x << ' ' << data.nodes[i].y << " 0\n";
    out << "$EndNodes\n$Elements\n" << data.lines.size() + data.triangles.size() << "\n";
    std::size_t id = 1;
    for (const TaggedEdge& e : data.lines)
        out << id++ << " 1 2 " << e.tag << ' ' << e.tag << ' ' << e.nodes[0] + 1 << ' ' << e.nodes[1] + 1 << "\n";
    for (const Tri& t : data.triangles)
        out << id++ << " 2 2 0 1 " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << "\n";
    out << "$EndElements\n";
}

void write_msh(const std::filesystem::path& path, const MeshData& data) {
    std::ofstream out(path);
    if (!out) throw MeshError("cannot write mesh file " + path.string());
    write_msh(out, data);
}

}  // namespace lipfield
