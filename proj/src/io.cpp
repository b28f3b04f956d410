#include "lipfield/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace lipfield {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class FileHandle {
public:
    explicit FileHandle(const std::filesystem::path& path) : f_(std::fopen(path.c_str(), "w")) {
        if (f_ == nullptr) throw OutputError("cannot write " + path.string() + ": " + std::strerror(errno));
    }
    ~FileHandle() {
        if (f_ != nullptr) std::fclose(f_);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
    std::FILE* get() const { return f_; }
    void close(const std::filesystem::path& path) {
        const bool bad = std::ferror(f_) != 0;
        const int rc = std::fclose(f_);
        f_ = nullptr;
        if (bad || rc != 0) throw OutputError("error writing " + path.string());
    }

private:
    std::FILE* f_;
};

void write_points_header(std::FILE* f, const std::string& title, std::size_t n) {
    std::fprintf(f, "# vtk DataFile Version 3.0\n%s\nASCII\nDATASET UNSTRUCTURED_GRID\n", title.c_str());
    std::fprintf(f, "POINTS %zu double\n", n);
}

void write_triangles(std::FILE* f, const std::vector<Tri>& tris) {
    std::fprintf(f, "CELLS %zu %zu\n", tris.size(), 4 * tris.size());
    for (const Tri& t : tris) std::fprintf(f, "3 %d %d %d\n", t[0], t[1], t[2]);
    std::fprintf(f, "CELL_TYPES %zu\n", tris.size());
    for (std::size_t i = 0; i < tris.size(); ++i) std::fputs("5\n", f);
}

void write_scalars(std::FILE* f, const char* name, std::span<const double> values) {
    std::fprintf(f, "SCALARS %s double 1\nLOOKUP_TABLE default\n", name);
    for (double v : values) std::fprintf(f, "%.17g\n", v);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& source) {
    KeyValueConfig cfg;
    cfg.source_ = source;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
        cfg.entries_.emplace_back(std::move(key), std::move(value));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    KeyValueConfig cfg = parse(in, path.string());
    cfg.base_dir_ = path.parent_path();
    return cfg;
}

const std::string* KeyValueConfig::find_last(const std::string& key) const {
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it)
        if (it->first == key) return &it->second;
    return nullptr;
}

bool KeyValueConfig::has(const std::string& key) const { return find_last(key) != nullptr; }

std::string KeyValueConfig::get_string(const std::string& key) const {
    const std::string* v = find_last(key);
    if (v == nullptr) throw ConfigError("missing required key '" + key + "'");
    if (v->empty()) throw ConfigError("key '" + key + "' has an empty value");
    return *v;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double KeyValueConfig::get_double(const std::string& key) const { return parse_double(get_string(key), key); }

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int KeyValueConfig::get_int(const std::string& key) const { return parse_int(get_string(key), key); }

int KeyValueConfig::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    std::string v = get_string(key);
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'");
}

std::vector<std::string> KeyValueConfig::get_all(const std::string& key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_)
        if (k == key) out.push_back(v);
    return out;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key) const {
    std::string text = get_string(key);
    std::replace(text.begin(), text.end(), ',', ' ');
    std::vector<double> out;
    for (const std::string& w : split_words(text)) out.push_back(parse_double(w, key));
    return out;
}

void KeyValueConfig::reject_unknown(std::initializer_list<const char*> allowed) const {
    for (const auto& [k, v] : entries_) {
        const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; });
        if (!known) throw ConfigError("unknown key '" + k + "' in " + source_);
    }
}

std::filesystem::path KeyValueConfig::resolve_path(const std::string& value) const {
    const std::filesystem::path p(value);
    return p.is_absolute() || base_dir_.empty() ? p : base_dir_ / p;
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
        throw ConfigError("key '" + what + "': expected a finite number, got '" + text + "'");
    return v;
}

int parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long v = std::strtol(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || v < std::numeric_limits<int>::min() ||
        v > std::numeric_limits<int>::max())
        throw ConfigError("key '" + what + "': expected an integer, got '" + text + "'");
    return static_cast<int>(v);
}

std::vector<std::string> split_words(const std::string& text) {
    std::istringstream in(text);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
    : file_(std::fopen(path.c_str(), "w")), columns_(header.size()) {
    if (file_ == nullptr) throw OutputError("cannot write " + path.string() + ": " + std::strerror(errno));
    for (std::size_t i = 0; i < header.size(); ++i) std::fprintf(file_, "%s%s", i ? "," : "", header[i].c_str());
    std::fputc('\n', file_);
}

CsvWriter::~CsvWriter() {
    if (file_ != nullptr) std::fclose(file_);
}

void CsvWriter::row(std::span<const double> values) {
    if (values.size() != columns_) throw std::invalid_argument("CSV row width does not match the header");
    for (std::size_t i = 0; i < values.size(); ++i) std::fprintf(file_, "%s%.17g", i ? "," : "", values[i]);
    std::fputc('\n', file_);
}

void CsvWriter::flush() { std::fflush(file_); }

void write_vtk_fe(const std::filesystem::path& path, const FeMesh& mesh, const Eigen::VectorXd& u,
                  std::span<const double> cell_damage, const std::string& title) {
    if (cell_damage.size() != mesh.num_elements()) throw std::invalid_argument("cell damage size mismatch");
    if (u.size() != 0 && u.size() != 2 * static_cast<Eigen::Index>(mesh.num_nodes()))
        throw std::invalid_argument("displacement size mismatch");
    FileHandle f(path);
    write_points_header(f.get(), title, mesh.num_nodes());
    for (const Point2& p : mesh.nodes()) std::fprintf(f.get(), "%.17g %.17g 0\n", p.x, p.y);
    write_triangles(f.get(), mesh.triangles());
    std::fprintf(f.get(), "CELL_DATA %zu\n", mesh.num_elements());
    write_scalars(f.get(), "damage", cell_damage);
    if (u.size() != 0) {
        std::fprintf(f.get(), "POINT_DATA %zu\nVECTORS displacement double\n", mesh.num_nodes());
        for (std::size_t i = 0; i < mesh.num_nodes(); ++i)
            std::fprintf(f.get(), "%.17g %.17g 0\n", u[2 * i], u[2 * i + 1]);
    }
    f.close(path);
}

void write_vtk_lip(const std::filesystem::path& path, const LipMesh& lip, const std::vector<NamedField>& fields,
                   const std::string& title) {
    for (const NamedField& f : fields)
        if (f.values.size() != lip.num_vertices()) throw std::invalid_argument("point field '" + f.name + "' size mismatch");
    FileHandle f(path);
    write_points_header(f.get(), title, lip.num_vertices());
    for (const Point2& p : lip.vertices()) std::fprintf(f.get(), "%.17g %.17g 0\n", p.x, p.y);
    write_triangles(f.get(), lip.triangles());
    if (!fields.empty()) std::fprintf(f.get(), "POINT_DATA %zu\n", lip.num_vertices());
    for (const NamedField& field : fields) write_scalars(f.get(), field.name.c_str(), field.values);
    f.close(path);
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw OutputError("cannot create output directory " + dir.string());
}

}  // namespace lipfield
