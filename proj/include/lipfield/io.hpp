#pragma once

#include <cstdio>
#include <filesystem>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lipfield/lip_mesh.hpp"
#include "lipfield/mesh.hpp"

namespace lipfield {

/// Malformed, missing or unknown configuration entry.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An output file or directory could not be written.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Flat `key = value` text. `#` starts a comment, blank lines are ignored and
/// keys may repeat (repeatable keys are read with get_all).
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in, const std::string& source = "<config>");
    static KeyValueConfig load(const std::filesystem::path& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> get_all(const std::string& key) const;
    /// Whitespace- or comma-separated numbers.
    std::vector<double> get_doubles(const std::string& key) const;

    /// Throws on the first key outside `allowed`.
    void reject_unknown(std::initializer_list<const char*> allowed) const;

    /// Relative paths resolve against the directory of the config file.
    std::filesystem::path resolve_path(const std::string& value) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
    const std::string& source() const { return source_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
    std::string source_;
    std::filesystem::path base_dir_;

    const std::string* find_last(const std::string& key) const;
};

double parse_double(const std::string& text, const std::string& what);
int parse_int(const std::string& text, const std::string& what);
std::vector<std::string> split_words(const std::string& text);

/// printf("%.17g")
std::string format_number(double v);

/// CSV file with a header row; every value printed with 17 significant digits.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    ~CsvWriter();
    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    void row(std::span<const double> values);
    void row(std::initializer_list<double> values) { row(std::span<const double>(values.begin(), values.size())); }
    void flush();

private:
    std::FILE* file_ = nullptr;
    std::size_t columns_ = 0;
};

/// VTK legacy ASCII unstructured grid of the FE mesh: point displacement
/// (omitted when u is empty) and cell damage.
void write_vtk_fe(const std::filesystem::path& path, const FeMesh& mesh, const Eigen::VectorXd& u,
                  std::span<const double> cell_damage, const std::string& title = "lipfield");

struct NamedField {
    std::string name;
    std::span<const double> values;
};

/// VTK legacy ASCII unstructured grid of the Lip-mesh with point fields.
void write_vtk_lip(const std::filesystem::path& path, const LipMesh& lip, const std::vector<NamedField>& fields,
                   const std::string& title = "lipfield");
inline void write_vtk_lip(const std::filesystem::path& path, const LipMesh& lip, std::span<const double> damage,
                          const std::string& title = "lipfield") {
    write_vtk_lip(path, lip, {{"damage", damage}}, title);
}

/// Creates the directory (and parents); throws OutputError on failure.
void ensure_directory(const std::filesystem::path& dir);

}  // namespace lipfield
