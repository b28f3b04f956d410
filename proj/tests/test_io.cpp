#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "lipfield/io.hpp"
#include "meshgen.hpp"

namespace lipfield {
namespace {

namespace fs = std::filesystem;

KeyValueConfig parse(const std::string& text) {
    std::istringstream in(text);
    return KeyValueConfig::parse(in, "test.cfg");
}

std::vector<std::string> read_lines(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("lipfield_io_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

TEST(KeyValueConfig, ParsesCommentsRepeatsAndLastWins) {
    const auto cfg = parse("# header\nE = 1.5   # trailing\n\nfix = left x\nfix = bottom y\nE=2\n");
    EXPECT_DOUBLE_EQ(cfg.get_double("E"), 2.0);
    EXPECT_EQ(cfg.get_all("fix"), (std::vector<std::string>{"left x", "bottom y"}));
    EXPECT_FALSE(cfg.has("nu"));
    EXPECT_DOUBLE_EQ(cfg.get_double("nu", 0.3), 0.3);
}

TEST(KeyValueConfig, MissingKeyIsNamed) {
    const auto cfg = parse("E = 1\n");
    try {
        cfg.get_string("mesh");
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("'mesh'"), std::string::npos);
    }
}

TEST(KeyValueConfig, RejectsMalformedInput) {
    EXPECT_THROW(parse("just a line\n"), ConfigError);
    EXPECT_THROW(parse("= 3\n"), ConfigError);
    EXPECT_THROW(parse("E = 1x\n").get_double("E"), ConfigError);
    EXPECT_THROW(parse("E = nan\n").get_double("E"), ConfigError);
    EXPECT_THROW(parse("n = 2.5\n").get_int("n"), ConfigError);
    EXPECT_THROW(parse("flag = maybe\n").get_bool("flag", false), ConfigError);
    EXPECT_THROW(parse("E =\n").get_string("E"), ConfigError);
}

TEST(KeyValueConfig, UnknownKeysAreReported) {
    const auto cfg = parse("E = 1\nYoung = 2\n");
    try {
        cfg.reject_unknown({"E", "nu"});
        FAIL() << "expected ConfigError";
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("'Young'"), std::string::npos);
    }
}

TEST(KeyValueConfig, NumberListsAndBooleans) {
    const auto cfg = parse("r = 8, 16 32\nv = yes\nw = Off\n");
    EXPECT_EQ(cfg.get_doubles("r"), (std::vector<double>{8, 16, 32}));
    EXPECT_TRUE(cfg.get_bool("v", false));
    EXPECT_FALSE(cfg.get_bool("w", true));
}

TEST(KeyValueConfig, PathsResolveAgainstConfigDirectory) {
    const fs::path dir = scratch_dir("paths");
    std::ofstream(dir / "a.cfg") << "mesh = meshes/m.msh\n";
    const auto cfg = KeyValueConfig::load(dir / "a.cfg");
    EXPECT_EQ(cfg.resolve_path(cfg.get_string("mesh")), dir / "meshes/m.msh");
    EXPECT_EQ(cfg.resolve_path("/abs/m.msh"), fs::path("/abs/m.msh"));
    EXPECT_THROW(KeyValueConfig::load(dir / "missing.cfg"), ConfigError);
}

TEST(FormatNumber, RoundTripsExactly) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) {
        EXPECT_EQ(std::strtod(format_number(v).c_str(), nullptr), v);
    }
    EXPECT_EQ(format_number(0.1), "0.10000000000000001");
}

TEST(CsvWriter, WritesHeaderAndSeventeenDigits) {
    const fs::path p = scratch_dir("csv") / "out.csv";
    {
        CsvWriter csv(p, {"a [mm]", "b [-]"});
        csv.row({0.1, 2.0});
        EXPECT_THROW(csv.row({1.0}), std::invalid_argument);
    }
    const auto lines = read_lines(p);
    ASSERT_EQ(lines.size(), 2u);
    EXPECT_EQ(lines[0], "a [mm],b [-]");
    EXPECT_EQ(lines[1], "0.10000000000000001,2");
}

TEST(CsvWriter, UnwritablePathThrows) {
    EXPECT_THROW(CsvWriter("/nonexistent_dir_lipfield/x.csv", {"a"}), OutputError);
}

TEST(Vtk, FeFileHasConsistentSections) {
    const FeMesh mesh(meshgen::structured_rectangle(0, 0, 1, 1, 2, 1));
    Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(2 * mesh.num_nodes(), 0.0, 1.0);
    std::vector<double> d(mesh.num_elements(), 0.25);
    const fs::path p = scratch_dir("vtk") / "fe.vtk";
    write_vtk_fe(p, mesh, u, d);
    const auto lines = read_lines(p);
    ASSERT_GE(lines.size(), 5u);
    EXPECT_EQ(lines[0], "# vtk DataFile Version 3.0");
    EXPECT_EQ(lines[2], "ASCII");
    EXPECT_EQ(lines[3], "DATASET UNSTRUCTURED_GRID");
    EXPECT_EQ(lines[4], "POINTS 6 double");
    auto find = [&](const std::string& s) {
        for (std::size_t i = 0; i < lines.size(); ++i)
            if (lines[i] == s) return static_cast<long>(i);
        return -1L;
    };
    EXPECT_GE(find("CELLS 4 16"), 0);
    EXPECT_GE(find("CELL_TYPES 4"), 0);
    EXPECT_GE(find("CELL_DATA 4"), 0);
    EXPECT_GE(find("POINT_DATA 6"), 0);
    EXPECT_EQ(lines[find("CELL_DATA 4") + 3], "0.25");

    EXPECT_THROW(write_vtk_fe(p, mesh, u, std::vector<double>(3, 0.0)), std::invalid_argument);
}

TEST(Vtk, LipFileCarriesAllNamedFields) {
    const FeMesh mesh(meshgen::structured_rectangle(0, 0, 1, 1, 3, 3));
    const LipMesh lip = build_lip_mesh(mesh);
    std::vector<double> a(lip.num_vertices(), 1.0), b(lip.num_vertices(), 2.0);
    const fs::path p = scratch_dir("lip") / "lip.vtk";
    write_vtk_lip(p, lip, {{"first", a}, {"second", b}});
    const auto lines = read_lines(p);
    int scalars = 0;
    for (const auto& l : lines) scalars += l.rfind("SCALARS", 0) == 0;
    EXPECT_EQ(scalars, 2);
    EXPECT_EQ(lines[4], "POINTS " + std::to_string(lip.num_vertices()) + " double");
    EXPECT_THROW(write_vtk_lip(p, lip, {{"short", std::vector<double>(2, 0.0)}}), std::invalid_argument);
}

}  // namespace
}  // namespace lipfield
