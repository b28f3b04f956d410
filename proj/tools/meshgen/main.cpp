#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "meshgen.hpp"

int main(int argc, char** argv) {
    using namespace lipfield;
    CLI::App app{"Structured MSH 2.2 meshes for the lipfield examples"};
    app.require_subcommand(1);
    std::string out;
    double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0, L = 2.0, R = 0.2, Lx = 3.0, H = 0.5, a0 = 0.0, jitter = 0.2,
           grading = 1.0;
    int nx = 8, ny = 8, n_side = 16, n_radial = 22;
    unsigned long long seed = 1;

    auto* rect = app.add_subcommand("rectangle", "[x0,x1]x[y0,y1], tags bottom/right/top/left");
    rect->add_option("--x0", x0);
    rect->add_option("--y0", y0);
    rect->add_option("--x1", x1);
    rect->add_option("--y1", y1);
    rect->add_option("--nx", nx);
    rect->add_option("--ny", ny);
    auto* plate = app.add_subcommand("plate", "square of side L with a centred hole of radius R");
    plate->add_option("--L", L);
    plate->add_option("--R", R);
    plate->add_option("--n-side", n_side, "cells per square side");
    plate->add_option("--n-radial", n_radial, "graded layers between hole and sides");
    auto* slit = app.add_subcommand("slit", "strip [0,Lx]x[-H,H] with a slit of length a0 on y = 0");
    slit->add_option("--Lx", Lx);
    slit->add_option("--H", H);
    slit->add_option("--a0", a0);
    slit->add_option("--nx", nx);
    slit->add_option("--ny-half", ny);
    slit->add_option("--grading", grading, "row height ratio away from the slit");
    auto* halves = app.add_subcommand("halves", "two half strips with coincident nodes on y = 0");
    halves->add_option("--Lx", Lx);
    halves->add_option("--H", H);
    halves->add_option("--nx", nx);
    halves->add_option("--ny-half", ny);
    auto* jit = app.add_subcommand("jitter", "[0,Lx]x[0,H] with jittered interior nodes");
    jit->add_option("--Lx", Lx);
    jit->add_option("--H", H);
    jit->add_option("--nx", nx);
    jit->add_option("--ny", ny);
    jit->add_option("--jitter", jitter);
    jit->add_option("--seed", seed);
    for (CLI::App* sub : {rect, plate, slit, halves, jit}) sub->add_option("-o,--output", out, "MSH file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }
    try {
        MeshData m;
        if (rect->parsed())
            m = meshgen::structured_rectangle(x0, y0, x1, y1, nx, ny);
        else if (plate->parsed())
            m = meshgen::plate_with_hole(L, R, n_side, n_radial);
        else if (slit->parsed())
            m = meshgen::slit_strip(Lx, H, a0, nx, ny, grading);
        else if (halves->parsed())
            m = meshgen::two_half_strip(Lx, H, nx, ny);
        else
            m = meshgen::perturbed_rectangle(Lx, H, nx, ny, jitter, seed);
        FeMesh checked(m);
        write_msh(out, m);
        std::cout << out << ": " << checked.num_nodes() << " nodes, " << checked.num_elements() << " elements\n";
    } catch (const std::exception& e) {
        std::cerr << "lipfield-meshgen: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
