// Regenerates a replay fixture directory from its scenario file.
//
//   spinach_make_fixtures <scenario.json> <out-dir>

#include <fstream>
#include <iostream>

#include "fixture_builder.hpp"

int main(int argc, char** argv)
{
    if (argc != 3) {
        std::cerr << "usage: spinach_make_fixtures <scenario.json> <out-dir>\n";
        return 2;
    }
    try {
        std::ifstream in(argv[1]);
        spinach::testing::build_fixture(nlohmann::json::parse(in), argv[2]);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
