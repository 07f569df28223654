// Regenerates the bundled synthetic inputs (data/fixture by default).

#include <iostream>

#include "CLI11.hpp"
#include "synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Write the deterministic 358-region synthetic fixture"};
  std::string dir = "data/fixture";
  std::uint64_t seed = fixture::kNationalSeed;
  double missing_rate = 0.01;
  app.add_option("--output-dir,-o", dir, "destination directory");
  app.add_option("--seed", seed, "generator seed");
  app.add_option("--missing-rate", missing_rate, "fraction of populated cells left missing");
  CLI11_PARSE(app, argc, argv);

  try {
    fixture::write_national(fixture::make_national(seed, missing_rate), dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  std::cout << "fixture written to " << dir << '\n';
  return 0;
}
