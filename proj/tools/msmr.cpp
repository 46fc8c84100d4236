#include <iostream>

#include "msmr/pipeline/commands.hpp"

int main(int argc, char** argv) {
  return msmr::pipeline::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
