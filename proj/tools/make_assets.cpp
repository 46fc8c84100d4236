#include <iostream>

#include "msmr/error.hpp"
#include "msmr/mesh/asset.hpp"
#include "msmr/scene/scene.hpp"

int main(int argc, char** argv) {
  const std::filesystem::path dir = argc > 1 ? argv[1] : msmr::mesh::asset_root();
  try {
    const auto right = msmr::mesh::make_hand_template();
    msmr::mesh::save_asset(right, dir, "hand_right");
    msmr::mesh::save_asset(right.mirrored(), dir, "hand_left");
    msmr::mesh::save_asset(msmr::scene::make_capsule_object(), dir, "object");
    for (const char* stem : {"hand_right", "hand_left", "object"}) msmr::mesh::load_asset(dir, stem);
  } catch (const msmr::Error& e) {
    std::cerr << "make_assets: " << e.what() << '\n';
    return 1;
  }
  std::cout << "wrote hand_right, hand_left and object to " << dir.string() << '\n';
  return 0;
}
