#pragma once

#include <filesystem>
#include <random>
#include <string>

namespace personakit::testing {

inline std::filesystem::path data_dir() { return PERSONAKIT_TEST_DATA; }
inline std::filesystem::path fixture_dir() { return PERSONAKIT_TEST_FIXTURES; }

// Fresh, empty scratch directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::path(PERSONAKIT_TEST_SCRATCH) / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace personakit::testing
