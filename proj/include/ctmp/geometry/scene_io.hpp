#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ctmp/geometry/geometry.hpp"

namespace ctmp::geo {

inline constexpr const char* kSceneSchema = "ctmp-scene/1";

/// Missing fields take their defaults; unknown fields and a missing or
/// foreign "schema" are errors. The result is validated.
Scene scene_from_json(const nlohmann::json& j);
/// Canonical form: every geometric field, fixed key order.
nlohmann::json scene_to_json(const Scene& scene);
Scene load_scene(const std::string& path);

/// FNV-1a over the canonical JSON of the scene.
std::uint64_t scene_hash(const Scene& scene);
std::string hex64(std::uint64_t v);

}  // namespace ctmp::geo
