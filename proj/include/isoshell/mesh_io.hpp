#pragma once

#include "isoshell/tri_mesh.hpp"

#include <filesystem>
#include <string>

namespace isoshell {

enum class StlFormat { Binary, Ascii };

/// Writes triangles with float32 coordinates. Facet normals follow the winding.
void save_stl(std::span<const Vec3> vertices, std::span<const Tri> triangles,
              const std::filesystem::path& path, StlFormat format = StlFormat::Binary,
              const std::string& header = "isoshell");
void save_stl(const TriMesh& mesh, const std::filesystem::path& path, StlFormat format = StlFormat::Binary);

/// Reads binary or ASCII STL. Bit-identical corners are merged and vertices are
/// numbered in first-use order, so a compacted mesh round-trips with its indices.
/// Throws MalformedFile with the byte offset of the first bad record.
TriMesh load_stl(const std::filesystem::path& path);

/// Plane definitions, plane tags, domain/source maps, box and cell spec.
void save_sidecar(const TriMesh& mesh, const std::filesystem::path& path);

/// Restores sidecar metadata onto a mesh loaded from the matching STL.
void apply_sidecar(TriMesh& mesh, const std::filesystem::path& path);

/// STL plus "<stem>.mesh.json" sidecar next to it.
std::filesystem::path sidecar_path(const std::filesystem::path& stl);
void save_mesh(const TriMesh& mesh, const std::filesystem::path& stl, StlFormat format = StlFormat::Binary);
TriMesh load_mesh(const std::filesystem::path& stl);

} // namespace isoshell
